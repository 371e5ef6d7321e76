#pragma once

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lmapf/lifelong.hpp"

namespace lmapf {

// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline double parse_double(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return v;
}

// Per-query metrics, one CSV row each.
struct DetailRow {
  SolverVariant variant = SolverVariant::rhcr;
  int agents = 0;
  int instance = 0;
  std::uint64_t instance_seed = 0;
  QueryLog query;
};

// Per-(variant, k) aggregates.
struct AggregateRow {
  SolverVariant variant = SolverVariant::rhcr;
  int agents = 0;
  int instances = 0;
  std::size_t queries = 0;
  double success_rate = 0;
  double mean_runtime = 0;
  double stddev_runtime = 0;           // across queries
  double stddev_instance_runtime = 0;  // across per-instance mean runtimes
  double mean_pt_depth = 0;
  double mean_pt_nodes_expanded = 0;
  double mean_low_level_expansions = 0;
  double mean_pt_max_width = 0;
  double fallback_rate = 0;  // among queries solved with experience
  double throughput = 0;     // mean over instances
  long long total_cost = 0;
};

struct ExperimentConfig {
  ExperimentConfig() = default;
  ExperimentConfig(GridMap m, std::string source) : map(std::move(m)), map_source(std::move(source)) {}

  GridMap map;
  std::string map_source;  // for the manifest
  std::vector<int> agent_counts{10, 20, 30};
  int instances = 5;
  LifelongConfig base;  // agents, seed and solver are overridden per cell
  std::vector<SolverVariant> variants{SolverVariant::rhcr, SolverVariant::exrhcr};
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct ExperimentReport {
  std::vector<DetailRow> rows;
  std::vector<AggregateRow> aggregates;
};

// Same (k, instance) pair gets the same seed for every variant.
inline std::uint64_t instance_seed(std::uint64_t base, int agents, int instance) {
  std::uint64_t x = base ^ (static_cast<std::uint64_t>(agents) << 32) ^
                    static_cast<std::uint64_t>(instance);
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace detail {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
inline double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  double m = mean(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct Cell3 {
  SolverVariant variant;
  int agents;
  int instance;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (unsigned j = 0; j < std::min<std::size_t>(jobs, n); ++j)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

}  // namespace detail

// Aggregates are a pure function of the detail rows, in row order.
inline std::vector<AggregateRow> aggregate(const std::vector<DetailRow>& rows,
                                           Timestep total_timesteps) {
  struct Acc {
    std::vector<double> runtime, depth, nodes, low, width;
    std::size_t solved = 0, experienced = 0, fallbacks = 0;
    long long cost = 0;
    std::map<int, std::vector<double>> per_instance_runtime;
    std::map<int, std::size_t> per_instance_tasks;
  };
  std::vector<std::pair<SolverVariant, int>> order;
  std::map<std::pair<SolverVariant, int>, Acc> acc;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.variant, r.agents);
    if (!acc.contains(key)) order.push_back(key);
    auto& a = acc[key];
    const auto& q = r.query;
    a.runtime.push_back(q.runtime_seconds);
    a.depth.push_back(static_cast<double>(q.stats.pt_depth_of_solution));
    a.nodes.push_back(static_cast<double>(q.stats.pt_nodes_expanded));
    a.low.push_back(static_cast<double>(q.stats.low_level_expansions));
    a.width.push_back(static_cast<double>(q.stats.pt_max_width));
    if (q.solved()) ++a.solved;
    if (q.solver != QuerySolver::pbs) {
      ++a.experienced;
      if (q.stats.fallback_used) ++a.fallbacks;
    }
    a.cost += q.cost;
    a.per_instance_runtime[r.instance].push_back(q.runtime_seconds);
    a.per_instance_tasks[r.instance] += q.tasks_completed;
  }
  std::vector<AggregateRow> out;
  for (const auto& key : order) {
    const auto& a = acc[key];
    AggregateRow g;
    g.variant = key.first;
    g.agents = key.second;
    g.instances = static_cast<int>(a.per_instance_runtime.size());
    g.queries = a.runtime.size();
    g.success_rate = static_cast<double>(a.solved) / static_cast<double>(g.queries);
    g.mean_runtime = detail::mean(a.runtime);
    g.stddev_runtime = detail::stddev(a.runtime);
    std::vector<double> inst_means, inst_throughput;
    for (const auto& [i, v] : a.per_instance_runtime) inst_means.push_back(detail::mean(v));
    for (const auto& [i, n] : a.per_instance_tasks)
      inst_throughput.push_back(static_cast<double>(n) / total_timesteps);
    g.stddev_instance_runtime = detail::stddev(inst_means);
    g.mean_pt_depth = detail::mean(a.depth);
    g.mean_pt_nodes_expanded = detail::mean(a.nodes);
    g.mean_low_level_expansions = detail::mean(a.low);
    g.mean_pt_max_width = detail::mean(a.width);
    g.fallback_rate = a.experienced ? static_cast<double>(a.fallbacks) / a.experienced : 0.0;
    g.throughput = detail::mean(inst_throughput);
    g.total_cost = a.cost;
    out.push_back(g);
  }
  return out;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  std::vector<detail::Cell3> cells;
  for (auto v : cfg.variants)
    for (int k : cfg.agent_counts)
      for (int i = 0; i < cfg.instances; ++i) cells.push_back({v, k, i});

  std::vector<RunReport> runs(cells.size());
  detail::parallel_for(cells.size(), cfg.jobs, [&](std::size_t i) {
    LifelongConfig lc = cfg.base;
    lc.solver = cells[i].variant;
    lc.agents = cells[i].agents;
    lc.seed = instance_seed(cfg.seed, cells[i].agents, cells[i].instance);
    runs[i] = run_lifelong(lc, cfg.map);
  });

  ExperimentReport report;
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (const auto& q : runs[i].queries)
      report.rows.push_back({cells[i].variant, cells[i].agents, cells[i].instance,
                             instance_seed(cfg.seed, cells[i].agents, cells[i].instance), q});
  report.aggregates = aggregate(report.rows, cfg.base.total_timesteps);
  return report;
}

// ---- CSV ----------------------------------------------------------------

inline constexpr std::string_view kDetailHeader =
    "variant,agents,instance,instance_seed,query,timestep,solver,"
    "runtime_s,status,pt_nodes_expanded,pt_depth_of_solution,pt_max_width,"
    "low_level_expansions,fallback_used,"
    "pt_nodes_generated,fallback_reason,cost,tasks_completed,executed_steps";

inline constexpr std::string_view kAggregateHeader =
    "variant,agents,instances,queries,success_rate,mean_runtime_s,stddev_runtime_s,"
    "stddev_instance_runtime_s,mean_pt_depth,mean_pt_nodes_expanded,"
    "mean_low_level_expansions,mean_pt_max_width,fallback_rate,throughput,total_cost";

inline std::string detail_line(const DetailRow& r) {
  const auto& q = r.query;
  std::ostringstream os;
  os << to_string(r.variant) << ',' << r.agents << ',' << r.instance << ',' << r.instance_seed
     << ',' << q.index << ',' << q.timestep << ',' << to_string(q.solver) << ','
     << format_double(q.runtime_seconds) << ',' << to_string(q.status) << ','
     << q.stats.pt_nodes_expanded << ',' << q.stats.pt_depth_of_solution << ','
     << q.stats.pt_max_width << ',' << q.stats.low_level_expansions << ','
     << (q.stats.fallback_used ? 1 : 0) << ',' << q.stats.pt_nodes_generated << ','
     << to_string(q.stats.fallback_reason) << ',' << q.cost << ',' << q.tasks_completed << ','
     << q.executed_steps;
  return os.str();
}

inline std::string aggregate_line(const AggregateRow& g) {
  std::ostringstream os;
  os << to_string(g.variant) << ',' << g.agents << ',' << g.instances << ',' << g.queries << ','
     << format_double(g.success_rate) << ',' << format_double(g.mean_runtime) << ','
     << format_double(g.stddev_runtime) << ',' << format_double(g.stddev_instance_runtime) << ','
     << format_double(g.mean_pt_depth) << ',' << format_double(g.mean_pt_nodes_expanded) << ','
     << format_double(g.mean_low_level_expansions) << ',' << format_double(g.mean_pt_max_width)
     << ',' << format_double(g.fallback_rate) << ',' << format_double(g.throughput) << ','
     << g.total_cost;
  return os.str();
}

inline void write_detail_csv(std::ostream& os, const std::vector<DetailRow>& rows) {
  os << kDetailHeader << '\n';
  for (const auto& r : rows) os << detail_line(r) << '\n';
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << kAggregateHeader << '\n';
  for (const auto& g : rows) os << aggregate_line(g) << '\n';
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  while (true) {
    auto p = line.find(sep);
    out.push_back(line.substr(0, p));
    if (p == std::string_view::npos) break;
    line.remove_prefix(p + 1);
  }
  return out;
}

template <class T>
T parse_int(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  return v;
}

inline SolveStatus parse_status(std::string_view s) {
  for (auto v : {SolveStatus::solved, SolveStatus::failed, SolveStatus::timeout,
                 SolveStatus::infeasible_seed})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

inline QuerySolver parse_query_solver(std::string_view s) {
  for (auto v : {QuerySolver::pbs, QuerySolver::expbs, QuerySolver::prioritized})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown query solver '" + std::string(s) + "'");
}

inline Termination parse_termination(std::string_view s) {
  for (auto v : {Termination::none, Termination::solved, Termination::exhausted,
                 Termination::width_exceeded, Termination::infeasible_root, Termination::timeout})
    if (to_string(v) == s) return v;
  throw std::invalid_argument("unknown termination '" + std::string(s) + "'");
}

}  // namespace detail

inline std::vector<DetailRow> read_detail_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kDetailHeader)
    throw std::runtime_error("detail CSV header mismatch");
  std::vector<DetailRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = detail::split(line);
    if (f.size() != 19) throw std::runtime_error("detail CSV row has wrong column count");
    DetailRow r;
    r.variant = parse_solver_variant(f[0]);
    r.agents = detail::parse_int<int>(f[1]);
    r.instance = detail::parse_int<int>(f[2]);
    r.instance_seed = detail::parse_int<std::uint64_t>(f[3]);
    auto& q = r.query;
    q.index = detail::parse_int<int>(f[4]);
    q.timestep = detail::parse_int<int>(f[5]);
    q.solver = detail::parse_query_solver(f[6]);
    q.runtime_seconds = parse_double(f[7]);
    q.status = detail::parse_status(f[8]);
    q.stats.pt_nodes_expanded = detail::parse_int<std::size_t>(f[9]);
    q.stats.pt_depth_of_solution = detail::parse_int<std::size_t>(f[10]);
    q.stats.pt_max_width = detail::parse_int<std::size_t>(f[11]);
    q.stats.low_level_expansions = detail::parse_int<std::size_t>(f[12]);
    q.stats.fallback_used = f[13] == "1";
    q.stats.pt_nodes_generated = detail::parse_int<std::size_t>(f[14]);
    q.stats.fallback_reason = detail::parse_termination(f[15]);
    q.cost = detail::parse_int<int>(f[16]);
    q.tasks_completed = detail::parse_int<std::size_t>(f[17]);
    q.executed_steps = detail::parse_int<int>(f[18]);
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::json manifest(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["map"] = {{"source", cfg.map_source}, {"rows", cfg.map.rows()}, {"cols", cfg.map.cols()},
              {"obstacle_fraction", cfg.map.obstacle_fraction()}};
  j["agent_counts"] = cfg.agent_counts;
  j["instances"] = cfg.instances;
  j["seed"] = cfg.seed;
  std::vector<std::string> variants;
  for (auto v : cfg.variants) variants.emplace_back(to_string(v));
  j["variants"] = variants;
  const auto& b = cfg.base;
  j["lifelong"] = {{"window", b.window},
                   {"replan", b.replan},
                   {"lookahead", b.lookahead},
                   {"width_limit", b.width_limit},
                   {"total_timesteps", b.total_timesteps},
                   {"query_deadline_s", b.query_deadline}};
  nlohmann::json seeds = nlohmann::json::array();
  for (int k : cfg.agent_counts)
    for (int i = 0; i < cfg.instances; ++i)
      seeds.push_back({{"agents", k}, {"instance", i}, {"seed", instance_seed(cfg.seed, k, i)}});
  j["instance_seeds"] = seeds;
  return j;
}

// Writes detail.csv, aggregate.csv and manifest.json into `dir`.
inline void write_experiment(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                             const ExperimentReport& report) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("detail.csv");
    write_detail_csv(f, report.rows);
  }
  {
    auto f = open("aggregate.csv");
    write_aggregate_csv(f, report.aggregates);
  }
  {
    auto f = open("manifest.json");
    f << manifest(cfg).dump(2) << '\n';
  }
}

// ---- parameter sweeps ---------------------------------------------------

struct DeltaRow {
  int delta = 0;
  double mean_pt_depth = 0;
  double mean_pt_nodes_expanded = 0;
  double mean_runtime = 0;
  double success_rate = 0;
  double fallback_rate = 0;
};

namespace detail {

inline AggregateRow pooled(const ExperimentConfig& cfg, const LifelongConfig& lc) {
  ExperimentConfig c = cfg;
  c.base = lc;
  c.variants = {lc.solver};
  auto rep = run_experiment(c);
  for (auto& r : rep.rows) r.agents = 0;
  return aggregate(rep.rows, lc.total_timesteps).front();
}

}  // namespace detail

// exRHCR for each δ over all (k, instance) cells of `cfg`; δ = 0 is RHCR.
inline std::vector<DeltaRow> sweep_delta(const ExperimentConfig& cfg,
                                         const std::vector<int>& deltas) {
  std::vector<DeltaRow> out;
  for (int d : deltas) {
    LifelongConfig lc = cfg.base;
    lc.solver = SolverVariant::exrhcr;
    lc.lookahead = d;
    auto g = detail::pooled(cfg, lc);
    out.push_back({d, g.mean_pt_depth, g.mean_pt_nodes_expanded, g.mean_runtime, g.success_rate,
                   g.fallback_rate});
  }
  return out;
}

inline constexpr std::string_view kDeltaHeader =
    "delta,mean_pt_depth,mean_pt_nodes_expanded,mean_runtime_s,success_rate,fallback_rate";

inline void write_delta_csv(std::ostream& os, const std::vector<DeltaRow>& rows) {
  os << kDeltaHeader << '\n';
  for (const auto& r : rows)
    os << r.delta << ',' << format_double(r.mean_pt_depth) << ','
       << format_double(r.mean_pt_nodes_expanded) << ',' << format_double(r.mean_runtime) << ','
       << format_double(r.success_rate) << ',' << format_double(r.fallback_rate) << '\n';
}

// The five radar attributes, raw and normalized by their max across ℓ.
struct WidthRow {
  std::size_t width_limit = 0;
  std::array<double, 5> raw{};
  std::array<double, 5> normalized{};
  double fallback_rate = 0;
};

inline constexpr std::array<std::string_view, 5> kWidthAttributes{
    "runtime", "pt_width", "low_level_expansions", "pt_expansions", "pt_depth"};

inline std::vector<WidthRow> sweep_width(const ExperimentConfig& cfg,
                                         const std::vector<std::size_t>& limits) {
  std::vector<WidthRow> out;
  for (std::size_t l : limits) {
    LifelongConfig lc = cfg.base;
    lc.solver = SolverVariant::exrhcr;
    lc.width_limit = l;
    auto g = detail::pooled(cfg, lc);
    WidthRow r;
    r.width_limit = l;
    r.raw = {g.mean_runtime, g.mean_pt_max_width, g.mean_low_level_expansions,
             g.mean_pt_nodes_expanded, g.mean_pt_depth};
    r.fallback_rate = g.fallback_rate;
    out.push_back(r);
  }
  for (std::size_t a = 0; a < 5; ++a) {
    double mx = 0;
    for (const auto& r : out) mx = std::max(mx, r.raw[a]);
    for (auto& r : out) r.normalized[a] = mx > 0 ? r.raw[a] / mx : 0.0;
  }
  return out;
}

inline void write_width_csv(std::ostream& os, const std::vector<WidthRow>& rows) {
  os << "width_limit";
  for (auto a : kWidthAttributes) os << ',' << a;
  for (auto a : kWidthAttributes) os << ",norm_" << a;
  os << ",fallback_rate\n";
  for (const auto& r : rows) {
    os << r.width_limit;
    for (double v : r.raw) os << ',' << format_double(v);
    for (double v : r.normalized) os << ',' << format_double(v);
    os << ',' << format_double(r.fallback_rate) << '\n';
  }
}

}  // namespace lmapf
