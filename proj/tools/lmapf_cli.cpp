#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmapf/lmapf.hpp"

using namespace lmapf;
namespace fs = std::filesystem;

namespace {

struct MapOptions {
  std::string map_path;
  std::string layout;
};

struct Common {
  MapOptions map;
  std::uint64_t seed = 0;
  Timestep window = 10;
  Timestep replan = 5;
  std::optional<int> delta;
  std::size_t width_limit = kDefaultWidthLimit;
  double timeout = 5.0;
  Timestep timesteps = 100;
  std::string out;
};

void add_map_flags(CLI::App* app, MapOptions& m) {
  app->add_option("--map", m.map_path, "Map file (text grid)");
  app->add_option("--layout", m.layout, "Generated layout instead of --map")
      ->check(CLI::IsMember({"warehouse", "sorting", "desk"}));
}

void add_lifelong_flags(CLI::App* app, Common& c) {
  app->add_option("--window", c.window, "Planning window w")->capture_default_str();
  app->add_option("--replan", c.replan, "Replanning period h")->capture_default_str();
  app->add_option("--delta", c.delta, "Experience lookahead (default floor(w/h)-1)");
  app->add_option("--width-limit", c.width_limit, "exPBS width limit")->capture_default_str();
  app->add_option("--timeout-secs", c.timeout, "Per-query deadline")->capture_default_str();
  app->add_option("--timesteps", c.timesteps, "Simulated timesteps")->capture_default_str();
}

// --map wins; otherwise --layout with --seed; otherwise the 15x21 desk warehouse.
std::pair<GridMap, std::string> resolve_map(const MapOptions& m, std::uint64_t seed) {
  if (!m.map_path.empty()) return {load_map_file(m.map_path), m.map_path};
  const std::string kind = m.layout.empty() ? "desk" : m.layout;
  const std::string source = kind + ":seed=" + std::to_string(seed);
  if (kind == "desk") return {generate_desk_warehouse(seed), source};
  return {generate_layout(parse_layout_kind(kind), seed), source};
}

LifelongConfig lifelong_config(const Common& c, int agents, SolverVariant solver) {
  LifelongConfig lc;
  lc.window = c.window;
  lc.replan = c.replan;
  lc.lookahead = c.delta ? *c.delta : default_lookahead(c.window, c.replan);
  lc.width_limit = c.width_limit;
  lc.agents = agents;
  lc.total_timesteps = c.timesteps;
  lc.query_deadline = c.timeout;
  lc.seed = c.seed;
  lc.solver = solver;
  lc.validate();
  return lc;
}

std::ofstream open_out(const std::string& path) {
  if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

nlohmann::json paths_json(const std::vector<Path>& paths) {
  auto a = nlohmann::json::array();
  for (const auto& p : paths) {
    auto cells = nlohmann::json::array();
    for (Cell c : p.cells) cells.push_back({c.row, c.col});
    a.push_back({{"agent", p.agent}, {"cells", cells}});
  }
  return a;
}

nlohmann::json stats_json(const SolveStats& s) {
  return {{"pt_nodes_expanded", s.pt_nodes_expanded},
          {"pt_nodes_generated", s.pt_nodes_generated},
          {"pt_depth_of_solution", s.pt_depth_of_solution},
          {"pt_max_width", s.pt_max_width},
          {"low_level_expansions", s.low_level_expansions},
          {"runtime_s", s.runtime_seconds},
          {"fallback_used", s.fallback_used},
          {"fallback_reason", std::string(to_string(s.fallback_reason))}};
}

ExperimentConfig experiment_config(const Common& c, const std::vector<int>& agents, int instances,
                                   const std::vector<std::string>& solvers, unsigned jobs) {
  auto [map, source] = resolve_map(c.map, c.seed);
  ExperimentConfig e{std::move(map), source};
  e.agent_counts = agents;
  e.instances = instances;
  e.base = lifelong_config(c, agents.front(), SolverVariant::exrhcr);
  e.variants.clear();
  for (const auto& s : solvers) e.variants.push_back(parse_solver_variant(s));
  e.seed = c.seed;
  e.jobs = jobs;
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifelong multi-agent path finding with experience-seeded PBS"};
  app.require_subcommand(1);

  // solve
  Common solve_c;
  std::string scenario_path;
  auto* solve = app.add_subcommand("solve", "Solve one windowed query from a scenario file");
  add_map_flags(solve, solve_c.map);
  solve->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  solve->add_option("--window", solve_c.window, "Window (if the scenario has none)");
  solve->add_option("--width-limit", solve_c.width_limit, "exPBS width limit");
  solve->add_option("--timeout-secs", solve_c.timeout, "Deadline");
  solve->add_option("--seed", solve_c.seed, "Layout seed");
  solve->add_option("--out", solve_c.out, "Write result JSON here instead of stdout");

  // lifelong
  Common life_c;
  int life_agents = 10;
  std::string life_solver = "exrhcr";
  std::string life_scenario;
  auto* life = app.add_subcommand("lifelong", "Run one lifelong simulation");
  add_map_flags(life, life_c.map);
  add_lifelong_flags(life, life_c);
  life->add_option("--agents", life_agents, "Number of agents")->capture_default_str();
  life->add_option("--solver", life_solver)
      ->check(CLI::IsMember({"rhcr", "exrhcr", "exrhcr-tot"}))
      ->capture_default_str();
  life->add_option("--scenario", life_scenario, "Fixed initial starts/goals");
  life->add_option("--seed", life_c.seed, "Instance seed")->capture_default_str();
  life->add_option("--out", life_c.out, "Output directory");

  // experiment
  Common exp_c;
  std::vector<int> exp_agents{10, 20, 30};
  int exp_instances = 5;
  std::vector<std::string> exp_solvers{"rhcr", "exrhcr"};
  unsigned exp_jobs = 1;
  auto* exp = app.add_subcommand("experiment", "Batch of lifelong runs with CSV report");
  add_map_flags(exp, exp_c.map);
  add_lifelong_flags(exp, exp_c);
  exp->add_option("--agents", exp_agents, "Agent counts")->delimiter(',')->capture_default_str();
  exp->add_option("--instances", exp_instances)->capture_default_str();
  exp->add_option("--solver", exp_solvers, "Variants")
      ->delimiter(',')
      ->check(CLI::IsMember({"rhcr", "exrhcr", "exrhcr-tot"}))
      ->capture_default_str();
  exp->add_option("--seed", exp_c.seed)->capture_default_str();
  exp->add_option("--jobs", exp_jobs, "Parallel simulations")->capture_default_str();
  exp->add_option("--out", exp_c.out, "Output directory")->required();

  // sweep-delta
  Common sd_c;
  std::vector<int> sd_agents{10, 20, 30};
  int sd_instances = 5;
  std::vector<int> sd_deltas{0, 1, 2, 3};
  unsigned sd_jobs = 1;
  auto* sd = app.add_subcommand("sweep-delta", "Mean PT depth of exrhcr for each lookahead");
  add_map_flags(sd, sd_c.map);
  add_lifelong_flags(sd, sd_c);
  sd->remove_option(sd->get_option("--delta"));
  sd->add_option("--delta", sd_deltas, "Lookahead values")->delimiter(',')->capture_default_str();
  sd->add_option("--agents", sd_agents)->delimiter(',')->capture_default_str();
  sd->add_option("--instances", sd_instances)->capture_default_str();
  sd->add_option("--seed", sd_c.seed)->capture_default_str();
  sd->add_option("--jobs", sd_jobs)->capture_default_str();
  sd->add_option("--out", sd_c.out, "CSV file (stdout if omitted)");

  // sweep-width
  Common sw_c;
  std::vector<int> sw_agents{10, 20, 30};
  int sw_instances = 5;
  std::vector<std::size_t> sw_limits{2, 5, 10, 20, 50, 1000};
  unsigned sw_jobs = 1;
  auto* sw = app.add_subcommand("sweep-width", "Normalized exrhcr attributes for each width limit");
  add_map_flags(sw, sw_c.map);
  add_lifelong_flags(sw, sw_c);
  sw->remove_option(sw->get_option("--width-limit"));
  sw->add_option("--width-limit", sw_limits, "Width limits")->delimiter(',')->capture_default_str();
  sw->add_option("--agents", sw_agents)->delimiter(',')->capture_default_str();
  sw->add_option("--instances", sw_instances)->capture_default_str();
  sw->add_option("--seed", sw_c.seed)->capture_default_str();
  sw->add_option("--jobs", sw_jobs)->capture_default_str();
  sw->add_option("--out", sw_c.out, "CSV file (stdout if omitted)");

  // gen-map
  MapOptions gm;
  std::uint64_t gm_seed = 0;
  std::string gm_out;
  auto* gen = app.add_subcommand("gen-map", "Write a generated layout as a text grid");
  gen->add_option("--layout", gm.layout)
      ->check(CLI::IsMember({"warehouse", "sorting", "desk"}))
      ->required();
  gen->add_option("--seed", gm_seed)->capture_default_str();
  gen->add_option("--out", gm_out, "Map file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      auto [map, source] = resolve_map(solve_c.map, solve_c.seed);
      Scenario sc = load_scenario_file(scenario_path);
      WMAPFQuery q = sc.query(map, solve_c.window);
      const auto deadline = Deadline::after(solve_c.timeout);
      SolveResult r = sc.priorities ? expbs_solve(q, *sc.priorities, solve_c.width_limit, deadline)
                                    : pbs_solve(q, deadline);
      nlohmann::json j;
      j["map"] = source;
      j["status"] = std::string(to_string(r.status));
      j["cost"] = r.solved() ? r.cost() : 0;
      j["stats"] = stats_json(r.stats);
      j["paths"] = paths_json(r.paths);
      auto pri = nlohmann::json::array();
      for (Precedence p : r.seed) pri.push_back({p.higher, p.lower});
      j["priorities"] = pri;
      if (solve_c.out.empty()) {
        std::cout << j.dump(2) << '\n';
      } else {
        open_out(solve_c.out) << j.dump(2) << '\n';
      }
      return r.solved() ? 0 : 2;
    }

    if (*life) {
      auto [map, source] = resolve_map(life_c.map, life_c.seed);
      std::optional<std::pair<std::vector<Cell>, std::vector<Cell>>> fixed;
      if (!life_scenario.empty()) {
        Scenario sc = load_scenario_file(life_scenario);
        fixed.emplace(sc.starts, sc.goals);
        life_agents = static_cast<int>(sc.starts.size());
        if (sc.window) life_c.window = *sc.window;
      }
      auto lc = lifelong_config(life_c, life_agents, parse_solver_variant(life_solver));
      RunReport rep = run_lifelong(lc, map, fixed);
      std::vector<DetailRow> rows;
      for (const auto& q : rep.queries) rows.push_back({lc.solver, lc.agents, 0, lc.seed, q});
      auto agg = aggregate(rows, lc.total_timesteps);
      if (life_c.out.empty()) {
        write_aggregate_csv(std::cout, agg);
      } else {
        fs::create_directories(life_c.out);
        auto d = open_out((fs::path(life_c.out) / "detail.csv").string());
        write_detail_csv(d, rows);
        auto a = open_out((fs::path(life_c.out) / "aggregate.csv").string());
        write_aggregate_csv(a, agg);
        ExperimentConfig e{map, source};
        e.agent_counts = {lc.agents};
        e.instances = 1;
        e.base = lc;
        e.variants = {lc.solver};
        e.seed = lc.seed;
        nlohmann::json m = manifest(e);
        m.erase("instance_seeds");
        m["tasks_completed"] = rep.tasks_completed;
        m["throughput"] = rep.throughput;
        open_out((fs::path(life_c.out) / "manifest.json").string()) << m.dump(2) << '\n';
      }
      std::cerr << "queries " << rep.queries.size() << ", tasks " << rep.tasks_completed
                << ", throughput " << format_double(rep.throughput) << '\n';
      return 0;
    }

    if (*exp) {
      auto e = experiment_config(exp_c, exp_agents, exp_instances, exp_solvers, exp_jobs);
      auto rep = run_experiment(e);
      write_experiment(exp_c.out, e, rep);
      write_aggregate_csv(std::cout, rep.aggregates);
      return 0;
    }

    if (*sd) {
      auto e = experiment_config(sd_c, sd_agents, sd_instances, {"exrhcr"}, sd_jobs);
      auto rows = sweep_delta(e, sd_deltas);
      if (sd_c.out.empty()) {
        write_delta_csv(std::cout, rows);
      } else {
        auto f = open_out(sd_c.out);
        write_delta_csv(f, rows);
      }
      return 0;
    }

    if (*sw) {
      auto e = experiment_config(sw_c, sw_agents, sw_instances, {"exrhcr"}, sw_jobs);
      auto rows = sweep_width(e, sw_limits);
      if (sw_c.out.empty()) {
        write_width_csv(std::cout, rows);
      } else {
        auto f = open_out(sw_c.out);
        write_width_csv(f, rows);
      }
      return 0;
    }

    if (*gen) {
      auto [map, source] = resolve_map(gm, gm_seed);
      if (gm_out.empty()) {
        std::cout << serialize(map);
      } else {
        open_out(gm_out) << serialize(map);
      }
      std::cerr << source << ": " << map.rows() << "x" << map.cols() << ", obstacles "
                << format_double(map.obstacle_fraction()) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
