#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lmapf/expbs.hpp"

namespace lmapf {

enum class SolverVariant { rhcr, exrhcr, exrhcr_tot };

// Which query's priorities seed the exPBS calls.
//   per_batch:      a fresh PBS seed every δ+1 queries (the default)
//   reuse_forever:  the first PBS seed for the whole run
//   chain_previous: each query's solution seeds the next one
enum class ExperienceMode { per_batch, reuse_forever, chain_previous };

enum class QuerySolver { pbs, expbs, prioritized };

inline std::string_view to_string(SolverVariant v) {
  switch (v) {
    case SolverVariant::rhcr: return "rhcr";
    case SolverVariant::exrhcr: return "exrhcr";
    case SolverVariant::exrhcr_tot: return "exrhcr-tot";
  }
  return "?";
}

inline std::string_view to_string(QuerySolver s) {
  switch (s) {
    case QuerySolver::pbs: return "pbs";
    case QuerySolver::expbs: return "expbs";
    case QuerySolver::prioritized: return "prioritized";
  }
  return "?";
}

inline SolverVariant parse_solver_variant(std::string_view s) {
  if (s == "rhcr") return SolverVariant::rhcr;
  if (s == "exrhcr") return SolverVariant::exrhcr;
  if (s == "exrhcr-tot" || s == "exrhcr_tot") return SolverVariant::exrhcr_tot;
  throw std::invalid_argument("unknown solver '" + std::string(s) + "'");
}

// ⌊w/h⌋ − 1, floored at 0.
inline int default_lookahead(Timestep w, Timestep h) {
  if (h < 1 || h > w) throw std::invalid_argument("replanning rate must satisfy 1 <= h <= w");
  return std::max(0, w / h - 1);
}

struct LifelongConfig {
  Timestep window = 10;
  Timestep replan = 5;
  int lookahead = 1;
  std::size_t width_limit = kDefaultWidthLimit;
  int agents = 10;
  Timestep total_timesteps = 100;
  double query_deadline = 30.0;
  std::uint64_t seed = 0;
  SolverVariant solver = SolverVariant::exrhcr;
  ExperienceMode experience = ExperienceMode::per_batch;

  void validate() const {
    if (replan < 1 || replan > window) throw std::invalid_argument("need 1 <= h <= w");
    if (lookahead < 0) throw std::invalid_argument("lookahead must be non-negative");
    if (width_limit <= 1) throw std::invalid_argument("width limit must exceed 1");
    if (agents < 1) throw std::invalid_argument("need at least one agent");
    if (total_timesteps < 1) throw std::invalid_argument("need a positive horizon");
    if (query_deadline <= 0) throw std::invalid_argument("query deadline must be positive");
  }
};

// Random two-color task assigner: goals alternate between workstations and
// task locations, and no goal cell is held by two agents at once.
class TaskAssigner {
 public:
  TaskAssigner(const GridMap& map, std::uint64_t seed) : map_(&map), rng_(seed) {}

  const GridMap& map() const { return *map_; }
  std::size_t tasks_completed() const { return completed_; }
  const std::vector<Cell>& goals() const { return goals_; }

  // k distinct random starts over all free cells, k distinct goals drawn
  // uniformly from both endpoint sets.
  WMAPFQuery initial_query(int k, Timestep w) {
    auto cells = map_->free_cells();
    std::vector<Cell> endpoints = map_->endpoints_a();
    endpoints.insert(endpoints.end(), map_->endpoints_b().begin(), map_->endpoints_b().end());
    std::sort(endpoints.begin(), endpoints.end());
    if (k < 1 || static_cast<std::size_t>(k) > cells.size())
      throw InsufficientCells("not enough free cells for " + std::to_string(k) + " agents");
    if (static_cast<std::size_t>(k) > endpoints.size())
      throw InsufficientCells("not enough endpoint cells for " + std::to_string(k) + " goals");
    std::vector<Cell> starts = sample(cells, k);
    std::vector<Cell> goals = sample(endpoints, k);
    return initial_query(std::move(starts), std::move(goals), w);
  }

  // Fixed starts and goals, e.g. a hand-made scenario.
  WMAPFQuery initial_query(std::vector<Cell> starts, std::vector<Cell> goals, Timestep w) {
    goals_ = goals;
    assigned_ = std::set<Cell>(goals.begin(), goals.end());
    completed_ = 0;
    WMAPFQuery q{map_, std::move(starts), std::move(goals), w};
    q.validate();
    return q;
  }

  // Advances every agent h steps along `solution` (parked past its end).
  // Agents that touched their goal within those steps are credited and get
  // a fresh goal of the other color.
  WMAPFQuery next_query(const WMAPFQuery& q, std::span<const Path> solution, Timestep h,
                        std::size_t* completed_now = nullptr) {
    WMAPFQuery next = q;
    std::size_t done = 0;
    for (AgentId a = 0; a < q.agent_count(); ++a) {
      const Path& p = solution[a];
      next.starts[a] = p.at(h);
      bool reached = false;
      for (Timestep t = 0; t <= h && !reached; ++t) reached = p.at(t) == goals_[a];
      if (!reached) continue;
      ++done;
      reassign(a);
    }
    completed_ += done;
    if (completed_now) *completed_now = done;
    next.goals = goals_;
    return next;
  }

 private:
  std::vector<Cell> sample(std::vector<Cell> pool, int k) {
    std::vector<Cell> out;
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      auto j = pick(rng_);
      out.push_back(pool[j]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return out;
  }

  void reassign(AgentId a) {
    const Cell old = goals_[a];
    const auto& other = map_->is_endpoint_a(old) ? map_->endpoints_b() : map_->endpoints_a();
    const auto& same = map_->is_endpoint_a(old) ? map_->endpoints_a() : map_->endpoints_b();
    assigned_.erase(old);
    auto pick_from = [&](const std::vector<Cell>& pool) -> std::optional<Cell> {
      std::vector<Cell> open;
      for (Cell c : pool)
        if (!assigned_.contains(c)) open.push_back(c);
      if (open.empty()) return std::nullopt;
      std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
      return open[pick(rng_)];
    };
    std::optional<Cell> next = pick_from(other);
    if (!next) next = pick_from(same);
    if (!next) next = old;
    goals_[a] = *next;
    assigned_.insert(*next);
  }

  const GridMap* map_;
  std::mt19937_64 rng_;
  std::vector<Cell> goals_;
  std::set<Cell> assigned_;
  std::size_t completed_ = 0;
};

struct QueryLog {
  int index = 0;
  Timestep timestep = 0;
  QuerySolver solver = QuerySolver::pbs;
  SolveStatus status = SolveStatus::failed;
  SolveStats stats;
  double runtime_seconds = 0.0;  // the full deadline for failed queries
  int cost = 0;
  std::size_t tasks_completed = 0;  // during this query's executed steps
  Timestep executed_steps = 0;

  bool solved() const { return status == SolveStatus::solved; }
};

inline bool same_log(const QueryLog& a, const QueryLog& b) {
  return a.index == b.index && a.timestep == b.timestep && a.solver == b.solver &&
         a.status == b.status && same_counters(a.stats, b.stats) && a.cost == b.cost &&
         a.tasks_completed == b.tasks_completed && a.executed_steps == b.executed_steps;
}

struct RunReport {
  std::vector<QueryLog> queries;
  std::size_t tasks_completed = 0;
  Timestep timesteps = 0;
  double throughput = 0.0;
  // trajectory[a][t]: executed position of agent a at timestep t.
  std::vector<std::vector<Cell>> trajectory;
};

// Rolling-horizon loop. rhcr solves every query with PBS. exrhcr solves the
// first query of each batch of δ+1 with PBS and the next δ with exPBS seeded
// by that solution's priorities; exrhcr-tot uses prioritized planning in a
// total order consistent with the seed instead. After a failed query the
// agents keep executing the last successful plan while it is still inside
// its window, otherwise they hold position, and the next query starts a
// fresh batch.
inline RunReport run_lifelong(const LifelongConfig& cfg, const GridMap& map,
                              std::optional<std::pair<std::vector<Cell>, std::vector<Cell>>>
                                  fixed_start = std::nullopt) {
  cfg.validate();
  TaskAssigner assigner(map, cfg.seed);
  WMAPFQuery q = fixed_start
                     ? assigner.initial_query(fixed_start->first, fixed_start->second, cfg.window)
                     : assigner.initial_query(cfg.agents, cfg.window);
  DistanceCache cache(map);

  RunReport report;
  report.trajectory.resize(q.starts.size());
  for (AgentId a = 0; a < q.agent_count(); ++a) report.trajectory[a].push_back(q.starts[a]);

  std::optional<PrioritySet> seed;
  int batch_pos = 0;
  std::optional<std::vector<Path>> last_plan;
  Timestep plan_offset = 0;

  Timestep now = 0;
  for (int i = 0; now < cfg.total_timesteps; ++i) {
    QueryLog log;
    log.index = i;
    log.timestep = now;

    const bool experienced = cfg.solver != SolverVariant::rhcr && seed.has_value() &&
                             (cfg.experience != ExperienceMode::per_batch ||
                              (batch_pos > 0 && batch_pos <= cfg.lookahead));
    const Deadline deadline = Deadline::after(cfg.query_deadline);
    SolveResult r;
    if (!experienced) {
      log.solver = QuerySolver::pbs;
      r = pbs_solve(q, PrioritySet{}, deadline, {}, cache);
    } else if (cfg.solver == SolverVariant::exrhcr) {
      log.solver = QuerySolver::expbs;
      r = expbs_solve(q, *seed, cfg.width_limit, deadline, cache);
    } else {
      log.solver = QuerySolver::prioritized;
      r = prioritized_solve(q, to_total(*seed, q.agent_ids()), deadline, cache);
    }
    log.status = r.status;
    log.stats = r.stats;
    log.runtime_seconds = r.solved() ? r.stats.runtime_seconds : cfg.query_deadline;

    const Timestep steps = std::min(cfg.replan, cfg.total_timesteps - now);
    std::vector<Path> executed;
    if (r.solved()) {
      log.cost = r.cost();
      if (log.solver == QuerySolver::pbs) {
        if (cfg.experience != ExperienceMode::reuse_forever || !seed) seed = r.seed;
        batch_pos = 1;
      } else {
        if (cfg.experience == ExperienceMode::chain_previous) seed = r.seed;
        batch_pos = batch_pos >= cfg.lookahead ? 0 : batch_pos + 1;
      }
      executed = r.paths;
      last_plan = std::move(r.paths);
      plan_offset = 0;
    } else {
      seed.reset();
      batch_pos = 0;
      if (last_plan && plan_offset + cfg.replan <= cfg.window) {
        for (const auto& p : *last_plan) {
          Path rest{p.agent, {}};
          for (Timestep t = plan_offset; t <= plan_offset + cfg.replan; ++t)
            rest.cells.push_back(p.at(t));
          executed.push_back(std::move(rest));
        }
      } else {
        last_plan.reset();
        for (AgentId a = 0; a < q.agent_count(); ++a) executed.push_back({a, {q.starts[a]}});
      }
    }

    for (AgentId a = 0; a < q.agent_count(); ++a)
      for (Timestep t = 1; t <= steps; ++t) report.trajectory[a].push_back(executed[a].at(t));

    q = assigner.next_query(q, executed, steps, &log.tasks_completed);
    log.executed_steps = steps;
    if (last_plan) plan_offset += cfg.replan;
    now += steps;
    report.queries.push_back(log);
  }

  report.timesteps = now;
  report.tasks_completed = assigner.tasks_completed();
  report.throughput = static_cast<double>(report.tasks_completed) / cfg.total_timesteps;
  return report;
}

}  // namespace lmapf
