#pragma once

#include <chrono>
#include <stdexcept>
#include <vector>

#include "lmapf/pbs.hpp"

namespace lmapf {

inline constexpr std::size_t kDefaultWidthLimit = 10;

// A permutation of all agents, highest priority first.
struct TotalPriority {
  std::vector<AgentId> order;

  // Chain a0≺a1≺...; the transitive closure is the full order.
  PrioritySet as_priority_set() const {
    PrioritySet ps;
    for (std::size_t i = 1; i < order.size(); ++i) ps.add({order[i - 1], order[i]});
    return ps;
  }
  friend bool operator==(const TotalPriority&, const TotalPriority&) = default;
};

inline TotalPriority to_total(const PrioritySet& seed, std::span<const AgentId> agents) {
  return {kahn_order(seed, agents)};
}

namespace detail {

inline void absorb(SolveStats& into, const SolveStats& from) {
  into.pt_nodes_expanded += from.pt_nodes_expanded;
  into.pt_nodes_generated += from.pt_nodes_generated;
  into.pt_max_width = std::max(into.pt_max_width, from.pt_max_width);
  into.pt_tree_depth = std::max(into.pt_tree_depth, from.pt_tree_depth);
  into.low_level_expansions += from.low_level_expansions;
  into.low_level_calls += from.low_level_calls;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Vanilla PBS after a failed first phase; merges the first phase's effort.
inline SolveResult fall_back(const WMAPFQuery& query, DistanceCache& cache,
                             const Deadline& deadline, const SolveStats& first,
                             std::size_t first_depth, Termination reason,
                             std::chrono::steady_clock::time_point t0) {
  SolveResult res = PriorityTreeSearch(query, cache).run(PrioritySet{}, deadline, {});
  SolveStats merged = first;
  absorb(merged, res.stats);
  merged.pt_depth_of_solution = first_depth + res.stats.pt_depth_of_solution;
  merged.fallback_used = true;
  merged.fallback_reason = reason;
  res.stats = merged;
  res.stats.runtime_seconds = seconds_since(t0);
  return res;
}

}  // namespace detail

// PBS rooted at `seed`, explored with width-limited DFS. If the seeded tree
// gets wider than `width_limit`, its root is infeasible, or it is exhausted,
// vanilla PBS runs under the same deadline. Depth statistics add up across
// both trees.
inline SolveResult expbs_solve(const WMAPFQuery& query, const PrioritySet& seed,
                               std::size_t width_limit, const Deadline& deadline,
                               DistanceCache& cache) {
  if (width_limit <= 1) throw std::invalid_argument("width limit must exceed 1");
  query.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const PrioritySet usable = seed.restricted_to(query.agent_count());

  SearchOptions opt;
  opt.width_limit = width_limit;
  SolveResult first = PriorityTreeSearch(query, cache).run(usable, deadline, opt);
  const Termination why = first.termination;
  const bool retry = why == Termination::width_exceeded || why == Termination::infeasible_root ||
                     (why == Termination::exhausted && !usable.empty());
  if (!retry) {
    if (first.status == SolveStatus::infeasible_seed) first.status = SolveStatus::failed;
    return first;
  }
  return detail::fall_back(query, cache, deadline, first.stats, first.stats.pt_tree_depth, why, t0);
}

inline SolveResult expbs_solve(const WMAPFQuery& query, const PrioritySet& seed,
                               std::size_t width_limit = kDefaultWidthLimit,
                               const Deadline& deadline = Deadline::never()) {
  DistanceCache cache(*query.map);
  return expbs_solve(query, seed, width_limit, deadline, cache);
}

// Prioritized planning in `order`; vanilla PBS if any agent has no path.
inline SolveResult prioritized_solve(const WMAPFQuery& query, const TotalPriority& order,
                                     const Deadline& deadline, DistanceCache& cache) {
  query.validate();
  if (order.order.size() != static_cast<std::size_t>(query.agent_count()))
    throw std::invalid_argument("total priority must cover every agent");
  const auto t0 = std::chrono::steady_clock::now();

  SolveStats stats;
  stats.pt_nodes_expanded = 1;
  stats.pt_nodes_generated = 1;
  stats.pt_max_width = 1;

  std::vector<Path> paths(query.starts.size());
  ReservationTable table(query.window);
  for (AgentId a : order.order) {
    auto r = plan_path(*query.map, query.starts[a], query.goals[a], table, query.window,
                       cache.to(query.goals[a]));
    stats.low_level_expansions += r.expansions;
    ++stats.low_level_calls;
    if (!r.path)
      return detail::fall_back(query, cache, deadline, stats, 0, Termination::infeasible_root, t0);
    r.path->agent = a;
    table.reserve(*r.path);
    paths[a] = std::move(*r.path);
  }

  SolveResult res;
  res.status = SolveStatus::solved;
  res.termination = Termination::solved;
  res.paths = std::move(paths);
  res.seed = order.as_priority_set();
  res.stats = stats;
  res.stats.runtime_seconds = detail::seconds_since(t0);
  return res;
}

inline SolveResult prioritized_solve(const WMAPFQuery& query, const TotalPriority& order,
                                     const Deadline& deadline = Deadline::never()) {
  DistanceCache cache(*query.map);
  return prioritized_solve(query, order, deadline, cache);
}

}  // namespace lmapf
