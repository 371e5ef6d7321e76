#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "lmapf/conflicts.hpp"
#include "lmapf/priority.hpp"
#include "lmapf/spacetime_search.hpp"
#include "lmapf/width_tracker.hpp"

namespace lmapf {

// One windowed MAPF query. The map must outlive the query.
struct WMAPFQuery {
  const GridMap* map = nullptr;
  std::vector<Cell> starts;
  std::vector<Cell> goals;
  Timestep window = 1;

  int agent_count() const { return static_cast<int>(starts.size()); }
  std::vector<AgentId> agent_ids() const {
    std::vector<AgentId> ids(starts.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<AgentId>(i);
    return ids;
  }

  void validate() const {
    if (map == nullptr) throw InvalidQuery("query has no map");
    if (starts.empty()) throw InvalidQuery("query has no agents");
    if (starts.size() != goals.size()) throw InvalidQuery("starts and goals differ in length");
    if (window < 1) throw InvalidQuery("window must be at least 1");
    std::set<Cell> seen;
    for (Cell s : starts) {
      if (!map->free(s)) throw InvalidQuery("start cell is blocked or out of bounds");
      if (!seen.insert(s).second) throw InvalidQuery("two agents share a start cell");
    }
    for (Cell g : goals)
      if (!map->free(g)) throw InvalidQuery("goal cell is blocked or out of bounds");
  }
};

class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  static Deadline never() { return Deadline(Clock::time_point::max()); }
  static Deadline after(double seconds) {
    if (seconds <= 0) return Deadline(Clock::now());
    auto d = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
    return Deadline(Clock::now() + d);
  }

  bool expired() const { return at_ != Clock::time_point::max() && Clock::now() >= at_; }

 private:
  explicit Deadline(Clock::time_point at) : at_(at) {}
  Clock::time_point at_;
};

enum class SolveStatus { solved, failed, timeout, infeasible_seed };

// Why a search stopped without a solution, or why exPBS fell back.
enum class Termination { none, solved, exhausted, width_exceeded, infeasible_root, timeout };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::failed: return "failed";
    case SolveStatus::timeout: return "timeout";
    case SolveStatus::infeasible_seed: return "infeasible_seed";
  }
  return "?";
}

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::none: return "none";
    case Termination::solved: return "solved";
    case Termination::exhausted: return "exhausted";
    case Termination::width_exceeded: return "width_exceeded";
    case Termination::infeasible_root: return "infeasible_root";
    case Termination::timeout: return "timeout";
  }
  return "?";
}

struct SolveStats {
  std::size_t pt_nodes_expanded = 0;
  std::size_t pt_nodes_generated = 0;
  std::size_t pt_depth_of_solution = 0;
  std::size_t pt_tree_depth = 0;  // deepest generated node
  std::size_t pt_max_width = 0;
  std::size_t low_level_expansions = 0;
  std::size_t low_level_calls = 0;
  double runtime_seconds = 0.0;
  bool fallback_used = false;
  Termination fallback_reason = Termination::none;

  // Everything except wall-clock time.
  friend bool same_counters(const SolveStats& a, const SolveStats& b) {
    return a.pt_nodes_expanded == b.pt_nodes_expanded &&
           a.pt_nodes_generated == b.pt_nodes_generated &&
           a.pt_depth_of_solution == b.pt_depth_of_solution &&
           a.pt_tree_depth == b.pt_tree_depth && a.pt_max_width == b.pt_max_width &&
           a.low_level_expansions == b.low_level_expansions &&
           a.low_level_calls == b.low_level_calls && a.fallback_used == b.fallback_used &&
           a.fallback_reason == b.fallback_reason;
  }
};

// Lightweight record of one generated priority-tree node.
struct PTRecord {
  int id = 0;
  std::optional<int> parent;
  std::size_t depth = 0;
  std::optional<Precedence> added;
  int cost = 0;
  bool expanded = false;
};

struct PTNode {
  PrioritySet priorities;
  std::vector<Path> paths;
  int cost = 0;
  std::size_t depth = 0;
  int id = 0;
  std::optional<int> parent;
};

struct SolveResult {
  SolveStatus status = SolveStatus::failed;
  Termination termination = Termination::none;
  std::vector<Path> paths;
  PrioritySet seed;
  SolveStats stats;
  std::vector<PTRecord> tree;  // filled when SearchOptions::record_tree
  std::optional<int> solution_node;

  bool solved() const { return status == SolveStatus::solved; }
  int cost() const {
    int c = 0;
    for (const auto& p : paths) c += p.cost();
    return c;
  }
};

// Equal in everything but wall-clock time.
inline bool same_outcome(const SolveResult& a, const SolveResult& b) {
  return a.status == b.status && a.termination == b.termination && a.paths == b.paths &&
         a.seed == b.seed && same_counters(a.stats, b.stats);
}

struct SearchOptions {
  std::size_t width_limit = WidthTracker::kUnlimited;
  bool record_tree = false;
};

inline int total_cost(const std::vector<Path>& paths) {
  int c = 0;
  for (const auto& p : paths) c += p.cost();
  return c;
}

namespace detail {

inline std::optional<Path> replan_agent(const WMAPFQuery& q, const std::vector<Path>& paths,
                                        const PrioritySet& priorities, AgentId agent,
                                        DistanceCache& cache, SolveStats& stats) {
  ReservationTable table(q.window);
  for (AgentId h : priorities.higher_than(agent)) table.reserve(paths[h]);
  auto r = plan_path(*q.map, q.starts[agent], q.goals[agent], table, q.window,
                     cache.to(q.goals[agent]));
  stats.low_level_expansions += r.expansions;
  ++stats.low_level_calls;
  if (r.path) r.path->agent = agent;
  return std::move(r.path);
}

}  // namespace detail

// Replans `changed` and every agent below it, in topological order, each
// against all of its higher-priority agents' current paths. Returns nullopt
// if any of them has no path.
inline std::optional<PTNode> evaluate_node(const WMAPFQuery& q, PTNode node, AgentId changed,
                                           DistanceCache& cache, SolveStats& stats) {
  auto affected = node.priorities.lower_than(changed);
  affected.insert(changed);
  std::vector<AgentId> members(affected.begin(), affected.end());
  for (AgentId a : kahn_order(node.priorities, members)) {
    auto p = detail::replan_agent(q, node.paths, node.priorities, a, cache, stats);
    if (!p) return std::nullopt;
    node.paths[a] = std::move(*p);
  }
  node.cost = total_cost(node.paths);
  return node;
}

inline std::optional<PTNode> evaluate_node(const WMAPFQuery& q, PTNode node, AgentId changed) {
  DistanceCache cache(*q.map);
  SolveStats stats;
  return evaluate_node(q, std::move(node), changed, cache, stats);
}

// Plans every agent in topological order of `priorities`; agents with no
// higher-priority agent get their shortest path.
inline std::optional<PTNode> make_root(const WMAPFQuery& q, const PrioritySet& priorities,
                                       DistanceCache& cache, SolveStats& stats) {
  PTNode root;
  root.priorities = priorities;
  root.paths.resize(q.starts.size());
  auto ids = q.agent_ids();
  for (AgentId a : kahn_order(priorities, ids)) {
    auto p = detail::replan_agent(q, root.paths, priorities, a, cache, stats);
    if (!p) return std::nullopt;
    root.paths[a] = std::move(*p);
  }
  root.cost = total_cost(root.paths);
  return root;
}

// Depth-first search over the priority tree rooted at `seed`. Each
// conflicting node branches on its earliest conflict (a, b) into a≺b and
// b≺a; the cheaper child is explored first, ties going to a≺b (a < b).
// With a finite width limit the search aborts as soon as any level would
// hold more generated nodes than the limit.
class PriorityTreeSearch {
 public:
  PriorityTreeSearch(const WMAPFQuery& query, DistanceCache& cache)
      : q_(query), cache_(cache) {}

  SolveResult run(const PrioritySet& seed, const Deadline& deadline, const SearchOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res;
    run_impl(seed.restricted_to(q_.agent_count()), deadline, opt, res);
    res.stats.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    switch (res.termination) {
      case Termination::solved: res.status = SolveStatus::solved; break;
      case Termination::timeout: res.status = SolveStatus::timeout; break;
      case Termination::infeasible_root: res.status = SolveStatus::infeasible_seed; break;
      default: res.status = SolveStatus::failed; break;
    }
    return res;
  }

 private:
  void record(SolveResult& res, const SearchOptions& opt, const PTNode& n,
              std::optional<Precedence> added) {
    if (!opt.record_tree) return;
    res.tree.push_back({n.id, n.parent, n.depth, added, n.cost, false});
  }

  void run_impl(const PrioritySet& seed, const Deadline& deadline, const SearchOptions& opt,
                SolveResult& res) {
    auto& stats = res.stats;
    WidthTracker width(opt.width_limit);
    int next_id = 0;

    auto root = make_root(q_, seed, cache_, stats);
    if (!root) {
      res.termination = Termination::infeasible_root;
      return;
    }
    root->id = next_id++;
    width.add(0, 1);
    stats.pt_nodes_generated = 1;
    stats.pt_max_width = width.width();
    record(res, opt, *root, std::nullopt);

    std::vector<PTNode> stack;
    stack.push_back(std::move(*root));
    while (!stack.empty()) {
      if (deadline.expired()) {
        res.termination = Termination::timeout;
        return;
      }
      PTNode node = std::move(stack.back());
      stack.pop_back();
      ++stats.pt_nodes_expanded;
      if (opt.record_tree) res.tree[node.id].expanded = true;

      auto conflict = first_conflict(node.paths, q_.window);
      if (!conflict) {
        stats.pt_depth_of_solution = node.depth;
        res.termination = Termination::solved;
        res.paths = std::move(node.paths);
        res.seed = std::move(node.priorities);
        res.solution_node = node.id;
        return;
      }

      const AgentId a = conflict->a;
      const AgentId b = conflict->b;
      // Colliding agents are always mutually unordered: a lower agent is
      // replanned whenever any of its higher agents changes.
      assert(!node.priorities.precedes(a, b) && !node.priorities.precedes(b, a));
      if (node.priorities.precedes(a, b) || node.priorities.precedes(b, a)) continue;

      std::vector<std::pair<PTNode, Precedence>> children;
      for (Precedence p : {Precedence{a, b}, Precedence{b, a}}) {
        PTNode child;
        child.priorities = node.priorities;
        child.priorities.add(p);
        child.paths = node.paths;
        child.depth = node.depth + 1;
        child.parent = node.id;
        auto evaluated = evaluate_node(q_, std::move(child), p.lower, cache_, stats);
        if (evaluated) children.emplace_back(std::move(*evaluated), p);
      }
      if (children.empty()) continue;
      if (!width.add(node.depth + 1, children.size())) {
        res.termination = Termination::width_exceeded;
        return;
      }
      stats.pt_nodes_generated += children.size();
      stats.pt_max_width = width.width();
      stats.pt_tree_depth = std::max(stats.pt_tree_depth, node.depth + 1);
      for (auto& [child, p] : children) {
        child.id = next_id++;
        record(res, opt, child, p);
      }
      // The first entry is explored first, so it is pushed last.
      if (children.size() == 2 && children[1].first.cost < children[0].first.cost)
        std::swap(children[0], children[1]);
      for (auto it = children.rbegin(); it != children.rend(); ++it)
        stack.push_back(std::move(it->first));
    }
    res.termination = Termination::exhausted;
  }

  const WMAPFQuery& q_;
  DistanceCache& cache_;
};

// Vanilla PBS when `root_seed` is empty; otherwise PBS started from the seed.
inline SolveResult pbs_solve(const WMAPFQuery& query, const PrioritySet& root_seed,
                             const Deadline& deadline, const SearchOptions& opt,
                             DistanceCache& cache) {
  query.validate();
  return PriorityTreeSearch(query, cache).run(root_seed, deadline, opt);
}

inline SolveResult pbs_solve(const WMAPFQuery& query, const PrioritySet& root_seed,
                             const Deadline& deadline, const SearchOptions& opt = {}) {
  DistanceCache cache(*query.map);
  return pbs_solve(query, root_seed, deadline, opt, cache);
}

inline SolveResult pbs_solve(const WMAPFQuery& query, const Deadline& deadline = Deadline::never()) {
  return pbs_solve(query, PrioritySet{}, deadline);
}

// The priority set of the node where the solution was found.
inline PrioritySet extract_seed(const SolveResult& result) {
  if (!result.solved()) throw NotSolved("cannot extract a seed from an unsolved result");
  return result.seed;
}

// Ids of the nodes on the root-to-solution branch, root first.
inline std::vector<int> solution_branch(const SolveResult& result) {
  std::vector<int> branch;
  if (!result.solution_node || result.tree.empty()) return branch;
  for (std::optional<int> id = result.solution_node; id; id = result.tree[*id].parent)
    branch.push_back(*id);
  std::reverse(branch.begin(), branch.end());
  return branch;
}

}  // namespace lmapf
