#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <span>
#include <vector>

#include "lmapf/error.hpp"
#include "lmapf/spacetime_search.hpp"

namespace lmapf {

// higher ≺ lower: `lower` must plan around `higher`.
struct Precedence {
  AgentId higher = 0;
  AgentId lower = 0;
  friend constexpr auto operator<=>(const Precedence&, const Precedence&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Precedence& p) {
  return os << 'a' << p.higher << "<a" << p.lower;
}

// A set of precedence pairs whose directed graph is kept acyclic.
class PrioritySet {
 public:
  PrioritySet() = default;
  PrioritySet(std::initializer_list<Precedence> pairs) {
    for (const auto& p : pairs)
      if (!add(p)) throw CycleDetected("initial pairs are cyclic");
  }

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  bool contains(Precedence p) const { return pairs_.contains(p); }

  // Adds `p` unless doing so would close a cycle.
  bool add(Precedence p) {
    if (p.higher == p.lower) return false;
    if (pairs_.contains(p)) return true;
    if (precedes(p.lower, p.higher)) return false;
    pairs_.insert(p);
    return true;
  }

  // Transitive: is `a` ordered above `b`?
  bool precedes(AgentId a, AgentId b) const {
    std::vector<AgentId> stack{a};
    std::set<AgentId> seen{a};
    while (!stack.empty()) {
      AgentId x = stack.back();
      stack.pop_back();
      for (auto it = pairs_.lower_bound({x, std::numeric_limits<AgentId>::min()});
           it != pairs_.end() && it->higher == x; ++it) {
        if (it->lower == b) return true;
        if (seen.insert(it->lower).second) stack.push_back(it->lower);
      }
    }
    return false;
  }

  // Agents transitively ordered below `a`.
  std::set<AgentId> lower_than(AgentId a) const {
    std::set<AgentId> out;
    std::vector<AgentId> stack{a};
    while (!stack.empty()) {
      AgentId x = stack.back();
      stack.pop_back();
      for (auto it = pairs_.lower_bound({x, std::numeric_limits<AgentId>::min()});
           it != pairs_.end() && it->higher == x; ++it)
        if (out.insert(it->lower).second) stack.push_back(it->lower);
    }
    return out;
  }

  // Agents transitively ordered above `a`.
  std::set<AgentId> higher_than(AgentId a) const {
    std::map<AgentId, std::vector<AgentId>> up;
    for (const auto& p : pairs_) up[p.lower].push_back(p.higher);
    std::set<AgentId> out;
    std::vector<AgentId> stack{a};
    while (!stack.empty()) {
      AgentId x = stack.back();
      stack.pop_back();
      auto it = up.find(x);
      if (it == up.end()) continue;
      for (AgentId h : it->second)
        if (out.insert(h).second) stack.push_back(h);
    }
    return out;
  }

  std::set<AgentId> agents() const {
    std::set<AgentId> out;
    for (const auto& p : pairs_) {
      out.insert(p.higher);
      out.insert(p.lower);
    }
    return out;
  }

  // Drops every pair touching an agent outside [0, agent_count).
  PrioritySet restricted_to(int agent_count) const {
    PrioritySet out;
    for (const auto& p : pairs_)
      if (p.higher >= 0 && p.higher < agent_count && p.lower >= 0 && p.lower < agent_count)
        out.pairs_.insert(p);
    return out;
  }

  friend bool operator==(const PrioritySet&, const PrioritySet&) = default;

 private:
  std::set<Precedence> pairs_;
};

inline std::ostream& operator<<(std::ostream& os, const PrioritySet& ps) {
  os << '{';
  bool first = true;
  for (const auto& p : ps) {
    if (!first) os << ", ";
    os << p;
    first = false;
  }
  return os << '}';
}

// Kahn's method, smallest available agent id first. Only agents in `agents`
// are ordered; pairs touching other agents are ignored.
inline std::vector<AgentId> kahn_order(const PrioritySet& ps, std::span<const AgentId> agents) {
  std::set<AgentId> members(agents.begin(), agents.end());
  std::map<AgentId, int> indegree;
  std::map<AgentId, std::vector<AgentId>> down;
  for (AgentId a : members) indegree[a] = 0;
  for (const auto& p : ps) {
    if (!members.contains(p.higher) || !members.contains(p.lower)) continue;
    down[p.higher].push_back(p.lower);
    ++indegree[p.lower];
  }
  std::priority_queue<AgentId, std::vector<AgentId>, std::greater<>> ready;
  for (const auto& [a, d] : indegree)
    if (d == 0) ready.push(a);
  std::vector<AgentId> order;
  order.reserve(members.size());
  while (!ready.empty()) {
    AgentId a = ready.top();
    ready.pop();
    order.push_back(a);
    for (AgentId b : down[a])
      if (--indegree[b] == 0) ready.push(b);
  }
  if (order.size() != members.size()) throw CycleDetected("priority set contains a cycle");
  return order;
}

// Orders the agents of `agents` that appear in `ps`, high to low.
inline std::vector<AgentId> topological_order(const PrioritySet& ps,
                                              std::span<const AgentId> agents) {
  auto in_set = ps.agents();
  std::vector<AgentId> members;
  for (AgentId a : agents)
    if (in_set.contains(a)) members.push_back(a);
  return kahn_order(ps, members);
}

}  // namespace lmapf
