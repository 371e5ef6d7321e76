#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lmapf/grid.hpp"

namespace lmapf {

using AgentId = int;
using Timestep = int;

// One cell per timestep, cells[0] is the start. Past the last cell the agent
// is treated as parked there.
struct Path {
  AgentId agent = 0;
  std::vector<Cell> cells;

  int cost() const { return static_cast<int>(cells.size()) - 1; }
  Cell at(Timestep t) const {
    return t < static_cast<Timestep>(cells.size()) ? cells[t] : cells.back();
  }
  friend bool operator==(const Path&, const Path&) = default;
};

// Cells and moves occupied by higher-priority paths over timesteps 0..horizon.
class ReservationTable {
 public:
  explicit ReservationTable(Timestep horizon) : horizon_(horizon) {}

  Timestep horizon() const { return horizon_; }
  bool empty() const { return vertices_.empty(); }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  void reserve(const Path& path) {
    if (path.cells.empty()) return;
    for (Timestep t = 0; t <= horizon_; ++t) {
      Cell c = path.at(t);
      vertices_.insert(vertex_key(c, t));
      auto [it, inserted] = last_.try_emplace(cell_key(c), t);
      if (!inserted) it->second = std::max(it->second, t);
      if (t < horizon_) {
        Cell next = path.at(t + 1);
        if (next != c) edges_.insert(edge_key(c, next, t));
      }
    }
  }

  bool vertex_reserved(Cell c, Timestep t) const {
    return vertices_.contains(vertex_key(c, t));
  }

  // True if moving from -> to during t -> t+1 swaps with a reserved move.
  bool move_reserved(Cell from, Cell to, Timestep t) const {
    if (from == to) return false;
    return edges_.contains(edge_key(to, from, t));
  }

  // True if nobody is reserved on `c` at any timestep in [t, horizon].
  bool can_park(Cell c, Timestep t) const {
    auto it = last_.find(cell_key(c));
    return it == last_.end() || it->second < t;
  }

 private:
  static std::uint64_t cell_key(Cell c) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.row)) << 16) |
           static_cast<std::uint32_t>(c.col);
  }
  static std::uint64_t vertex_key(Cell c, Timestep t) {
    return (cell_key(c) << 32) | static_cast<std::uint32_t>(t);
  }
  static std::uint64_t edge_key(Cell from, Cell to, Timestep t) {
    std::uint64_t dir = to.row < from.row ? 0 : to.col > from.col ? 1 : to.row > from.row ? 2 : 3;
    return (cell_key(from) << 32) | (dir << 30) | static_cast<std::uint32_t>(t);
  }

  Timestep horizon_;
  std::unordered_set<std::uint64_t> vertices_;
  std::unordered_set<std::uint64_t> edges_;
  std::unordered_map<std::uint64_t, Timestep> last_;
};

inline ReservationTable build_reservations(std::span<const Path> paths, Timestep w) {
  ReservationTable table(w);
  for (const auto& p : paths) table.reserve(p);
  return table;
}

// Per-goal static distance tables, computed on first use. Not thread-safe;
// each solver owns one.
class DistanceCache {
 public:
  explicit DistanceCache(const GridMap& map) : map_(&map) {}

  const std::vector<int>& to(Cell goal) {
    auto [it, inserted] = tables_.try_emplace(map_->index(goal));
    if (inserted) it->second = distances_to(*map_, goal);
    return it->second;
  }
  const GridMap& map() const { return *map_; }

 private:
  const GridMap* map_;
  std::unordered_map<int, std::vector<int>> tables_;
};

struct PlanResult {
  std::optional<Path> path;
  std::size_t expansions = 0;
};

// Space-time A* over (cell, t) for t <= w. A state terminates the search when
// it sits on the goal and can stay there through the horizon, or when t == w,
// after which the path follows static distances to the goal. Ties on f prefer
// larger g, then generation order (up, right, down, left, wait).
inline PlanResult plan_path(const GridMap& map, Cell start, Cell goal,
                            const ReservationTable& reservations, Timestep w,
                            std::span<const int> dist) {
  if (!map.free(start) || !map.free(goal)) throw InvalidQuery("start or goal is blocked");
  PlanResult result;
  if (dist[map.index(start)] < 0) return result;

  struct Node {
    Cell cell;
    Timestep t;
    int parent;
  };
  struct Entry {
    int f;
    int g;
    std::uint64_t seq;
    int node;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.f != b.f) return a.f > b.f;
      if (a.g != b.g) return a.g < b.g;
      return a.seq > b.seq;
    }
  };

  const std::size_t layer = map.size();
  std::vector<std::uint8_t> generated(layer * static_cast<std::size_t>(w + 1), 0);
  auto slot = [&](Cell c, Timestep t) { return static_cast<std::size_t>(t) * layer + map.index(c); };

  std::vector<Node> nodes;
  std::priority_queue<Entry, std::vector<Entry>, Worse> open;
  std::uint64_t seq = 0;

  auto push = [&](Cell c, Timestep t, int parent) {
    generated[slot(c, t)] = 1;
    nodes.push_back({c, t, parent});
    open.push({t + dist[map.index(c)], t, seq++, static_cast<int>(nodes.size()) - 1});
  };

  if (reservations.vertex_reserved(start, 0)) return result;
  push(start, 0, -1);

  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    const Node cur = nodes[top.node];
    ++result.expansions;

    const bool at_goal = cur.cell == goal && reservations.can_park(goal, cur.t);
    if (at_goal || cur.t == w) {
      std::vector<Cell> cells;
      for (int i = top.node; i >= 0; i = nodes[i].parent) cells.push_back(nodes[i].cell);
      std::reverse(cells.begin(), cells.end());
      Cell c = cur.cell;
      while (c != goal) {
        for (Cell n : map.neighbors(c)) {
          if (dist[map.index(n)] == dist[map.index(c)] - 1) {
            c = n;
            break;
          }
        }
        cells.push_back(c);
      }
      result.path = Path{0, std::move(cells)};
      return result;
    }

    const Timestep nt = cur.t + 1;
    auto try_move = [&](Cell next) {
      if (generated[slot(next, nt)]) return;
      if (reservations.vertex_reserved(next, nt)) return;
      if (reservations.move_reserved(cur.cell, next, cur.t)) return;
      push(next, nt, top.node);
    };
    for (Cell n : map.neighbors(cur.cell)) try_move(n);
    try_move(cur.cell);
  }
  return result;
}

inline PlanResult plan_path(const GridMap& map, Cell start, Cell goal,
                            const ReservationTable& reservations, Timestep w) {
  auto dist = distances_to(map, goal);
  return plan_path(map, start, goal, reservations, w, dist);
}

}  // namespace lmapf
