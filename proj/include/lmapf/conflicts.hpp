#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lmapf/spacetime_search.hpp"

namespace lmapf {

enum class ConflictKind { vertex, edge };

// For a vertex conflict both agents are on `first` at t. For an edge
// conflict agent a moves first -> second while b moves second -> first,
// between t and t+1.
struct Conflict {
  ConflictKind kind = ConflictKind::vertex;
  AgentId a = 0;
  AgentId b = 0;
  Timestep t = 0;
  Cell first;
  Cell second;
  friend bool operator==(const Conflict&, const Conflict&) = default;
};

inline bool conflict_before(const Conflict& x, const Conflict& y) {
  if (x.t != y.t) return x.t < y.t;
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return x.kind < y.kind;
}

namespace detail {

// Conflicts at timestep t: vertex conflicts at t, and (if t < w) edge
// conflicts on the move t -> t+1.
inline void conflicts_at(std::span<const Path> paths, Timestep t, Timestep w,
                         std::vector<Conflict>& out) {
  const int k = static_cast<int>(paths.size());
  std::map<Cell, std::vector<AgentId>> occupied;
  for (AgentId i = 0; i < k; ++i) occupied[paths[i].at(t)].push_back(i);
  for (const auto& [cell, who] : occupied)
    for (std::size_t x = 0; x < who.size(); ++x)
      for (std::size_t y = x + 1; y < who.size(); ++y)
        out.push_back({ConflictKind::vertex, who[x], who[y], t, cell, cell});
  if (t >= w) return;
  // Several agents may share a move; each pairs with every reverse mover.
  std::map<std::pair<Cell, Cell>, std::vector<AgentId>> moves;
  for (AgentId i = 0; i < k; ++i) {
    Cell from = paths[i].at(t), to = paths[i].at(t + 1);
    if (from != to) moves[{from, to}].push_back(i);
  }
  for (const auto& [mv, movers] : moves) {
    auto it = moves.find({mv.second, mv.first});
    if (it == moves.end()) continue;
    for (AgentId i : movers)
      for (AgentId j : it->second)
        if (i < j) out.push_back({ConflictKind::edge, i, j, t, mv.first, mv.second});
  }
}

}  // namespace detail

// All vertex conflicts at t <= w and edge conflicts whose move ends by w,
// with parked extension, sorted by (t, agent pair). Agent ids are the
// paths' positions in `paths`.
inline std::vector<Conflict> detect_conflicts(std::span<const Path> paths, Timestep w) {
  std::vector<Conflict> out;
  for (Timestep t = 0; t <= w; ++t) detail::conflicts_at(paths, t, w, out);
  std::stable_sort(out.begin(), out.end(), conflict_before);
  return out;
}

inline std::optional<Conflict> first_conflict(std::span<const Path> paths, Timestep w) {
  std::vector<Conflict> found;
  for (Timestep t = 0; t <= w; ++t) {
    detail::conflicts_at(paths, t, w, found);
    if (!found.empty()) return *std::min_element(found.begin(), found.end(), conflict_before);
  }
  return std::nullopt;
}

}  // namespace lmapf
