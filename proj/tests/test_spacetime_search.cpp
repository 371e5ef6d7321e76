#include <gtest/gtest.h>

#include <limits>
#include <random>
#include <set>

#include "lmapf/grid.hpp"
#include "lmapf/spacetime_search.hpp"

using namespace lmapf;

namespace {

const char* kToy = "3 5\n....b\n.b...\na.b.a\n";

// Plain reachability-layer search over (cell, t) against the raw paths; no
// priority queue, no reservation table.
struct Oracle {
  const GridMap& map;
  const std::vector<Path>& others;
  Timestep w;

  bool occupied(Cell c, Timestep t) const {
    for (const auto& p : others)
      if (p.at(t) == c) return true;
    return false;
  }
  bool swaps(Cell from, Cell to, Timestep t) const {
    if (from == to) return false;
    for (const auto& p : others)
      if (p.at(t) == to && p.at(t + 1) == from) return true;
    return false;
  }
  bool parkable(Cell c, Timestep t) const {
    for (Timestep u = t; u <= w; ++u)
      if (occupied(c, u)) return false;
    return true;
  }

  // Minimum cost, or -1.
  int cost(Cell start, Cell goal) const {
    auto dist = distances_to(map, goal);
    if (dist[map.index(start)] < 0 || occupied(start, 0)) return -1;
    std::set<Cell> layer{start};
    for (Timestep t = 0;; ++t) {
      if (layer.count(goal) && parkable(goal, t)) return t;
      if (t == w) {
        int best = std::numeric_limits<int>::max();
        for (Cell c : layer) best = std::min(best, w + dist[map.index(c)]);
        return best;
      }
      std::set<Cell> next;
      for (Cell c : layer) {
        std::vector<Cell> options{c};
        for (const auto& d : kMoves) {
          Cell n{c.row + d.row, c.col + d.col};
          if (map.free(n)) options.push_back(n);
        }
        for (Cell n : options)
          if (!occupied(n, t + 1) && !swaps(c, n, t)) next.insert(n);
      }
      if (next.empty()) return -1;
      layer = std::move(next);
    }
  }

  bool valid(const Path& p, Cell start, Cell goal) const {
    if (p.cells.empty() || p.cells.front() != start || p.cells.back() != goal) return false;
    for (std::size_t i = 1; i < p.cells.size(); ++i) {
      Cell a = p.cells[i - 1], b = p.cells[i];
      if (std::abs(a.row - b.row) + std::abs(a.col - b.col) > 1 || !map.free(b)) return false;
    }
    for (Timestep t = 0; t <= w; ++t) {
      if (occupied(p.at(t), t)) return false;
      if (t < w && swaps(p.at(t), p.at(t + 1), t)) return false;
    }
    return true;
  }
};

Path straight(AgentId a, std::vector<Cell> cells) { return Path{a, std::move(cells)}; }

Cell random_free(const GridMap& m, std::mt19937_64& rng) {
  auto cells = m.free_cells();
  return cells[rng() % cells.size()];
}

GridMap random_map(std::mt19937_64& rng) {
  std::bernoulli_distribution wall(0.2);
  for (;;) {
    std::string text = "5 5\n";
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) text += wall(rng) ? '@' : (r == 0 && c == 0 ? 'a' : '.');
      text += '\n';
    }
    text[4] = 'a';
    try {
      return load_map(text);
    } catch (const std::runtime_error&) {
    }
  }
}

}  // namespace

TEST(Path, ParkedExtension) {
  Path p = straight(0, {{0, 0}, {0, 1}});
  EXPECT_EQ(p.cost(), 1);
  EXPECT_EQ(p.at(0), (Cell{0, 0}));
  EXPECT_EQ(p.at(1), (Cell{0, 1}));
  EXPECT_EQ(p.at(7), (Cell{0, 1}));
}

TEST(BuildReservations, ToyPathWithWindowFour) {
  // (3,1),(3,2),(2,2),(2,3),(1,3),(1,4),(1,5) in one-based coordinates
  Path a1 = straight(0, {{2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}, {0, 3}, {0, 4}});
  std::vector<Path> paths{a1};
  auto table = build_reservations(paths, 4);
  EXPECT_TRUE(table.vertex_reserved({1, 2}, 3));
  EXPECT_TRUE(table.vertex_reserved({0, 2}, 4));
  EXPECT_FALSE(table.vertex_reserved({0, 3}, 5));
  EXPECT_EQ(table.vertex_count(), 5u);
  EXPECT_EQ(table.edge_count(), 4u);
  EXPECT_TRUE(table.move_reserved({1, 1}, {2, 1}, 1));
  EXPECT_FALSE(table.move_reserved({2, 1}, {1, 1}, 1));
}

TEST(BuildReservations, EmptyListGivesEmptyTable) {
  auto table = build_reservations(std::vector<Path>{}, 4);
  EXPECT_TRUE(table.empty());
  EXPECT_EQ(table.edge_count(), 0u);
}

TEST(BuildReservations, StationaryAgentIsReservedThroughHorizon) {
  std::vector<Path> paths{straight(0, {{1, 1}})};
  auto table = build_reservations(paths, 3);
  EXPECT_EQ(table.vertex_count(), 4u);
  for (Timestep t = 0; t <= 3; ++t) EXPECT_TRUE(table.vertex_reserved({1, 1}, t));
  EXPECT_FALSE(table.can_park({1, 1}, 3));
  EXPECT_TRUE(table.can_park({1, 2}, 0));
}

TEST(PlanPath, ShortestOnEmptyToyGrid) {
  GridMap m = load_map(kToy);
  auto r = plan_path(m, {2, 0}, {0, 4}, ReservationTable(4), 4);
  ASSERT_TRUE(r.path);
  EXPECT_EQ(r.path->cost(), 6);
  EXPECT_EQ(r.path->cells.front(), (Cell{2, 0}));
  EXPECT_EQ(r.path->cells.back(), (Cell{0, 4}));
}

TEST(PlanPath, StartEqualsGoal) {
  GridMap m = load_map(kToy);
  auto r = plan_path(m, {1, 1}, {1, 1}, ReservationTable(4), 4);
  ASSERT_TRUE(r.path);
  EXPECT_EQ(r.path->cells, (std::vector<Cell>{{1, 1}}));
  EXPECT_EQ(r.path->cost(), 0);
}

TEST(PlanPath, BlockedEndpointsThrow) {
  GridMap m = load_map("2 2\na@\n..\n");
  EXPECT_THROW(plan_path(m, {0, 1}, {0, 0}, ReservationTable(2), 2), InvalidQuery);
  EXPECT_THROW(plan_path(m, {0, 0}, {0, 1}, ReservationTable(2), 2), InvalidQuery);
}

TEST(PlanPath, ThirdToyAgentMatchesOracle) {
  // Agents 0 and 1 on their static shortest paths; agent 2 from (0,4) to (2,2).
  GridMap m = load_map(kToy);
  std::vector<Path> higher;
  for (auto [s, g] : {std::pair<Cell, Cell>{{2, 0}, {0, 4}}, {{2, 4}, {0, 1}}})
    higher.push_back(*plan_path(m, s, g, ReservationTable(4), 4).path);
  Oracle oracle{m, higher, 4};
  auto r = plan_path(m, {0, 4}, {2, 2}, build_reservations(higher, 4), 4);
  ASSERT_TRUE(r.path);
  EXPECT_TRUE(oracle.valid(*r.path, {0, 4}, {2, 2}));
  EXPECT_EQ(r.path->cost(), oracle.cost({0, 4}, {2, 2}));
  // The tie-broken higher paths leave a detour-free route open.
  EXPECT_EQ(r.path->cost(), 4);
}

TEST(PlanPath, NoPathWhenStartReserved) {
  GridMap m = load_map(kToy);
  std::vector<Path> others{straight(1, {{0, 0}})};
  auto r = plan_path(m, {0, 0}, {2, 4}, build_reservations(others, 4), 4);
  EXPECT_FALSE(r.path);
}

TEST(PlanPath, NoPathWhenBoxedIn) {
  GridMap m = load_map("1 2\nab\n");
  // Another agent moves onto the start; staying collides, leaving swaps.
  std::vector<Path> others{straight(1, {{0, 1}, {0, 0}})};
  auto r = plan_path(m, {0, 0}, {0, 1}, build_reservations(others, 2), 2);
  EXPECT_FALSE(r.path);
}

TEST(PlanPath, IgnoresReservationsBeyondWindow) {
  GridMap m = load_map("1 4\na..b\n");
  // Another agent sits on the goal; it is never reached before t = 3 > w.
  std::vector<Path> others{straight(1, {{0, 3}})};
  auto r = plan_path(m, {0, 0}, {0, 3}, build_reservations(others, 2), 2);
  ASSERT_TRUE(r.path);
  EXPECT_EQ(r.path->cost(), 3);
  // With w = 3 the goal is occupied when the agent would arrive.
  auto r3 = plan_path(m, {0, 0}, {0, 3}, build_reservations(others, 3), 3);
  ASSERT_TRUE(r3.path);
  EXPECT_EQ(r3.path->cost(), 4);
  std::vector<Path> late{straight(1, {{0, 1}, {0, 2}, {0, 3}})};
  auto r2 = plan_path(m, {0, 0}, {0, 3}, build_reservations(late, 1), 1);
  ASSERT_TRUE(r2.path);
  EXPECT_EQ(r2.path->cost(), 3);
}

TEST(PlanPath, EmptyReservationCostEqualsBfsDistance) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    GridMap m = random_map(rng);
    Cell s = random_free(m, rng), g = random_free(m, rng);
    auto d = distances_to(m, g);
    for (Timestep w : {1, 3, 8}) {
      auto r = plan_path(m, s, g, ReservationTable(w), w);
      ASSERT_TRUE(r.path);
      EXPECT_EQ(r.path->cost(), d[m.index(s)]);
    }
  }
}

TEST(PlanPath, MatchesTimeExpandedOracleOnRandomInstances) {
  std::mt19937_64 rng(17);
  int solved = 0, unsolved = 0;
  for (int i = 0; i < 400; ++i) {
    GridMap m = random_map(rng);
    const Timestep w = 2 + static_cast<Timestep>(rng() % 5);
    std::vector<Path> others;
    const int n = 1 + static_cast<int>(rng() % 3);
    for (int j = 0; j < n; ++j) {
      // Random walk of random length.
      Path p{j + 1, {random_free(m, rng)}};
      const int len = static_cast<int>(rng() % 7);
      for (int k = 0; k < len; ++k) {
        auto nb = m.neighbors(p.cells.back()).to_vector();
        nb.push_back(p.cells.back());
        p.cells.push_back(nb[rng() % nb.size()]);
      }
      others.push_back(std::move(p));
    }
    Cell s = random_free(m, rng), g = random_free(m, rng);
    Oracle oracle{m, others, w};
    const int expected = oracle.cost(s, g);
    auto r = plan_path(m, s, g, build_reservations(others, w), w);
    if (expected < 0) {
      EXPECT_FALSE(r.path) << "instance " << i;
      ++unsolved;
      continue;
    }
    ASSERT_TRUE(r.path) << "instance " << i;
    EXPECT_EQ(r.path->cost(), expected) << "instance " << i;
    EXPECT_TRUE(oracle.valid(*r.path, s, g)) << "instance " << i;
    ++solved;
  }
  EXPECT_GT(solved, 300);
  EXPECT_GT(unsolved, 0);
}

TEST(PlanPath, MoreReservationsNeverLowerCost) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    GridMap m = random_map(rng);
    const Timestep w = 4;
    Cell s = random_free(m, rng), g = random_free(m, rng);
    std::vector<Path> others;
    int prev = plan_path(m, s, g, ReservationTable(w), w).path->cost();
    for (int j = 0; j < 3; ++j) {
      Cell c = random_free(m, rng);
      if (c == s) continue;
      others.push_back(Path{j + 1, {c}});
      auto r = plan_path(m, s, g, build_reservations(others, w), w);
      if (!r.path) break;
      EXPECT_GE(r.path->cost(), prev);
      prev = r.path->cost();
    }
  }
}

TEST(PlanPath, DeterministicAndCountsExpansions) {
  GridMap m = load_map(kToy);
  auto a = plan_path(m, {2, 0}, {0, 4}, ReservationTable(4), 4);
  auto b = plan_path(m, {2, 0}, {0, 4}, ReservationTable(4), 4);
  EXPECT_EQ(a.path, b.path);
  EXPECT_EQ(a.expansions, b.expansions);
  EXPECT_GT(a.expansions, 0u);
}

TEST(DistanceCache, ReturnsSameTableAsBfs) {
  GridMap m = load_map(kToy);
  DistanceCache cache(m);
  EXPECT_EQ(cache.to({0, 4}), distances_to(m, {0, 4}));
  EXPECT_EQ(&cache.to({0, 4}), &cache.to({0, 4}));
}
