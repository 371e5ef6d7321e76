#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <compare>
#include <cstdint>
#include <deque>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lmapf/error.hpp"

namespace lmapf {

// 0-based grid coordinates.
struct Cell {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Cell& c) {
  return os << '(' << c.row << ',' << c.col << ')';
}

// Up to four neighbors, in the order up, right, down, left.
class Neighbors {
 public:
  void push(Cell c) { cells_[size_++] = c; }
  const Cell* begin() const { return cells_.data(); }
  const Cell* end() const { return cells_.data() + size_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const Cell& operator[](std::size_t i) const { return cells_[i]; }
  std::vector<Cell> to_vector() const { return {begin(), end()}; }

 private:
  std::array<Cell, 4> cells_{};
  std::size_t size_ = 0;
};

inline constexpr std::array<Cell, 4> kMoves{{{-1, 0}, {0, 1}, {1, 0}, {0, -1}}};

enum class LayoutKind { warehouse, sorting };

// Immutable 4-connected grid with two endpoint classes:
// endpoints_a are workstations, endpoints_b are task locations.
class GridMap {
 public:
  GridMap() = default;

  // Validates every invariant; throws ParseError, DisconnectedMap or
  // EmptyEndpointSet.
  static GridMap create(int rows, int cols, std::vector<std::uint8_t> blocked,
                        std::vector<Cell> endpoints_a,
                        std::vector<Cell> endpoints_b) {
    GridMap m;
    if (rows <= 0 || cols <= 0) throw ParseError("grid dimensions must be positive");
    if (blocked.size() != static_cast<std::size_t>(rows) * cols)
      throw ParseError("blocked mask does not match grid dimensions");
    m.rows_ = rows;
    m.cols_ = cols;
    m.blocked_ = std::move(blocked);
    std::sort(endpoints_a.begin(), endpoints_a.end());
    std::sort(endpoints_b.begin(), endpoints_b.end());
    endpoints_a.erase(std::unique(endpoints_a.begin(), endpoints_a.end()), endpoints_a.end());
    endpoints_b.erase(std::unique(endpoints_b.begin(), endpoints_b.end()), endpoints_b.end());
    m.endpoints_a_ = std::move(endpoints_a);
    m.endpoints_b_ = std::move(endpoints_b);
    m.kind_.assign(m.blocked_.size(), 0);
    for (const auto& c : m.endpoints_a_) m.mark_endpoint(c, 1);
    for (const auto& c : m.endpoints_b_) m.mark_endpoint(c, 2);
    if (m.endpoints_a_.empty() && m.endpoints_b_.empty())
      throw EmptyEndpointSet("map has no endpoint cells");
    m.check_connected();
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return blocked_.size(); }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
  }
  int index(Cell c) const { return c.row * cols_ + c.col; }
  Cell cell(int index) const { return {index / cols_, index % cols_}; }

  bool blocked(Cell c) const { return blocked_[index(c)] != 0; }
  bool free(Cell c) const { return in_bounds(c) && !blocked(c); }

  const std::vector<Cell>& endpoints_a() const { return endpoints_a_; }
  const std::vector<Cell>& endpoints_b() const { return endpoints_b_; }
  bool is_endpoint_a(Cell c) const { return kind_[index(c)] == 1; }
  bool is_endpoint_b(Cell c) const { return kind_[index(c)] == 2; }

  std::size_t free_count() const {
    return static_cast<std::size_t>(std::count(blocked_.begin(), blocked_.end(), 0));
  }
  double obstacle_fraction() const {
    return 1.0 - static_cast<double>(free_count()) / static_cast<double>(size());
  }

  std::vector<Cell> free_cells() const {
    std::vector<Cell> out;
    out.reserve(free_count());
    for (int i = 0; i < static_cast<int>(size()); ++i)
      if (!blocked_[i]) out.push_back(cell(i));
    return out;
  }

  Neighbors neighbors(Cell c) const {
    Neighbors out;
    for (const auto& d : kMoves) {
      Cell n{c.row + d.row, c.col + d.col};
      if (free(n)) out.push(n);
    }
    return out;
  }

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  void mark_endpoint(Cell c, std::uint8_t k) {
    if (!in_bounds(c)) throw ParseError("endpoint outside the grid");
    if (blocked(c)) throw ParseError("endpoint on a blocked cell");
    if (kind_[index(c)] != 0) throw ParseError("endpoint belongs to both endpoint sets");
    kind_[index(c)] = k;
  }

  void check_connected() const {
    auto cells = free_cells();
    if (cells.empty()) throw DisconnectedMap("map has no free cells");
    std::vector<std::uint8_t> seen(size(), 0);
    std::deque<Cell> open{cells.front()};
    seen[index(cells.front())] = 1;
    std::size_t reached = 1;
    while (!open.empty()) {
      Cell c = open.front();
      open.pop_front();
      for (Cell n : neighbors(c)) {
        if (seen[index(n)]) continue;
        seen[index(n)] = 1;
        ++reached;
        open.push_back(n);
      }
    }
    if (reached != cells.size()) throw DisconnectedMap("free cells are not connected");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> blocked_;
  std::vector<std::uint8_t> kind_;  // 0 plain, 1 endpoint a, 2 endpoint b
  std::vector<Cell> endpoints_a_;
  std::vector<Cell> endpoints_b_;
};

// Static shortest-path distance from every cell to `goal` (-1 if blocked).
inline std::vector<int> distances_to(const GridMap& map, Cell goal) {
  std::vector<int> dist(map.size(), -1);
  std::deque<Cell> open{goal};
  dist[map.index(goal)] = 0;
  while (!open.empty()) {
    Cell c = open.front();
    open.pop_front();
    for (Cell n : map.neighbors(c)) {
      if (dist[map.index(n)] >= 0) continue;
      dist[map.index(n)] = dist[map.index(c)] + 1;
      open.push_back(n);
    }
  }
  return dist;
}

// Map text: "<rows> <cols>" then one line per row using
// '.' free, '@' blocked, 'a' workstation, 'b' task location.
inline GridMap load_map(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty map text");

  int rows = 0, cols = 0;
  {
    auto header = lines.front();
    auto sp = header.find(' ');
    if (sp == std::string_view::npos) throw ParseError("header must be \"<rows> <cols>\"");
    auto r = header.substr(0, sp);
    auto c = header.substr(sp + 1);
    auto ok = [](std::string_view s, int& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      return ec == std::errc{} && p == s.data() + s.size();
    };
    if (!ok(r, rows) || !ok(c, cols) || rows <= 0 || cols <= 0)
      throw ParseError("header must be \"<rows> <cols>\" with positive integers");
  }
  if (static_cast<int>(lines.size()) - 1 != rows)
    throw ParseError("expected " + std::to_string(rows) + " rows, found " +
                     std::to_string(lines.size() - 1));

  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(rows) * cols, 0);
  std::vector<Cell> a, b;
  for (int r = 0; r < rows; ++r) {
    auto line = lines[r + 1];
    if (static_cast<int>(line.size()) != cols)
      throw ParseError("row " + std::to_string(r) + " has " + std::to_string(line.size()) +
                       " characters, expected " + std::to_string(cols));
    for (int c = 0; c < cols; ++c) {
      switch (line[c]) {
        case '.': break;
        case '@': blocked[static_cast<std::size_t>(r) * cols + c] = 1; break;
        case 'a': a.push_back({r, c}); break;
        case 'b': b.push_back({r, c}); break;
        default:
          throw ParseError("unexpected character '" + std::string(1, line[c]) + "' at row " +
                           std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
  return GridMap::create(rows, cols, std::move(blocked), std::move(a), std::move(b));
}

inline std::string serialize(const GridMap& map) {
  std::string out = std::to_string(map.rows()) + ' ' + std::to_string(map.cols()) + '\n';
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      Cell cell{r, c};
      if (map.blocked(cell)) out += '@';
      else if (map.is_endpoint_a(cell)) out += 'a';
      else if (map.is_endpoint_b(cell)) out += 'b';
      else out += '.';
    }
    out += '\n';
  }
  return out;
}

namespace detail {

// Horizontal pod strips of `block_len` cells, `blocks` per strip separated
// by one free column, one strip every third row. Task locations sit
// directly above and below pods; workstations on the left/right boundary.
inline GridMap make_warehouse(int rows, int cols, int block_len, int blocks, int strips,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int span = blocks * block_len + (blocks - 1);
  const int col0 = (cols - span) / 2;
  const int strip_span = 3 * (strips - 1) + 1;
  const int row0 = (rows - strip_span) / 2;
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(rows) * cols, 0);
  auto at = [&](int r, int c) -> std::uint8_t& { return blocked[static_cast<std::size_t>(r) * cols + c]; };
  for (int s = 0; s < strips; ++s) {
    int r = row0 + 3 * s;
    for (int b = 0; b < blocks; ++b)
      for (int i = 0; i < block_len; ++i) at(r, col0 + b * (block_len + 1) + i) = 1;
  }
  std::vector<Cell> tasks;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (at(r, c)) continue;
      bool next_to_pod = (r > 0 && at(r - 1, c)) || (r + 1 < rows && at(r + 1, c));
      if (next_to_pod) tasks.push_back({r, c});
    }
  const int offset = static_cast<int>(rng() % 3);
  std::vector<Cell> stations;
  for (int r = 1; r + 1 < rows; ++r) {
    if ((r + offset) % 3 != 0) continue;
    stations.push_back({r, 0});
    stations.push_back({r, cols - 1});
  }
  return GridMap::create(rows, cols, std::move(blocked), std::move(stations), std::move(tasks));
}

// Single-cell chutes on a lattice with pitch 3 inside a margin of 3.
// Drop-off locations are the free 4-neighbors of chutes; workstations on
// all four boundary sides.
inline GridMap make_sorting_center(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr int kMargin = 3;
  constexpr int kPitch = 3;
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(rows) * cols, 0);
  auto at = [&](int r, int c) -> std::uint8_t& { return blocked[static_cast<std::size_t>(r) * cols + c]; };
  for (int r = kMargin; r < rows - kMargin; r += kPitch)
    for (int c = kMargin; c < cols - kMargin; c += kPitch) at(r, c) = 1;
  std::vector<Cell> drops;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (at(r, c)) continue;
      for (const auto& d : kMoves) {
        int nr = r + d.row, nc = c + d.col;
        if (nr >= 0 && nr < rows && nc >= 0 && nc < cols && at(nr, nc)) {
          drops.push_back({r, c});
          break;
        }
      }
    }
  const int offset = static_cast<int>(rng() % 4);
  std::vector<Cell> stations;
  for (int c = 1; c + 1 < cols; ++c) {
    if ((c + offset) % 4 != 0) continue;
    stations.push_back({0, c});
    stations.push_back({rows - 1, c});
  }
  for (int r = 1; r + 1 < rows; ++r) {
    if ((r + offset) % 4 != 0) continue;
    stations.push_back({r, 0});
    stations.push_back({r, cols - 1});
  }
  return GridMap::create(rows, cols, std::move(blocked), std::move(stations), std::move(drops));
}

}  // namespace detail

// Full-size benchmark layouts: warehouse 33x46 (240 pods), sorting 37x77.
inline GridMap generate_layout(LayoutKind kind, std::uint64_t seed) {
  if (kind == LayoutKind::warehouse) return detail::make_warehouse(33, 46, 10, 3, 8, seed);
  return detail::make_sorting_center(37, 77, seed);
}

// Smaller warehouse with the same pod statistics; 15x21 is the desk-scale default.
inline GridMap generate_desk_warehouse(std::uint64_t seed) {
  return detail::make_warehouse(15, 21, 4, 3, 4, seed);
}

inline LayoutKind parse_layout_kind(std::string_view s) {
  if (s == "warehouse") return LayoutKind::warehouse;
  if (s == "sorting") return LayoutKind::sorting;
  throw std::invalid_argument("unknown layout '" + std::string(s) + "'");
}

}  // namespace lmapf
