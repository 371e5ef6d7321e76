#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmapf/error.hpp"
#include "lmapf/grid.hpp"
#include "lmapf/pbs.hpp"

namespace lmapf {

// Agent starts/goals for one query, as stored in a JSON file:
//   {"window": 4, "starts": [[2,0],[2,4]], "goals": [[0,4],[0,1]],
//    "priorities": [[1,2]]}
// Cells are [row, col], zero-based. "priorities" lists [higher, lower]
// agent pairs. "window" and "priorities" are optional.
struct Scenario {
  std::vector<Cell> starts;
  std::vector<Cell> goals;
  std::optional<Timestep> window;
  std::optional<PrioritySet> priorities;

  WMAPFQuery query(const GridMap& map, Timestep default_window) const {
    WMAPFQuery q{&map, starts, goals, window.value_or(default_window)};
    q.validate();
    return q;
  }
};

namespace detail {

inline std::vector<Cell> cells_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array())
    throw ParseError(std::string("scenario: missing array '") + key + "'");
  std::vector<Cell> out;
  for (const auto& e : j[key]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ParseError(std::string("scenario: '") + key + "' entries must be [row, col]");
    out.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return out;
}

inline nlohmann::json cells_to_json(const std::vector<Cell>& cells) {
  auto a = nlohmann::json::array();
  for (Cell c : cells) a.push_back({c.row, c.col});
  return a;
}

}  // namespace detail

inline Scenario parse_scenario(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scenario: top level must be an object");
  Scenario s;
  s.starts = detail::cells_from_json(j, "starts");
  s.goals = detail::cells_from_json(j, "goals");
  if (s.starts.size() != s.goals.size())
    throw ParseError("scenario: starts and goals differ in length");
  if (j.contains("window")) {
    if (!j["window"].is_number_integer()) throw ParseError("scenario: window must be an integer");
    s.window = j["window"].get<int>();
  }
  if (j.contains("priorities")) {
    PrioritySet ps;
    for (Cell pair : detail::cells_from_json(j, "priorities"))
      if (!ps.add({pair.row, pair.col}))
        throw ParseError("scenario: priorities contain a cycle or a self pair");
    s.priorities = ps;
  }
  return s;
}

inline std::string to_json(const Scenario& s) {
  nlohmann::json j;
  if (s.window) j["window"] = *s.window;
  j["starts"] = detail::cells_to_json(s.starts);
  j["goals"] = detail::cells_to_json(s.goals);
  if (s.priorities) {
    auto a = nlohmann::json::array();
    for (Precedence p : *s.priorities) a.push_back({p.higher, p.lower});
    j["priorities"] = a;
  }
  return j.dump(2);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline GridMap load_map_file(const std::string& path) {
  try {
    return load_map(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline Scenario load_scenario_file(const std::string& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace lmapf
