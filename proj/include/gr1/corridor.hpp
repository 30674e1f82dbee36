#pragma once

// One-dimensional ego-frame cell corridor, its transition system TS_C, the
// movement abstraction TS_T over cell pairs, and the distance-to-react metric.

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gr1/transition_system.hpp"

namespace gr1::motion {

struct CellCorridor {
  std::size_t cells = 1;
  std::size_t target = 0;
  // boundary_weights[i] is the cost of moving between c_i and c_{i+1}; empty means unit cells.
  std::vector<double> boundary_weights;
  double stationary_weight = 1.0;

  static CellCorridor unit(std::size_t cells, std::size_t target = 0) {
    CellCorridor c;
    c.cells = cells;
    c.target = target;
    c.boundary_weights.assign(cells > 0 ? cells - 1 : 0, 1.0);
    return c;
  }

  void validate() const {
    if (cells == 0) throw MotionError("corridor needs at least one cell");
    if (target >= cells) throw MotionError("target cell c_" + std::to_string(target) + " is outside the corridor");
    if (boundary_weights.size() != cells - 1)
      throw MotionError("corridor with " + std::to_string(cells) + " cells needs " + std::to_string(cells - 1) +
                        " boundary weights");
    for (double w : boundary_weights)
      if (!(w > 0.0)) throw MotionError("corridor weights must be positive");
    if (!(stationary_weight > 0.0)) throw MotionError("stationary weight must be positive");
  }

  static std::string cell_name(std::size_t i) { return "c" + std::to_string(i); }
};

// TS_C: adjacency moves in both directions plus a stationary self-loop per cell.
inline TransitionSystem cell_transition_system(const CellCorridor& c) {
  c.validate();
  TransitionSystem ts;
  for (std::size_t i = 0; i < c.cells; ++i) {
    std::set<std::string> labels{"at_" + CellCorridor::cell_name(i)};
    if (i == c.target) labels.insert("target");
    ts.add_state(CellCorridor::cell_name(i), labels);
  }
  for (std::size_t i = 0; i < c.cells; ++i) {
    if (i > 0) ts.add_transition(i, i - 1, c.boundary_weights[i - 1]);
    ts.add_transition(i, i, c.stationary_weight);
    if (i + 1 < c.cells) ts.add_transition(i, i + 1, c.boundary_weights[i]);
  }
  ts.set_initial(c.cells - 1);
  return ts;
}

// s = ω(c_d ->* c_target): room left to react when the event is decided at c_d.
inline double performance(const CellCorridor& c, std::size_t detection_cell) {
  if (detection_cell >= c.cells)
    throw MotionError("detection cell c_" + std::to_string(detection_cell) + " is outside the corridor");
  auto ts = cell_transition_system(c);
  return min_weight_path(ts, detection_cell, c.target).weight;
}

struct MovementTS {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (c1, c2) per state of ts
  TransitionSystem ts;

  bool stationary(StateId s) const { return pairs.at(s).first == pairs.at(s).second; }
};

// TS_T: one state per TS_C transition (c1, c2), labelled moving/stationary and
// with the location c2. (c1,c2) -> (c2,c3) whenever c2 -> c3 in TS_C.
inline MovementTS movement_abstraction(const CellCorridor& c) {
  const TransitionSystem tc = cell_transition_system(c);
  MovementTS m;
  std::map<std::pair<StateId, StateId>, StateId> id;
  for (StateId a = 0; a < tc.size(); ++a) {
    for (const auto& t : tc.successors(a)) {
      const bool still = t.from == t.to;
      std::set<std::string> labels{still ? "stationary" : "moving", "at_" + tc.name(t.to)};
      if (t.to == c.target) labels.insert("target");
      id[{t.from, t.to}] = m.ts.add_state(tc.name(t.from) + "_" + tc.name(t.to), labels);
      m.pairs.emplace_back(t.from, t.to);
    }
  }
  for (std::size_t s = 0; s < m.pairs.size(); ++s) {
    const auto [c1, c2] = m.pairs[s];
    (void)c1;
    for (const auto& t : tc.successors(c2)) m.ts.add_transition(s, id.at({c2, t.to}), t.weight);
  }
  m.ts.set_initial(id.at({tc.initial(), tc.initial()}));
  return m;
}

// {"cells": 7, "target": 0, "weights": [..n-1..], "stationary_weight": 1.0}
inline CellCorridor corridor_from_json(const nlohmann::json& j) {
  CellCorridor c;
  c.cells = j.at("cells").get<std::size_t>();
  c.target = j.value("target", std::size_t{0});
  if (j.contains("weights")) c.boundary_weights = j.at("weights").get<std::vector<double>>();
  else c.boundary_weights.assign(c.cells > 0 ? c.cells - 1 : 0, 1.0);
  c.stationary_weight = j.value("stationary_weight", 1.0);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const CellCorridor& c) {
  return {{"cells", c.cells},
          {"target", c.target},
          {"weights", c.boundary_weights},
          {"stationary_weight", c.stationary_weight}};
}

}  // namespace gr1::motion
