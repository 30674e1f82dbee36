#pragma once

// Weighted deterministic transition systems and minimum-weight paths.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/dijkstra_shortest_paths.hpp>
#include <nlohmann/json.hpp>

namespace gr1::motion {

class MotionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using StateId = std::size_t;

struct Transition {
  StateId from = 0;
  StateId to = 0;
  double weight = 1.0;
};

class TransitionSystem {
 public:
  TransitionSystem() = default;

  StateId add_state(const std::string& name, std::set<std::string> labels = {}) {
    if (index_.count(name)) throw MotionError("state '" + name + "' already exists");
    index_[name] = names_.size();
    names_.push_back(name);
    labels_.push_back(labels);
    for (const auto& l : labels) props_.insert(l);
    out_.emplace_back();
    return names_.size() - 1;
  }

  void add_transition(StateId from, StateId to, double weight = 1.0) {
    check_state(from);
    check_state(to);
    if (!(weight > 0.0) || !std::isfinite(weight))
      throw MotionError("transition weights must be positive and finite");
    for (const auto& t : out_[from])
      if (t.to == to) throw MotionError("duplicate transition " + names_[from] + " -> " + names_[to]);
    out_[from].push_back({from, to, weight});
  }
  void add_transition(const std::string& from, const std::string& to, double weight = 1.0) {
    add_transition(id(from), id(to), weight);
  }

  void set_initial(StateId s) {
    check_state(s);
    initial_ = s;
  }
  StateId initial() const { return initial_; }

  std::size_t size() const { return names_.size(); }
  const std::string& name(StateId s) const { return names_.at(s); }
  StateId id(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw MotionError("unknown state '" + name + "'");
    return it->second;
  }
  const std::set<std::string>& label(StateId s) const { return labels_.at(s); }
  const std::set<std::string>& propositions() const { return props_; }
  const std::vector<Transition>& successors(StateId s) const { return out_.at(s); }

  std::optional<double> weight(StateId from, StateId to) const {
    for (const auto& t : out_.at(from))
      if (t.to == to) return t.weight;
    return std::nullopt;
  }

  std::vector<Transition> transitions() const {
    std::vector<Transition> all;
    for (const auto& ts : out_) all.insert(all.end(), ts.begin(), ts.end());
    return all;
  }

 private:
  void check_state(StateId s) const {
    if (s >= names_.size()) throw MotionError("state id " + std::to_string(s) + " out of range");
  }

  std::vector<std::string> names_;
  std::map<std::string, StateId> index_;
  std::vector<std::set<std::string>> labels_;
  std::set<std::string> props_;
  std::vector<std::vector<Transition>> out_;
  StateId initial_ = 0;
};

// Sum of the transition weights along xs; 0 for a single state.
inline double trajectory_weight(const TransitionSystem& ts, const std::vector<StateId>& xs) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    auto w = ts.weight(xs[k], xs[k + 1]);
    if (!w)
      throw MotionError("no transition " + ts.name(xs[k]) + " -> " + ts.name(xs[k + 1]) + " at index " +
                        std::to_string(k));
    total += *w;
  }
  return total;
}

// o_k = h(x_k)
inline std::vector<std::set<std::string>> output_trajectory(const TransitionSystem& ts,
                                                            const std::vector<StateId>& xs) {
  std::vector<std::set<std::string>> out;
  out.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k + 1 < xs.size() && !ts.weight(xs[k], xs[k + 1]))
      throw MotionError("state sequence is not a trajectory at index " + std::to_string(k));
    out.push_back(ts.label(xs[k]));
  }
  return out;
}

struct WeightedPath {
  std::vector<StateId> states;
  double weight = 0.0;
};

namespace detail {

inline bool weight_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Dijkstra over reversed edges: minimum weight from every state to `target`.
inline std::vector<double> distances_to(const TransitionSystem& ts, StateId target) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS, boost::no_property,
                                      boost::property<boost::edge_weight_t, double>>;
  Graph rev(ts.size());
  for (const auto& t : ts.transitions()) boost::add_edge(t.to, t.from, t.weight, rev);
  std::vector<double> dist(ts.size());
  boost::dijkstra_shortest_paths(
      rev, target,
      boost::distance_map(boost::make_iterator_property_map(dist.begin(), boost::get(boost::vertex_index, rev)))
          .distance_inf(std::numeric_limits<double>::infinity()));
  return dist;
}

}  // namespace detail

// Minimum-weight path a ->* b. Among equal-weight paths the lexicographically
// smallest state-id sequence wins.
inline WeightedPath min_weight_path(const TransitionSystem& ts, StateId a, StateId b) {
  if (a >= ts.size() || b >= ts.size()) throw MotionError("state id out of range");
  const auto dist = detail::distances_to(ts, b);
  if (std::isinf(dist[a])) throw MotionError("'" + ts.name(b) + "' is unreachable from '" + ts.name(a) + "'");
  WeightedPath p{{a}, dist[a]};
  StateId u = a;
  while (u != b) {
    std::optional<StateId> best;
    for (const auto& t : ts.successors(u)) {
      if (t.to == u || std::isinf(dist[t.to])) continue;
      if (!detail::weight_equal(t.weight + dist[t.to], dist[u])) continue;
      if (!best || t.to < *best) best = t.to;
    }
    if (!best) throw MotionError("internal: shortest-path reconstruction failed");
    u = *best;
    p.states.push_back(u);
  }
  return p;
}

inline WeightedPath min_weight_path(const TransitionSystem& ts, const std::string& a, const std::string& b) {
  return min_weight_path(ts, ts.id(a), ts.id(b));
}

inline std::string to_dot(const TransitionSystem& ts, const std::string& name = "ts") {
  std::string out = "digraph " + name + " {\n  rankdir=LR;\n";
  for (StateId s = 0; s < ts.size(); ++s) {
    std::string lbl = ts.name(s);
    for (const auto& l : ts.label(s)) lbl += "\\n" + l;
    out += "  \"" + ts.name(s) + "\" [label=\"" + lbl + "\"" + (s == ts.initial() ? ", peripheries=2" : "") +
           "];\n";
  }
  for (const auto& t : ts.transitions()) {
    char w[32];
    std::snprintf(w, sizeof w, "%g", t.weight);
    out += "  \"" + ts.name(t.from) + "\" -> \"" + ts.name(t.to) + "\" [label=\"" + w + "\"];\n";
  }
  out += "}\n";
  return out;
}

// {"states":[{"name":..,"labels":[..]}], "initial":..,
//  "transitions":[{"from":..,"to":..,"weight":..}]}
inline TransitionSystem ts_from_json(const nlohmann::json& j) {
  TransitionSystem ts;
  for (const auto& s : j.at("states")) {
    std::set<std::string> labels;
    if (s.contains("labels")) labels = s.at("labels").get<std::set<std::string>>();
    ts.add_state(s.at("name").get<std::string>(), labels);
  }
  if (ts.size() == 0) throw MotionError("transition system needs at least one state");
  for (const auto& t : j.at("transitions"))
    ts.add_transition(t.at("from").get<std::string>(), t.at("to").get<std::string>(), t.value("weight", 1.0));
  if (j.contains("initial")) ts.set_initial(ts.id(j.at("initial").get<std::string>()));
  return ts;
}

inline nlohmann::json to_json(const TransitionSystem& ts) {
  nlohmann::json states = nlohmann::json::array(), trans = nlohmann::json::array();
  for (StateId s = 0; s < ts.size(); ++s) states.push_back({{"name", ts.name(s)}, {"labels", ts.label(s)}});
  for (const auto& t : ts.transitions())
    trans.push_back({{"from", ts.name(t.from)}, {"to", ts.name(t.to)}, {"weight", t.weight}});
  return {{"states", states}, {"initial", ts.name(ts.initial())}, {"transitions", trans}};
}

}  // namespace gr1::motion
