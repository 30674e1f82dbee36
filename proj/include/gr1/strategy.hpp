#pragma once

// Enumerated Mealy-machine strategies: extraction from a solved game,
// closed-loop execution, and JSON/DOT export.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "gr1/game.hpp"
#include "gr1/parser.hpp"
#include "gr1/solver.hpp"
#include "gr1/verify.hpp"

namespace gr1 {

class StrategyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StrategyNode {
  std::size_t env = 0;
  std::size_t sys = 0;
  std::uint32_t goal = 0;  // index of the system goal currently pursued
  bool escape = false;     // non-strict only: sys is forcing an env violation
  bool operator==(const StrategyNode&) const = default;
};

// A node stands for the joint valuation last emitted together with the goal
// memory. Reading the next env valuation x' selects the unique successor whose
// env part is x'; its sys part is the output.
class Strategy {
 public:
  Strategy() = default;
  Strategy(GR1Spec spec, bool strict, std::vector<StrategyNode> nodes, std::vector<std::uint32_t> initial,
           std::vector<std::vector<std::uint32_t>> next)
      : spec_(std::make_shared<const GR1Spec>(std::move(spec))),
        env_(spec_->vars_of(Owner::Environment)),
        sys_(spec_->vars_of(Owner::System)),
        strict_(strict),
        nodes_(std::move(nodes)),
        initial_(std::move(initial)),
        next_(std::move(next)) {
    auto by_env = [&](std::uint32_t a, std::uint32_t b) { return nodes_[a].env < nodes_[b].env; };
    auto check = [&](std::vector<std::uint32_t>& v, const std::string& where) {
      for (auto id : v)
        if (id >= nodes_.size()) throw StrategyError(where + " refers to missing node " + std::to_string(id));
      std::sort(v.begin(), v.end(), by_env);
      for (std::size_t k = 1; k < v.size(); ++k)
        if (nodes_[v[k - 1]].env == nodes_[v[k]].env)
          throw StrategyError(where + " has two reactions to the same env input");
    };
    if (next_.size() != nodes_.size()) throw StrategyError("transition table size mismatch");
    check(initial_, "initial table");
    for (std::size_t i = 0; i < next_.size(); ++i) check(next_[i], "node " + std::to_string(i));
  }

  const GR1Spec& spec() const { return *spec_; }
  const VarSpace& env_space() const { return env_; }
  const VarSpace& sys_space() const { return sys_; }
  bool strict() const { return strict_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t num_goals() const { return spec_->sys_progress.size(); }
  const StrategyNode& node(std::uint32_t i) const { return nodes_.at(i); }
  const std::vector<StrategyNode>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& initial_nodes() const { return initial_; }
  const std::vector<std::uint32_t>& successors(std::uint32_t i) const { return next_.at(i); }

  std::optional<std::uint32_t> initial(std::size_t x) const { return find(initial_, x); }
  std::optional<std::uint32_t> step(std::uint32_t from, std::size_t x) const { return find(next_.at(from), x); }

  Valuation env_valuation(std::uint32_t i) const { return env_.to_valuation(nodes_.at(i).env); }
  Valuation output(std::uint32_t i) const { return sys_.to_valuation(nodes_.at(i).sys); }

  bool operator==(const Strategy& o) const {
    return *spec_ == *o.spec_ && strict_ == o.strict_ && nodes_ == o.nodes_ && initial_ == o.initial_ &&
           next_ == o.next_;
  }

 private:
  std::optional<std::uint32_t> find(const std::vector<std::uint32_t>& v, std::size_t x) const {
    auto it = std::lower_bound(v.begin(), v.end(), x,
                               [&](std::uint32_t id, std::size_t key) { return nodes_[id].env < key; });
    if (it == v.end() || nodes_[*it].env != x) return std::nullopt;
    return *it;
  }

  std::shared_ptr<const GR1Spec> spec_ = std::make_shared<const GR1Spec>();
  VarSpace env_, sys_;
  bool strict_ = true;
  std::vector<StrategyNode> nodes_;
  std::vector<std::uint32_t> initial_;
  std::vector<std::vector<std::uint32_t>> next_;
};

namespace detail {

struct Pick {
  StateIdx state;
  std::uint32_t goal;
  bool escape;
};

class Extractor {
 public:
  Extractor(const GameStructure& g, const SynthesisResult& r) : g_(g), r_(r) {}

  // Escape target for env input x2: the escape-region state with the lowest
  // rank, then the smallest y'.
  std::optional<Pick> escape_into(std::size_t x2, std::uint32_t below) const {
    std::optional<Pick> best;
    std::uint32_t best_rank = 0;
    for (std::size_t y = 0; y < g_.sys.size(); ++y) {
      auto t = g_.state_of(x2, y);
      if (t < 0 || !r_.escape.test(static_cast<StateIdx>(t))) continue;
      const std::uint32_t rk = r_.escape_ranks.rank[static_cast<std::size_t>(t)];
      if (below && rk >= below) continue;
      if (!best || rk < best_rank) {
        best = Pick{static_cast<StateIdx>(t), 0, true};
        best_rank = rk;
      }
    }
    return best;
  }

  std::optional<Pick> escape_step(StateIdx s, std::uint32_t m) const {
    const std::size_t x2 = g_.move_env[m];
    const std::uint32_t r = r_.escape_ranks.rank[s];
    if (r > 1)
      if (auto p = escape_into(x2, r)) return p;
    // Stay inside the inner greatest fixpoint of the first env goal that holds s.
    const std::size_t i = r_.escape_ranks.layer_of_x(s, r);
    const Bitset& x = r_.escape_ranks.x_layers[r][i];
    for (std::size_t y = 0; y < g_.sys.size(); ++y) {
      auto t = g_.state_of(x2, y);
      if (t >= 0 && x.test(static_cast<StateIdx>(t))) return Pick{static_cast<StateIdx>(t), 0, true};
    }
    return std::nullopt;
  }

  std::optional<Pick> step(StateIdx s, std::uint32_t j, std::uint32_t m) const {
    const std::uint32_t k = static_cast<std::uint32_t>(g_.sys_goals.size());
    const auto succ_begin = g_.succ.begin() + g_.succ_begin[m];
    const auto succ_end = g_.succ.begin() + g_.succ_begin[m + 1];
    auto min_rank = [&](std::uint32_t goal, std::uint32_t below) -> std::optional<Pick> {
      const auto& rank = r_.ranks[goal].rank;
      std::optional<Pick> best;
      std::uint32_t best_rank = 0;
      for (auto it = succ_begin; it != succ_end; ++it) {
        const std::uint32_t rk = rank[*it];
        if (rk == 0 || !r_.winning.test(*it) || (below && rk >= below)) continue;
        if (!best || rk < best_rank) {
          best = Pick{*it, goal, false};
          best_rank = rk;
        }
      }
      return best;
    };
    if (g_.sys_goals[j].test(s)) {
      const std::uint32_t j2 = (j + 1) % k;
      if (auto p = min_rank(j2, 0)) return p;
    } else {
      const std::uint32_t r = r_.ranks[j].rank[s];
      if (r > 1)
        if (auto p = min_rank(j, r)) return p;
      if (r >= 1) {
        // Staying in the layer is only a win while its env goal is false;
        // otherwise s got its rank from a move that escapes.
        const std::size_t i = r_.ranks[j].layer_of_x(s, r);
        if (i < g_.env_goals.size() && !g_.env_goals[i].test(s)) {
          const Bitset& x = r_.ranks[j].x_layers[r][i];
          for (auto it = succ_begin; it != succ_end; ++it)
            if (x.test(*it)) return Pick{*it, j, false};
        }
      }
    }
    if (!g_.strict) return escape_into(g_.move_env[m], 0);
    return std::nullopt;
  }

  std::optional<Pick> initial(std::size_t k) const {
    const auto& rank = r_.ranks[0].rank;
    std::optional<Pick> best;
    std::uint32_t best_rank = 0;
    for (StateIdx s : g_.initial_choices[k]) {
      if (!r_.winning.test(s)) continue;
      if (!best || rank[s] < best_rank) {
        best = Pick{s, 0, false};
        best_rank = rank[s];
      }
    }
    if (!best && !g_.strict) return escape_into(g_.initial_env[k], 0);
    return best;
  }

 private:
  const GameStructure& g_;
  const SynthesisResult& r_;
};

}  // namespace detail

// Deterministic Mealy machine from a realizable result. Among admissible
// successors the lowest fixpoint rank wins, then the smallest sys valuation.
inline Strategy extract_strategy(const GameStructure& g, const SynthesisResult& r) {
  if (!r.realizable) throw StrategyError("cannot extract a strategy from an unrealizable result");
  detail::Extractor ex(g, r);
  std::vector<StrategyNode> nodes;
  std::vector<StateIdx> node_state;
  std::map<std::tuple<StateIdx, std::uint32_t, bool>, std::uint32_t> index;
  std::vector<std::vector<std::uint32_t>> next;
  auto intern = [&](const detail::Pick& p) {
    auto key = std::make_tuple(p.state, p.goal, p.escape);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(nodes.size());
    index.emplace(key, id);
    nodes.push_back({g.env_of(p.state), g.sys_of(p.state), p.goal, p.escape});
    node_state.push_back(p.state);
    next.emplace_back();
    return id;
  };

  std::vector<std::uint32_t> initial;
  for (std::size_t k = 0; k < g.initial_env.size(); ++k) {
    auto p = ex.initial(k);
    if (!p) throw StrategyError("internal: initial env input has no winning response");
    initial.push_back(intern(*p));
  }
  for (std::uint32_t n = 0; n < nodes.size(); ++n) {
    const StateIdx s = node_state[n];
    const StrategyNode cur = nodes[n];
    std::vector<std::uint32_t> out;
    for (std::uint32_t m = g.move_begin[s]; m < g.move_begin[s + 1]; ++m) {
      auto p = cur.escape ? ex.escape_step(s, m) : ex.step(s, cur.goal, m);
      if (!p) throw StrategyError("internal: no winning response from a winning state");
      out.push_back(intern(*p));
    }
    next[n] = std::move(out);
  }
  return Strategy(g.spec, g.strict, std::move(nodes), std::move(initial), std::move(next));
}

// Source of env moves: sees the trace so far and returns the next env valuation.
using EnvPolicy = std::function<Valuation(const Trace&)>;

// Runs the strategy for `steps` steps. When the env breaks its assumptions the
// strategy has no prescribed reaction; the system then repeats its last output
// and the step index is recorded.
inline Trace closed_loop(const Strategy& strat, const EnvPolicy& policy, std::size_t steps) {
  Trace tr;
  std::optional<std::uint32_t> cur;
  std::size_t last_sys = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    const Valuation env = policy(tr);
    const std::size_t x = strat.env_space().from_valuation(env);
    std::optional<std::uint32_t> nxt;
    if (!tr.env_violation) nxt = t == 0 ? strat.initial(x) : strat.step(*cur, x);
    if (!nxt && !tr.env_violation) tr.env_violation = t;
    if (nxt) {
      cur = nxt;
      last_sys = strat.node(*cur).sys;
    }
    tr.steps.push_back({strat.env_space().to_valuation(x), strat.sys_space().to_valuation(last_sys)});
  }
  return tr;
}

namespace detail {

inline nlohmann::json var_list(const VarSpace& s) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& v : s.vars()) a.push_back({{"name", v.name}, {"domain", v.domain}});
  return a;
}

}  // namespace detail

inline nlohmann::json to_json(const Strategy& s) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::uint32_t i = 0; i < s.size(); ++i) {
    const auto& n = s.node(i);
    nlohmann::json node = {{"id", i}, {"goal", n.goal}};
    if (!s.strict()) node["escape"] = n.escape;
    node["env"] = s.env_valuation(i);
    node["sys"] = s.output(i);
    node["next"] = s.successors(i);
    nodes.push_back(std::move(node));
  }
  return {{"format", "gr1-strategy/1"},
          {"strict", s.strict()},
          {"env_vars", detail::var_list(s.env_space())},
          {"sys_vars", detail::var_list(s.sys_space())},
          {"goals", s.num_goals()},
          {"initial", s.initial_nodes()},
          {"nodes", nodes},
          {"spec", print_spec(s.spec())}};
}

inline Strategy strategy_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "gr1-strategy/1") throw StrategyError("not a gr1-strategy/1 document");
  GR1Spec spec;
  try {
    spec = parse_spec(j.at("spec").get<std::string>());
  } catch (const std::exception& e) {
    throw StrategyError(std::string("embedded spec: ") + e.what());
  }
  const VarSpace env(spec.vars_of(Owner::Environment)), sys(spec.vars_of(Owner::System));
  const bool strict = j.value("strict", true);
  std::vector<StrategyNode> nodes;
  std::vector<std::vector<std::uint32_t>> next;
  const auto& arr = j.at("nodes");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& n = arr[i];
    if (n.at("id").get<std::size_t>() != i) throw StrategyError("node ids must be 0..n-1 in order");
    StrategyNode sn;
    try {
      sn.env = env.from_valuation(n.at("env").get<Valuation>());
      sn.sys = sys.from_valuation(n.at("sys").get<Valuation>());
    } catch (const EvalError& e) {
      throw StrategyError("node " + std::to_string(i) + ": " + e.what());
    }
    sn.goal = n.at("goal").get<std::uint32_t>();
    if (sn.goal >= spec.sys_progress.size()) throw StrategyError("node " + std::to_string(i) + ": goal out of range");
    sn.escape = n.value("escape", false);
    nodes.push_back(sn);
    next.push_back(n.at("next").get<std::vector<std::uint32_t>>());
  }
  return Strategy(std::move(spec), strict, std::move(nodes), j.at("initial").get<std::vector<std::uint32_t>>(),
                  std::move(next));
}

inline std::string to_dot(const Strategy& s, const std::string& name = "strategy") {
  auto assign = [](const Valuation& v) {
    std::string out;
    for (const auto& [k, val] : v) {
      if (!out.empty()) out += ", ";
      out += val == "true" ? k : val == "false" ? "!" + k : k + "=" + val;
    }
    return out;
  };
  std::string out = "digraph " + name + " {\n  node [shape=box, fontsize=10];\n  init [shape=point];\n";
  for (std::uint32_t i = 0; i < s.size(); ++i) {
    out += "  n" + std::to_string(i) + " [label=\"n" + std::to_string(i) + " goal " +
           std::to_string(s.node(i).goal) + (s.node(i).escape ? " (escape)" : "") + "\\nenv: " +
           assign(s.env_valuation(i)) + "\\nsys: " + assign(s.output(i)) + "\"];\n";
  }
  for (auto i : s.initial_nodes()) out += "  init -> n" + std::to_string(i) + ";\n";
  for (std::uint32_t i = 0; i < s.size(); ++i)
    for (auto t : s.successors(i)) out += "  n" + std::to_string(i) + " -> n" + std::to_string(t) + ";\n";
  out += "}\n";
  return out;
}

struct Synthesis {
  GameStructure game;
  SynthesisResult result;
  std::optional<Strategy> strategy;
};

// build_game + solve + extract_strategy.
inline Synthesis synthesize(const GR1Spec& spec, const GameOptions& opt = {}) {
  Synthesis s{build_game(spec, opt), {}, std::nullopt};
  s.result = solve(s.game);
  if (s.result.realizable) s.strategy = extract_strategy(s.game, s.result);
  return s;
}

}  // namespace gr1
