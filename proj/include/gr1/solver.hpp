#pragma once

// Three-nested GR(1) fixpoint over an explicit game.
//
//   Z = nu Z. AND_j mu Y. OR_i nu X. (J^s_j & cox Z) | cox Y | (!J^e_i & cox X)
//
// All intermediate sets are kept inside the current Z, which makes every
// per-goal Y equal to Z at the fixpoint and lets the strategy stay in Z.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gr1/game.hpp"

namespace gr1 {

struct SolveStats {
  std::size_t states = 0;
  std::size_t moves = 0;
  std::size_t edges = 0;
  std::size_t z_iterations = 0;
  std::size_t y_iterations = 0;
  std::size_t x_iterations = 0;
};

// Layered attractor data for one system goal: y_layers[r] is Y after r steps
// (y_layers[0] is empty) and x_layers[r][i] the inner nu X for env goal i.
struct GoalRanks {
  std::vector<Bitset> y_layers;
  std::vector<std::vector<Bitset>> x_layers;
  std::vector<std::uint32_t> rank;  // first r with s in y_layers[r]; 0 if never

  std::size_t layer_of_x(StateIdx s, std::uint32_t r) const {
    const auto& xs = x_layers[r];
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i].test(s)) return i;
    return xs.size();
  }
};

struct SynthesisResult {
  bool realizable = false;
  Bitset winning;                 // over game state ids
  std::vector<GoalRanks> ranks;   // per system goal, computed for the final Z
  Bitset escape;                  // non-strict: states where sys wins by forcing an env violation
  GoalRanks escape_ranks;
  std::vector<std::uint8_t> escape_move;  // non-strict: per move, some y' leads into `escape`
  SolveStats stats;
};

namespace detail {

// States from which, for every env move, some successor lies in t. Moves with
// escape_ok set count as satisfied.
inline Bitset cox(const GameStructure& g, const Bitset& t, const std::vector<std::uint8_t>* escape_ok) {
  const std::size_t n = g.num_states();
  Bitset out(n);
  for (StateIdx s = 0; s < n; ++s) {
    bool all = true;
    for (std::uint32_t m = g.move_begin[s]; m < g.move_begin[s + 1] && all; ++m) {
      if (escape_ok && (*escape_ok)[m]) continue;
      bool any = false;
      for (std::uint32_t e = g.succ_begin[m]; e < g.succ_begin[m + 1]; ++e)
        if (t.test(g.succ[e])) {
          any = true;
          break;
        }
      all = any;
    }
    if (all) out.set(s);
  }
  return out;
}

// cox where the system may pick any y' at all (used for the escape region).
inline Bitset cox_any(const GameStructure& g, const Bitset& t) {
  const std::size_t nx = g.env.size(), ny = g.sys.size();
  std::vector<std::uint8_t> col(nx, 0);
  for (StateIdx s = 0; s < g.num_states(); ++s)
    if (t.test(s)) col[g.joint[s] / ny] = 1;
  Bitset out(g.num_states());
  for (StateIdx s = 0; s < g.num_states(); ++s) {
    bool all = true;
    for (std::uint32_t m = g.move_begin[s]; m < g.move_begin[s + 1] && all; ++m) all = col[g.move_env[m]] != 0;
    if (all) out.set(s);
  }
  return out;
}

// mu Y for one system goal inside z; records the layers when asked.
template <class Cox>
Bitset mu_y(const GameStructure& g, const Bitset& z, const Bitset& goal, const Cox& cx, SolveStats& st,
            GoalRanks* rec) {
  const std::size_t n = g.num_states();
  const Bitset start_goal = goal & cx(z) & z;
  Bitset y(n);
  if (rec) {
    rec->y_layers.assign(1, y);
    rec->x_layers.assign(1, {});
  }
  while (true) {
    ++st.y_iterations;
    const Bitset start = (start_goal | cx(y)) & z;
    Bitset ynew(n);
    std::vector<Bitset> xs;
    for (const auto& eg : g.env_goals) {
      const Bitset not_eg = ~eg;
      Bitset x = z;
      while (true) {
        ++st.x_iterations;
        Bitset xn = (start | (not_eg & cx(x))) & z;
        if (xn == x) break;
        x = std::move(xn);
      }
      ynew |= x;
      if (rec) xs.push_back(std::move(x));
    }
    if (ynew == y) break;
    y = std::move(ynew);
    if (rec) {
      rec->y_layers.push_back(y);
      rec->x_layers.push_back(std::move(xs));
    }
  }
  if (rec) {
    rec->rank.assign(n, 0);
    for (std::uint32_t r = static_cast<std::uint32_t>(rec->y_layers.size()); r-- > 1;)
      for (StateIdx s = 0; s < n; ++s)
        if (rec->y_layers[r].test(s)) rec->rank[s] = r;
  }
  return y;
}

template <class Cox>
Bitset gr1_fixpoint(const GameStructure& g, const Bitset& top, const std::vector<Bitset>& sys_goals,
                    const Cox& cx, SolveStats& st) {
  Bitset z = top;
  while (true) {
    ++st.z_iterations;
    Bitset znew = z;
    for (const auto& goal : sys_goals) znew &= mu_y(g, z, goal, cx, st, nullptr);
    if (znew == z) break;
    z = std::move(znew);
  }
  return z;
}

}  // namespace detail

inline SynthesisResult solve(const GameStructure& g) {
  SynthesisResult res;
  const std::size_t n = g.num_states();
  res.stats.states = n;
  res.stats.moves = g.num_moves();
  res.stats.edges = g.succ.size();
  Bitset all(n);
  all.set();

  const std::vector<std::uint8_t>* escape_ok = nullptr;
  if (!g.strict) {
    // Escape region: sys may leave its guarantees if it can still force the
    // environment to violate its own assumptions.
    auto cxa = [&](const Bitset& t) { return detail::cox_any(g, t); };
    const std::vector<Bitset> no_goal{Bitset(n)};
    res.escape = detail::gr1_fixpoint(g, all, no_goal, cxa, res.stats);
    detail::mu_y(g, res.escape, no_goal[0], cxa, res.stats, &res.escape_ranks);
    const std::size_t ny = g.sys.size();
    res.escape_move.assign(g.num_moves(), 0);
    std::vector<std::uint8_t> col(g.env.size(), 0);
    for (StateIdx s = 0; s < n; ++s)
      if (res.escape.test(s)) col[g.joint[s] / ny] = 1;
    for (std::size_t m = 0; m < g.num_moves(); ++m) res.escape_move[m] = col[g.move_env[m]];
    escape_ok = &res.escape_move;
  }

  auto cx = [&](const Bitset& t) { return detail::cox(g, t, escape_ok); };
  res.winning = detail::gr1_fixpoint(g, all, g.sys_goals, cx, res.stats);
  res.ranks.resize(g.sys_goals.size());
  for (std::size_t j = 0; j < g.sys_goals.size(); ++j)
    detail::mu_y(g, res.winning, g.sys_goals[j], cx, res.stats, &res.ranks[j]);

  res.realizable = true;
  for (std::size_t k = 0; k < g.initial_env.size() && res.realizable; ++k) {
    bool ok = false;
    for (StateIdx s : g.initial_choices[k]) ok = ok || res.winning.test(s);
    if (!ok && !g.strict) {
      const std::size_t x = g.initial_env[k];
      for (std::size_t y = 0; y < g.sys.size() && !ok; ++y) {
        auto s = g.state_of(x, y);
        ok = s >= 0 && res.escape.test(static_cast<StateIdx>(s));
      }
    }
    res.realizable = ok;
  }
  return res;
}

// Joint valuations (x * |Y| + y) of the winning region, ascending.
inline std::vector<std::size_t> winning_joint(const GameStructure& g, const SynthesisResult& r) {
  std::vector<std::size_t> out;
  for (StateIdx s = 0; s < g.num_states(); ++s)
    if (r.winning.test(s)) out.push_back(g.joint[s]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gr1
