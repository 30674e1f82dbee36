#pragma once

// Brute-force reference semantics for small GR(1) specs, written directly on
// top of eval_expr over string valuations:
//  * reachable state enumeration,
//  * realizability via a Zielonka solver on an explicit parity product,
//  * realizability by enumerating every finite-memory strategy of a fixed
//    shape (one Boolean input, one Boolean output).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "gr1/spec.hpp"

namespace oracle {

using gr1::Valuation;

// All valuations of `vars`, first variable most significant, domain order.
inline std::vector<Valuation> all_valuations(const std::vector<gr1::VarDecl>& vars) {
  std::vector<Valuation> out;
  Valuation cur;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == vars.size()) {
      out.push_back(cur);
      return;
    }
    for (const auto& val : vars[k].domain) {
      cur[vars[k].name] = val;
      rec(k + 1);
    }
    cur.erase(vars[k].name);
  };
  rec(0);
  return out;
}

inline Valuation merge(const Valuation& a, const Valuation& b) {
  Valuation m = a;
  m.insert(b.begin(), b.end());
  return m;
}

inline bool all_hold(const std::vector<gr1::BoolExpr>& fs, const Valuation& now, const Valuation& nxt) {
  for (const auto& f : fs)
    if (!gr1::eval_expr(f, now, nxt)) return false;
  return true;
}

// Truth tables over X (env valuations) and Y (sys valuations).
struct Tables {
  std::vector<Valuation> X, Y;
  std::vector<char> theta_e;                      // [x]
  std::vector<std::vector<char>> theta_s;         // [x][y]
  std::vector<char> rho_e;                        // [((x*|Y|+y)*|X|+x')]
  std::vector<char> rho_s;                        // [(((x*|Y|+y)*|X|+x')*|Y|+y')]
  std::vector<std::vector<char>> je, js;          // [goal][x*|Y|+y]

  std::size_t nx() const { return X.size(); }
  std::size_t ny() const { return Y.size(); }
  bool re(std::size_t x, std::size_t y, std::size_t x2) const { return rho_e[(x * ny() + y) * nx() + x2]; }
  bool rs(std::size_t x, std::size_t y, std::size_t x2, std::size_t y2) const {
    return rho_s[((x * ny() + y) * nx() + x2) * ny() + y2];
  }
};

inline Tables make_tables(const gr1::GR1Spec& spec) {
  Tables t;
  t.X = all_valuations(spec.vars_of(gr1::Owner::Environment));
  t.Y = all_valuations(spec.vars_of(gr1::Owner::System));
  const std::size_t nx = t.nx(), ny = t.ny();
  std::vector<Valuation> joint(nx * ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) joint[x * ny + y] = merge(t.X[x], t.Y[y]);
  t.theta_e.resize(nx);
  t.theta_s.assign(nx, std::vector<char>(ny));
  for (std::size_t x = 0; x < nx; ++x) {
    t.theta_e[x] = gr1::eval_expr(spec.theta_env, joint[x * ny]);
    for (std::size_t y = 0; y < ny; ++y) t.theta_s[x][y] = gr1::eval_expr(spec.theta_sys, joint[x * ny + y]);
  }
  t.rho_e.resize(nx * ny * nx);
  t.rho_s.resize(nx * ny * nx * ny);
  for (std::size_t a = 0; a < nx * ny; ++a)
    for (std::size_t x2 = 0; x2 < nx; ++x2) {
      // Env safety may not mention next sys vars; any y' gives the same value.
      t.rho_e[a * nx + x2] = all_hold(spec.env_safety, joint[a], joint[x2 * ny]);
      for (std::size_t y2 = 0; y2 < ny; ++y2)
        t.rho_s[(a * nx + x2) * ny + y2] = all_hold(spec.sys_safety, joint[a], joint[x2 * ny + y2]);
    }
  auto goals = [&](const std::vector<gr1::BoolExpr>& fs) {
    std::vector<std::vector<char>> out;
    for (const auto& f : fs) {
      std::vector<char> row(nx * ny);
      for (std::size_t a = 0; a < nx * ny; ++a) row[a] = gr1::eval_expr(f, joint[a]);
      out.push_back(row);
    }
    return out;
  };
  t.je = goals(spec.env_progress);
  t.js = goals(spec.sys_progress);
  return t;
}

// On-demand evaluation of the spec formulas over string valuations, for specs
// too large to tabulate.
struct Semantics {
  const gr1::GR1Spec* spec = nullptr;
  std::vector<Valuation> X, Y;

  explicit Semantics(const gr1::GR1Spec& s)
      : spec(&s),
        X(all_valuations(s.vars_of(gr1::Owner::Environment))),
        Y(all_valuations(s.vars_of(gr1::Owner::System))) {}

  std::size_t nx() const { return X.size(); }
  std::size_t ny() const { return Y.size(); }
  Valuation joint(std::size_t x, std::size_t y) const { return merge(X[x], Y[y]); }
  bool theta_e(std::size_t x) const { return gr1::eval_expr(spec->theta_env, joint(x, 0)); }
  bool theta_s(std::size_t x, std::size_t y) const { return gr1::eval_expr(spec->theta_sys, joint(x, y)); }
  bool re(std::size_t x, std::size_t y, std::size_t x2) const {
    return all_hold(spec->env_safety, joint(x, y), joint(x2, 0));
  }
  bool rs(std::size_t x, std::size_t y, std::size_t x2, std::size_t y2) const {
    return all_hold(spec->sys_safety, joint(x, y), joint(x2, y2));
  }
};

// Joint indices (x*|Y|+y) reachable under the game rules. Strict games
// follow rho_e and rho_s from Theta_e & Theta_s; non-strict games also
// include every system reply, legal or not, because an illegal reply is a
// position the game can reach.
inline std::set<std::size_t> reachable_joint(const gr1::GR1Spec& spec, bool strict) {
  const Semantics t(spec);
  const std::size_t nx = t.nx(), ny = t.ny();
  std::set<std::size_t> seen;
  std::vector<std::size_t> stack;
  auto push = [&](std::size_t j) {
    if (seen.insert(j).second) stack.push_back(j);
  };
  for (std::size_t x = 0; x < nx; ++x)
    if (t.theta_e(x))
      for (std::size_t y = 0; y < ny; ++y)
        if (!strict || t.theta_s(x, y)) push(x * ny + y);
  while (!stack.empty()) {
    const std::size_t j = stack.back();
    stack.pop_back();
    const std::size_t x = j / ny, y = j % ny;
    for (std::size_t x2 = 0; x2 < nx; ++x2) {
      if (!t.re(x, y, x2)) continue;
      for (std::size_t y2 = 0; y2 < ny; ++y2)
        if (!strict || t.rs(x, y, x2, y2)) push(x2 * ny + y2);
    }
  }
  return seen;
}

// ---------------------------------------------------------------- parity

// Explicit max-parity game; player 0 (even) is the system.
struct ParityGame {
  std::vector<int> owner, prio;
  std::vector<std::vector<int>> succ, pred;

  int add(int o, int p) {
    owner.push_back(o);
    prio.push_back(p);
    succ.emplace_back();
    pred.emplace_back();
    return static_cast<int>(owner.size()) - 1;
  }
  void edge(int a, int b) {
    succ[a].push_back(b);
    pred[b].push_back(a);
  }
  std::size_t size() const { return owner.size(); }

  std::vector<char> attractor(int pl, const std::vector<char>& target, const std::vector<char>& alive) const {
    std::vector<char> in(size(), 0);
    std::vector<int> cnt(size(), 0), queue;
    for (std::size_t v = 0; v < size(); ++v) {
      if (!alive[v]) continue;
      for (int w : succ[v]) cnt[v] += alive[w] ? 1 : 0;
      if (target[v]) {
        in[v] = 1;
        queue.push_back(static_cast<int>(v));
      }
    }
    while (!queue.empty()) {
      const int u = queue.back();
      queue.pop_back();
      for (int p : pred[u]) {
        if (!alive[p] || in[p]) continue;
        if (owner[p] == pl || --cnt[p] == 0) {
          in[p] = 1;
          queue.push_back(p);
        }
      }
    }
    return in;
  }

  // Returns the winning region of player 0 within `alive`.
  std::vector<char> zielonka(const std::vector<char>& alive) const {
    const std::size_t n = size();
    int d = -1;
    for (std::size_t v = 0; v < n; ++v)
      if (alive[v]) d = std::max(d, prio[v]);
    if (d < 0) return std::vector<char>(n, 0);
    const int pl = d % 2;
    std::vector<char> top(n, 0);
    for (std::size_t v = 0; v < n; ++v) top[v] = alive[v] && prio[v] == d;
    auto a = attractor(pl, top, alive);
    std::vector<char> rest(n, 0);
    for (std::size_t v = 0; v < n; ++v) rest[v] = alive[v] && !a[v];
    auto w0 = zielonka(rest);
    std::vector<char> w_opp(n, 0);
    bool any = false;
    for (std::size_t v = 0; v < n; ++v) {
      const bool in0 = w0[v];
      w_opp[v] = rest[v] && (pl == 0 ? !in0 : in0);
      any = any || w_opp[v];
    }
    if (!any) {
      if (pl == 0) return alive;
      return std::vector<char>(n, 0);
    }
    auto b = attractor(1 - pl, w_opp, alive);
    std::vector<char> rest2(n, 0);
    for (std::size_t v = 0; v < n; ++v) rest2[v] = alive[v] && !b[v];
    auto w0b = zielonka(rest2);
    if (pl == 0) return w0b;  // opponent owns B
    std::vector<char> out = w0b;
    for (std::size_t v = 0; v < n; ++v)
      if (b[v]) out[v] = 1;
    return out;
  }
};

// Realizability by reduction of the GR(1) objective to a parity game with
// round-robin goal counters. Returns nullopt if Theta_e is unsatisfiable.
inline std::optional<bool> parity_realizable(const gr1::GR1Spec& spec, bool strict) {
  const Tables t = make_tables(spec);
  const std::size_t nx = t.nx(), ny = t.ny();
  const int ke = static_cast<int>(t.je.size()), ks = static_cast<int>(t.js.size());
  ParityGame pg;
  const int sys_sink = pg.add(0, 0);
  pg.edge(sys_sink, sys_sink);
  const int env_sink = pg.add(0, 1);
  pg.edge(env_sink, env_sink);

  using StateKey = std::tuple<std::size_t, std::size_t, int, int, int, int>;  // x y a b violated prio
  using MoveKey = std::tuple<std::size_t, std::size_t, std::size_t, int, int, int>;
  std::map<StateKey, int> states;
  std::map<MoveKey, int> moves;
  std::vector<StateKey> todo;

  auto enter = [&](std::size_t x, std::size_t y, int a, int b, int violated) -> int {
    const std::size_t j = x * ny + y;
    bool wrap_e = false, wrap_s = false;
    if (t.je[static_cast<std::size_t>(a)][j]) {
      a = (a + 1) % ke;
      wrap_e = a == 0;
    }
    if (violated) {
      b = 0;
    } else if (t.js[static_cast<std::size_t>(b)][j]) {
      b = (b + 1) % ks;
      wrap_s = b == 0;
    }
    const int p = wrap_s ? 2 : wrap_e ? 1 : 0;
    StateKey key{x, y, a, b, violated, p};
    auto it = states.find(key);
    if (it != states.end()) return it->second;
    const int id = pg.add(1, p);
    states.emplace(key, id);
    todo.push_back(key);
    return id;
  };

  const int init = pg.add(1, 0);
  bool any_init = false;
  for (std::size_t x = 0; x < nx; ++x) {
    if (!t.theta_e[x]) continue;
    any_init = true;
    const int choose = pg.add(0, 0);
    pg.edge(init, choose);
    for (std::size_t y = 0; y < ny; ++y) {
      if (t.theta_s[x][y]) pg.edge(choose, enter(x, y, 0, 0, 0));
      else if (!strict) pg.edge(choose, enter(x, y, 0, 0, 1));
    }
    if (pg.succ[static_cast<std::size_t>(choose)].empty()) pg.edge(choose, env_sink);
  }
  if (!any_init) return std::nullopt;

  while (!todo.empty()) {
    const StateKey key = todo.back();
    todo.pop_back();
    const auto [x, y, a, b, violated, p] = key;
    const int sid = states.at(key);
    for (std::size_t x2 = 0; x2 < nx; ++x2) {
      if (!t.re(x, y, x2)) continue;
      MoveKey mk{x, y, x2, a, b, violated};
      auto it = moves.find(mk);
      int mid;
      if (it != moves.end()) {
        mid = it->second;
      } else {
        mid = pg.add(0, 0);
        moves.emplace(mk, mid);
        for (std::size_t y2 = 0; y2 < ny; ++y2) {
          const bool legal = t.rs(x, y, x2, y2);
          if (violated) pg.edge(mid, enter(x2, y2, a, b, 1));
          else if (legal) pg.edge(mid, enter(x2, y2, a, b, 0));
          else if (!strict) pg.edge(mid, enter(x2, y2, a, b, 1));
        }
        if (pg.succ[static_cast<std::size_t>(mid)].empty()) pg.edge(mid, env_sink);
      }
      pg.edge(sid, mid);
    }
    if (pg.succ[static_cast<std::size_t>(sid)].empty()) pg.edge(sid, sys_sink);
  }

  std::vector<char> alive(pg.size(), 1);
  return pg.zielonka(alive)[static_cast<std::size_t>(init)] != 0;
}

// ------------------------------------------------------- strategy enumeration

// For specs with exactly one Boolean env variable, one Boolean sys variable
// and at most two system goals: tries every strategy that maps
// (x, y, x', goal counter) to y' and x0 to y0, and checks each one by
// looking for reachable cycles that satisfy all env goals but miss a system
// goal. Strict semantics only.
inline bool enumerate_realizable(const gr1::GR1Spec& spec) {
  const Tables t = make_tables(spec);
  const int ks = static_cast<int>(t.js.size());
  const std::size_t nx = t.nx(), ny = t.ny();
  if (nx != 2 || ny != 2 || ks > 2) throw std::invalid_argument("enumerate_realizable: unsupported shape");
  const int step_bits = static_cast<int>(nx * ny * nx) * ks;
  const int init_bits = static_cast<int>(nx);
  auto upd = [&](int b, std::size_t j) { return t.js[static_cast<std::size_t>(b)][j] ? (b + 1) % ks : b; };

  for (std::uint32_t f0 = 0; f0 < (1u << init_bits); ++f0) {
    bool init_ok = true;
    for (std::size_t x = 0; x < nx; ++x)
      if (t.theta_e[x] && !t.theta_s[x][(f0 >> x) & 1]) init_ok = false;
    if (!init_ok) continue;
    for (std::uint32_t f = 0; f < (1u << step_bits); ++f) {
      auto reply = [&](std::size_t x, std::size_t y, std::size_t x2, int b) -> std::size_t {
        const std::size_t bit = ((x * ny + y) * nx + x2) * static_cast<std::size_t>(ks) + static_cast<std::size_t>(b);
        return (f >> bit) & 1;
      };
      // Nodes (x, y, b) encoded as (x*ny+y)*ks+b.
      const std::size_t nn = nx * ny * static_cast<std::size_t>(ks);
      std::vector<std::vector<std::size_t>> adj(nn);
      std::vector<char> reach(nn, 0);
      std::vector<std::size_t> stack;
      bool ok = true;
      for (std::size_t x = 0; x < nx; ++x) {
        if (!t.theta_e[x]) continue;
        const std::size_t y = (f0 >> x) & 1, j = x * ny + y;
        const std::size_t node = j * static_cast<std::size_t>(ks) + static_cast<std::size_t>(upd(0, j));
        if (!reach[node]) {
          reach[node] = 1;
          stack.push_back(node);
        }
      }
      while (ok && !stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        const std::size_t j = u / static_cast<std::size_t>(ks), x = j / ny, y = j % ny;
        const int b = static_cast<int>(u % static_cast<std::size_t>(ks));
        for (std::size_t x2 = 0; x2 < nx; ++x2) {
          if (!t.re(x, y, x2)) continue;
          const std::size_t y2 = reply(x, y, x2, b);
          if (!t.rs(x, y, x2, y2)) {
            ok = false;
            break;
          }
          const std::size_t j2 = x2 * ny + y2;
          const std::size_t v = j2 * static_cast<std::size_t>(ks) + static_cast<std::size_t>(upd(b, j2));
          adj[u].push_back(v);
          if (!reach[v]) {
            reach[v] = 1;
            stack.push_back(v);
          }
        }
      }
      if (!ok) continue;
      // Env wins if, avoiding some sys goal, a reachable cycle meets all env goals.
      bool env_wins = false;
      for (int g = 0; g < ks && !env_wins; ++g) {
        std::vector<char> keep(nn, 0);
        for (std::size_t u = 0; u < nn; ++u)
          keep[u] = reach[u] && !t.js[static_cast<std::size_t>(g)][u / static_cast<std::size_t>(ks)];
        std::vector<std::vector<char>> r(nn, std::vector<char>(nn, 0));
        for (std::size_t u = 0; u < nn; ++u)
          if (keep[u])
            for (std::size_t v : adj[u])
              if (keep[v]) r[u][v] = 1;
        for (std::size_t k = 0; k < nn; ++k)
          for (std::size_t u = 0; u < nn; ++u)
            if (r[u][k])
              for (std::size_t v = 0; v < nn; ++v)
                if (r[k][v]) r[u][v] = 1;
        for (std::size_t u = 0; u < nn && !env_wins; ++u) {
          if (!r[u][u]) continue;
          bool all = true;
          for (const auto& je : t.je) {
            bool hit = false;
            for (std::size_t v = 0; v < nn; ++v)
              if (r[u][v] && r[v][u] && je[v / static_cast<std::size_t>(ks)]) hit = true;
            all = all && hit;
          }
          env_wins = all;
        }
      }
      if (!env_wins) return true;
    }
  }
  return false;
}

}  // namespace oracle
