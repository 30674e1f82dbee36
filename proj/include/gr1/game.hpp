#pragma once

// Explicit-state two-player game built from a GR1Spec.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "gr1/spec.hpp"
#include "gr1/var_space.hpp"

namespace gr1 {

using Bitset = boost::dynamic_bitset<std::uint64_t>;
using StateIdx = std::uint32_t;

class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 22;

struct GameOptions {
  std::size_t state_cap = kDefaultStateCap;  // bound on |X|*|Y|
  bool prune_unreachable = true;
  bool strict = true;
};

// States are (x, y) pairs identified by a dense id. From each state the
// environment moves x' allowed by rho_e are listed (ascending x'); for each of
// them the system successors allowed by rho_s are listed (ascending y').
struct GameStructure {
  GR1Spec spec;
  VarSpace env;
  VarSpace sys;
  bool strict = true;
  bool pruned = true;

  std::vector<std::size_t> joint;      // state id -> x * |Y| + y
  std::vector<std::int64_t> id_of;     // joint index -> state id, -1 if absent
  std::vector<std::size_t> initial_env;                   // x with Theta_e(x), ascending
  std::vector<std::vector<StateIdx>> initial_choices;     // per initial_env: states with Theta_s, ascending y

  std::vector<std::uint32_t> move_begin;  // size states+1
  std::vector<std::uint32_t> move_env;    // x' of each move
  std::vector<std::uint32_t> succ_begin;  // size moves+1
  std::vector<StateIdx> succ;

  std::vector<Bitset> env_goals;
  std::vector<Bitset> sys_goals;

  std::size_t num_states() const { return joint.size(); }
  std::size_t num_moves() const { return move_env.size(); }
  std::size_t env_of(StateIdx s) const { return joint[s] / sys.size(); }
  std::size_t sys_of(StateIdx s) const { return joint[s] % sys.size(); }
  std::int64_t state_of(std::size_t x, std::size_t y) const { return id_of[x * sys.size() + y]; }

  Valuation valuation(StateIdx s) const {
    Valuation v = env.to_valuation(env_of(s));
    for (auto& [k, val] : sys.to_valuation(sys_of(s))) v[k] = val;
    return v;
  }
};

namespace detail {

struct Compiled {
  CompiledExpr theta_env, theta_sys;
  CompiledConj rho_env, rho_sys;
  std::vector<CompiledExpr> env_goals, sys_goals;
};

}  // namespace detail

inline GameStructure build_game(const GR1Spec& spec, const GameOptions& opt = {}) {
  auto diags = validate_spec(spec);
  if (!diags.empty()) throw GameError("spec is not well-formed: " + diags.front().to_string());

  GameStructure g;
  g.spec = spec;
  g.env = VarSpace(spec.vars_of(Owner::Environment));
  g.sys = VarSpace(spec.vars_of(Owner::System));
  g.strict = opt.strict;
  g.pruned = opt.prune_unreachable;

  const std::size_t nx = g.env.size(), ny = g.sys.size();
  if (nx > opt.state_cap || ny > opt.state_cap / nx)
    throw GameError("joint state space (" + std::to_string(nx) + " env x " + std::to_string(ny) +
                    " sys valuations) exceeds the state cap of " + std::to_string(opt.state_cap));
  if (nx * ny >= (std::size_t{1} << 31)) throw GameError("state space too large for 32-bit state ids");

  detail::Compiled c{CompiledExpr(spec.theta_env, g.env, g.sys), CompiledExpr(spec.theta_sys, g.env, g.sys),
                     CompiledConj(spec.env_safety, g.env, g.sys), CompiledConj(spec.sys_safety, g.env, g.sys),
                     {}, {}};
  for (const auto& f : spec.env_progress) c.env_goals.emplace_back(f, g.env, g.sys);
  for (const auto& f : spec.sys_progress) c.sys_goals.emplace_back(f, g.env, g.sys);

  // Dense tables of decoded valuations.
  const std::size_t ax = g.env.arity(), ay = g.sys.arity();
  std::vector<std::uint8_t> xv(nx * std::max<std::size_t>(ax, 1)), yv(ny * std::max<std::size_t>(ay, 1));
  for (std::size_t x = 0; x < nx; ++x) g.env.decode(x, std::span(xv.data() + x * ax, ax));
  for (std::size_t y = 0; y < ny; ++y) g.sys.decode(y, std::span(yv.data() + y * ay, ay));
  auto xp = [&](std::size_t x) { return xv.data() + x * ax; };
  auto yp = [&](std::size_t y) { return yv.data() + y * ay; };

  g.id_of.assign(nx * ny, -1);
  auto add = [&](std::size_t x, std::size_t y) -> StateIdx {
    const std::size_t j = x * ny + y;
    if (g.id_of[j] >= 0) return static_cast<StateIdx>(g.id_of[j]);
    const auto id = static_cast<StateIdx>(g.joint.size());
    g.id_of[j] = id;
    g.joint.push_back(j);
    return id;
  };

  for (std::size_t x = 0; x < nx; ++x) {
    Frame f{xp(x), yp(0), nullptr, nullptr};
    if (!c.theta_env(f)) continue;
    g.initial_env.push_back(x);
    std::vector<StateIdx> choices;
    for (std::size_t y = 0; y < ny; ++y) {
      f.sys = yp(y);
      const bool ok = c.theta_sys(f);
      if (ok) choices.push_back(add(x, y));
      else if (!opt.strict || !opt.prune_unreachable) add(x, y);
    }
    g.initial_choices.push_back(std::move(choices));
  }
  if (g.initial_env.empty()) throw GameError("no initial pair: env_init is unsatisfiable");

  if (!opt.prune_unreachable)
    for (std::size_t j = 0; j < nx * ny; ++j) add(j / ny, j % ny);

  g.move_begin.push_back(0);
  g.succ_begin.push_back(0);
  // Breadth-first: states are expanded in id order while new ids are appended.
  for (StateIdx s = 0; s < g.joint.size(); ++s) {
    const std::size_t x = g.joint[s] / ny, y = g.joint[s] % ny;
    for (std::size_t x2 = 0; x2 < nx; ++x2) {
      Frame f{xp(x), yp(y), xp(x2), yp(0)};
      if (!c.rho_env(f)) continue;
      g.move_env.push_back(static_cast<std::uint32_t>(x2));
      for (std::size_t y2 = 0; y2 < ny; ++y2) {
        f.next_sys = yp(y2);
        if (c.rho_sys(f)) g.succ.push_back(add(x2, y2));
        else if (!opt.strict) add(x2, y2);
      }
      g.succ_begin.push_back(static_cast<std::uint32_t>(g.succ.size()));
    }
    g.move_begin.push_back(static_cast<std::uint32_t>(g.move_env.size()));
  }

  const std::size_t n = g.joint.size();
  auto goal_sets = [&](const std::vector<CompiledExpr>& fs) {
    std::vector<Bitset> out;
    for (const auto& e : fs) {
      Bitset b(n);
      for (StateIdx s = 0; s < n; ++s) {
        Frame f{xp(g.joint[s] / ny), yp(g.joint[s] % ny), nullptr, nullptr};
        if (e(f)) b.set(s);
      }
      out.push_back(std::move(b));
    }
    return out;
  };
  g.env_goals = goal_sets(c.env_goals);
  g.sys_goals = goal_sets(c.sys_goals);
  return g;
}

}  // namespace gr1
