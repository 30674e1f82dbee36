#pragma once

// Finite traces and a checker for the safety and progress parts of a spec.

#include <optional>
#include <string>
#include <vector>

#include "gr1/spec.hpp"

namespace gr1 {

struct TraceStep {
  Valuation env;
  Valuation sys;

  Valuation joint() const {
    Valuation v = env;
    v.insert(sys.begin(), sys.end());
    return v;
  }
  bool operator==(const TraceStep&) const = default;
};

struct Trace {
  std::vector<TraceStep> steps;
  // First step whose env valuation broke env_init (step 0) or env_safety.
  std::optional<std::size_t> env_violation;
  // When set, the trace is a lasso: the step after the last one is loop_start.
  std::optional<std::size_t> loop_start;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
};

enum class Party { Env, Sys };
enum class ViolationKind { Init, Safety, Progress };

struct Violation {
  Party party = Party::Sys;
  ViolationKind kind = ViolationKind::Safety;
  std::size_t step = 0;     // for safety: the transition step -> step+1 (or -> loop_start)
  std::size_t formula = 0;  // index within its section
  std::string text;

  std::string to_string() const {
    const char* k = kind == ViolationKind::Init ? "init" : kind == ViolationKind::Safety ? "safety" : "progress";
    return std::string(party == Party::Env ? "env " : "sys ") + k + " violation at step " + std::to_string(step) +
           ": " + text;
  }
};

// Safety formulas are checked on every consecutive pair (and on the closing
// pair of a lasso). Progress formulas are only meaningful for lassos: each one
// must hold somewhere in the loop.
inline std::vector<Violation> verify_trace(const Trace& trace, const GR1Spec& spec) {
  std::vector<Violation> out;
  if (trace.empty()) return out;
  std::vector<Valuation> v;
  v.reserve(trace.size());
  for (const auto& s : trace.steps) v.push_back(s.joint());

  if (!eval_expr(spec.theta_env, v[0])) out.push_back({Party::Env, ViolationKind::Init, 0, 0, to_string(spec.theta_env)});
  if (!eval_expr(spec.theta_sys, v[0])) out.push_back({Party::Sys, ViolationKind::Init, 0, 0, to_string(spec.theta_sys)});

  auto check_pair = [&](std::size_t t, const Valuation& now, const Valuation& nxt) {
    const std::optional<Valuation> n(nxt);
    for (std::size_t i = 0; i < spec.env_safety.size(); ++i)
      if (!eval_expr(spec.env_safety[i], now, n))
        out.push_back({Party::Env, ViolationKind::Safety, t, i, to_string(spec.env_safety[i])});
    for (std::size_t i = 0; i < spec.sys_safety.size(); ++i)
      if (!eval_expr(spec.sys_safety[i], now, n))
        out.push_back({Party::Sys, ViolationKind::Safety, t, i, to_string(spec.sys_safety[i])});
  };
  for (std::size_t t = 0; t + 1 < v.size(); ++t) check_pair(t, v[t], v[t + 1]);

  if (trace.loop_start && *trace.loop_start < v.size()) {
    const std::size_t l = *trace.loop_start;
    check_pair(v.size() - 1, v.back(), v[l]);
    auto visited = [&](const BoolExpr& f) {
      for (std::size_t t = l; t < v.size(); ++t)
        if (eval_expr(f, v[t])) return true;
      return false;
    };
    for (std::size_t i = 0; i < spec.env_progress.size(); ++i)
      if (!visited(spec.env_progress[i]))
        out.push_back({Party::Env, ViolationKind::Progress, l, i, to_string(spec.env_progress[i])});
    for (std::size_t i = 0; i < spec.sys_progress.size(); ++i)
      if (!visited(spec.sys_progress[i]))
        out.push_back({Party::Sys, ViolationKind::Progress, l, i, to_string(spec.sys_progress[i])});
  }
  return out;
}

inline std::size_t count_violations(const std::vector<Violation>& vs, Party p, ViolationKind k) {
  std::size_t n = 0;
  for (const auto& v : vs) n += v.party == p && v.kind == k;
  return n;
}

}  // namespace gr1
