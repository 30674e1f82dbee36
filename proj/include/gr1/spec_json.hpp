#pragma once

// JSON form of the parsed AST, for external tooling.

#include <nlohmann/json.hpp>

#include "gr1/spec.hpp"

namespace gr1 {

inline nlohmann::json to_json(const BoolExpr& e) {
  using K = BoolExpr::Kind;
  switch (e.kind()) {
    case K::Const: return {{"op", "const"}, {"value", e.truth()}};
    case K::Atom: return {{"op", "atom"}, {"var", e.var()}, {"value", e.value()}, {"next", e.primed()}};
    case K::Not: return {{"op", "not"}, {"arg", to_json(e.operand())}};
    case K::And: return {{"op", "and"}, {"args", {to_json(e.lhs()), to_json(e.rhs())}}};
    case K::Or: return {{"op", "or"}, {"args", {to_json(e.lhs()), to_json(e.rhs())}}};
    case K::Implies: return {{"op", "implies"}, {"args", {to_json(e.lhs()), to_json(e.rhs())}}};
  }
  return nullptr;
}

inline nlohmann::json to_json(const GR1Spec& spec) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : spec.vars)
    vars.push_back({{"name", v.name}, {"owner", to_string(v.owner)}, {"domain", v.domain}});
  auto list = [](const std::vector<BoolExpr>& fs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& f : fs) a.push_back(to_json(f));
    return a;
  };
  return {{"vars", vars},
          {"env_init", to_json(spec.theta_env)},
          {"sys_init", to_json(spec.theta_sys)},
          {"env_safety", list(spec.env_safety)},
          {"sys_safety", list(spec.sys_safety)},
          {"env_progress", list(spec.env_progress)},
          {"sys_progress", list(spec.sys_progress)}};
}

}  // namespace gr1
