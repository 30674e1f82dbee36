#pragma once

// GR(1) specification container, shape validation and pretty-printing.

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gr1/expr.hpp"

namespace gr1 {

enum class Section { EnvInit, SysInit, EnvSafety, SysSafety, EnvProgress, SysProgress, Vars };

inline const char* section_name(Section s) {
  switch (s) {
    case Section::EnvInit: return "env_init";
    case Section::SysInit: return "sys_init";
    case Section::EnvSafety: return "env_safety";
    case Section::SysSafety: return "sys_safety";
    case Section::EnvProgress: return "env_progress";
    case Section::SysProgress: return "sys_progress";
    case Section::Vars: return "vars";
  }
  return "?";
}

struct GR1Spec {
  std::vector<VarDecl> vars;
  BoolExpr theta_env = BoolExpr::constant(true);
  BoolExpr theta_sys = BoolExpr::constant(true);
  std::vector<BoolExpr> env_safety;
  std::vector<BoolExpr> sys_safety;
  std::vector<BoolExpr> env_progress{BoolExpr::constant(true)};
  std::vector<BoolExpr> sys_progress{BoolExpr::constant(true)};

  const VarDecl* find(std::string_view name) const {
    for (const auto& v : vars)
      if (v.name == name) return &v;
    return nullptr;
  }

  std::vector<VarDecl> vars_of(Owner owner) const {
    std::vector<VarDecl> out;
    for (const auto& v : vars)
      if (v.owner == owner) out.push_back(v);
    return out;
  }

  bool operator==(const GR1Spec&) const = default;
};

struct Diagnostic {
  Section section = Section::Vars;
  std::size_t index = 0;  // formula index within the section (or variable index)
  std::string rule;
  std::string message;

  std::string to_string() const {
    return std::string(section_name(section)) + "[" + std::to_string(index) + "]: " + rule + ": " +
           message;
  }
};

namespace detail {

struct ShapeRule {
  bool allow_env = true;
  bool allow_sys = true;
  bool allow_next_env = false;
  bool allow_next_sys = false;
  const char* name = "";
};

inline ShapeRule shape_rule(Section s) {
  switch (s) {
    case Section::EnvInit: return {true, false, false, false, "env-init shape (unprimed, env variables only)"};
    case Section::SysInit: return {true, true, false, false, "sys-init shape (unprimed)"};
    case Section::EnvSafety:
      return {true, true, true, false, "env-safety shape (no primed system variables)"};
    case Section::SysSafety: return {true, true, true, true, "sys-safety shape"};
    case Section::EnvProgress:
    case Section::SysProgress: return {true, true, false, false, "progress shape (unprimed)"};
    default: return {};
  }
}

inline void check_formula(const GR1Spec& spec, const BoolExpr& f, Section section, std::size_t index,
                          std::vector<Diagnostic>& out) {
  const ShapeRule rule = shape_rule(section);
  std::set<std::string> reported;
  for_each_atom(f, [&](const BoolExpr& a) {
    const VarDecl* v = spec.find(a.var());
    std::string key = a.var() + (a.primed() ? "'" : "");
    if (reported.count(key)) return;
    if (!v) {
      reported.insert(key);
      out.push_back({section, index, "undeclared variable", "'" + a.var() + "' is not declared"});
      return;
    }
    if (v->value_index(a.value()) < 0) {
      reported.insert(key);
      out.push_back({section, index, "value outside domain",
                     "'" + a.value() + "' is not a value of '" + a.var() + "'"});
      return;
    }
    const bool env = v->owner == Owner::Environment;
    bool ok = a.primed() ? (env ? rule.allow_next_env : rule.allow_next_sys)
                         : (env ? rule.allow_env : rule.allow_sys);
    if (!ok) {
      reported.insert(key);
      std::string what = std::string(a.primed() ? "primed " : "") + (env ? "environment" : "system") +
                         " variable '" + a.var() + "'";
      out.push_back({section, index, rule.name, what + " is not allowed here"});
    }
  });
}

}  // namespace detail

// Empty result iff every structural invariant holds.
inline std::vector<Diagnostic> validate_spec(const GR1Spec& spec) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i < spec.vars.size(); ++i) {
    const auto& v = spec.vars[i];
    for (std::size_t j = 0; j < i; ++j)
      if (spec.vars[j].name == v.name)
        out.push_back({Section::Vars, i, "unique names", "'" + v.name + "' is declared twice"});
    if (v.domain.size() < 2)
      out.push_back({Section::Vars, i, "domain size", "'" + v.name + "' needs at least two values"});
    auto sorted = v.domain;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      out.push_back({Section::Vars, i, "domain values", "'" + v.name + "' repeats a value"});
  }
  detail::check_formula(spec, spec.theta_env, Section::EnvInit, 0, out);
  detail::check_formula(spec, spec.theta_sys, Section::SysInit, 0, out);
  for (std::size_t i = 0; i < spec.env_safety.size(); ++i)
    detail::check_formula(spec, spec.env_safety[i], Section::EnvSafety, i, out);
  for (std::size_t i = 0; i < spec.sys_safety.size(); ++i)
    detail::check_formula(spec, spec.sys_safety[i], Section::SysSafety, i, out);
  if (spec.env_progress.empty())
    out.push_back({Section::EnvProgress, 0, "non-empty progress",
                   "progress lists must be non-empty (insert `true` to express no goal)"});
  if (spec.sys_progress.empty())
    out.push_back({Section::SysProgress, 0, "non-empty progress",
                   "progress lists must be non-empty (insert `true` to express no goal)"});
  for (std::size_t i = 0; i < spec.env_progress.size(); ++i)
    detail::check_formula(spec, spec.env_progress[i], Section::EnvProgress, i, out);
  for (std::size_t i = 0; i < spec.sys_progress.size(); ++i)
    detail::check_formula(spec, spec.sys_progress[i], Section::SysProgress, i, out);
  return out;
}

// Canonical text form; parse_spec(print_spec(s)) == s for parser-produced specs.
inline std::string print_spec(const GR1Spec& spec) {
  std::string out;
  auto print_vars = [&](Owner owner, const char* header) {
    out += header;
    out += '\n';
    for (const auto& v : spec.vars) {
      if (v.owner != owner) continue;
      out += v.name;
      if (!v.is_boolean()) {
        out += " : {";
        for (std::size_t i = 0; i < v.domain.size(); ++i) {
          if (i) out += ", ";
          out += v.domain[i];
        }
        out += '}';
      }
      out += '\n';
    }
  };
  auto print_list = [&](const char* header, const std::vector<BoolExpr>& fs) {
    out += '\n';
    out += header;
    out += '\n';
    for (const auto& f : fs) out += to_string(f) + '\n';
  };
  print_vars(Owner::Environment, "[env_vars]");
  out += '\n';
  print_vars(Owner::System, "[sys_vars]");
  print_list("[env_init]", {spec.theta_env});
  print_list("[sys_init]", {spec.theta_sys});
  print_list("[env_safety]", spec.env_safety);
  print_list("[sys_safety]", spec.sys_safety);
  print_list("[env_progress]", spec.env_progress);
  print_list("[sys_progress]", spec.sys_progress);
  return out;
}

}  // namespace gr1
