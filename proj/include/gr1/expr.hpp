#pragma once

// Typed variables, valuations and the Boolean/next-step formula AST used by
// GR(1) specifications.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gr1 {

enum class Owner { Environment, System };

inline const char* to_string(Owner o) {
  return o == Owner::Environment ? "env" : "sys";
}

struct VarDecl {
  std::string name;
  Owner owner = Owner::Environment;
  // Ordered. Boolean variables use {"false", "true"}.
  std::vector<std::string> domain;

  static VarDecl boolean(std::string name, Owner owner) {
    return VarDecl{std::move(name), owner, {"false", "true"}};
  }

  bool is_boolean() const {
    return domain.size() == 2 && domain[0] == "false" && domain[1] == "true";
  }

  // -1 when the value is not in the domain.
  int value_index(std::string_view value) const {
    for (std::size_t i = 0; i < domain.size(); ++i)
      if (domain[i] == value) return static_cast<int>(i);
    return -1;
  }

  bool operator==(const VarDecl&) const = default;
};

// Variable name -> value symbol.
using Valuation = std::map<std::string, std::string>;

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BoolExpr {
 public:
  enum class Kind { Const, Atom, Not, And, Or, Implies };

  BoolExpr() : BoolExpr(constant(true)) {}

  static BoolExpr constant(bool v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->truth = v;
    return BoolExpr(std::move(n));
  }

  static BoolExpr atom(std::string var, std::string value = "true", bool primed = false) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Atom;
    n->var = std::move(var);
    n->value = std::move(value);
    n->primed = primed;
    return BoolExpr(std::move(n));
  }

  static BoolExpr negate(BoolExpr e) { return unary(Kind::Not, std::move(e)); }
  static BoolExpr conj(BoolExpr a, BoolExpr b) { return binary(Kind::And, std::move(a), std::move(b)); }
  static BoolExpr disj(BoolExpr a, BoolExpr b) { return binary(Kind::Or, std::move(a), std::move(b)); }
  static BoolExpr implies(BoolExpr a, BoolExpr b) {
    return binary(Kind::Implies, std::move(a), std::move(b));
  }

  // Left-folded conjunction/disjunction; empty lists give the unit.
  static BoolExpr conj(const std::vector<BoolExpr>& es) {
    if (es.empty()) return constant(true);
    BoolExpr acc = es.front();
    for (std::size_t i = 1; i < es.size(); ++i) acc = conj(acc, es[i]);
    return acc;
  }
  static BoolExpr disj(const std::vector<BoolExpr>& es) {
    if (es.empty()) return constant(false);
    BoolExpr acc = es.front();
    for (std::size_t i = 1; i < es.size(); ++i) acc = disj(acc, es[i]);
    return acc;
  }

  Kind kind() const { return node_->kind; }
  bool truth() const { return node_->truth; }
  const std::string& var() const { return node_->var; }
  const std::string& value() const { return node_->value; }
  bool primed() const { return node_->primed; }
  const BoolExpr& lhs() const { return node_->children.at(0); }
  const BoolExpr& rhs() const { return node_->children.at(1); }
  const BoolExpr& operand() const { return node_->children.at(0); }
  const std::vector<BoolExpr>& children() const { return node_->children; }

  friend bool operator==(const BoolExpr& a, const BoolExpr& b) {
    if (a.node_ == b.node_) return true;
    const Node& x = *a.node_;
    const Node& y = *b.node_;
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case Kind::Const: return x.truth == y.truth;
      case Kind::Atom: return x.var == y.var && x.value == y.value && x.primed == y.primed;
      default: return x.children == y.children;
    }
  }

 private:
  struct Node {
    Kind kind = Kind::Const;
    bool truth = true;
    std::string var;
    std::string value;
    bool primed = false;
    std::vector<BoolExpr> children;
  };

  explicit BoolExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static BoolExpr unary(Kind k, BoolExpr e) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->children = {std::move(e)};
    return BoolExpr(std::move(n));
  }
  static BoolExpr binary(Kind k, BoolExpr a, BoolExpr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->children = {std::move(a), std::move(b)};
    return BoolExpr(std::move(n));
  }

  std::shared_ptr<const Node> node_;
};

// Convenience builders for hand-written formulas.
inline BoolExpr next(const BoolExpr& e);

inline BoolExpr operator!(const BoolExpr& e) { return BoolExpr::negate(e); }
inline BoolExpr operator&&(const BoolExpr& a, const BoolExpr& b) { return BoolExpr::conj(a, b); }
inline BoolExpr operator||(const BoolExpr& a, const BoolExpr& b) { return BoolExpr::disj(a, b); }

struct AtomRef {
  std::string var;
  std::string value;
  bool primed = false;
  auto operator<=>(const AtomRef&) const = default;
};

template <typename F>
void for_each_atom(const BoolExpr& e, F&& f) {
  if (e.kind() == BoolExpr::Kind::Atom) {
    f(e);
    return;
  }
  for (const auto& c : e.children()) for_each_atom(c, f);
}

inline std::set<AtomRef> atoms_of(const BoolExpr& e) {
  std::set<AtomRef> out;
  for_each_atom(e, [&](const BoolExpr& a) { out.insert({a.var(), a.value(), a.primed()}); });
  return out;
}

inline bool has_primed(const BoolExpr& e) {
  bool found = false;
  for_each_atom(e, [&](const BoolExpr& a) { found = found || a.primed(); });
  return found;
}

// Rebuilds e with every atom primed. Throws if e already contains a primed atom.
inline BoolExpr next(const BoolExpr& e) {
  using K = BoolExpr::Kind;
  switch (e.kind()) {
    case K::Const: return e;
    case K::Atom:
      if (e.primed()) throw std::invalid_argument("nested next on atom '" + e.var() + "'");
      return BoolExpr::atom(e.var(), e.value(), true);
    case K::Not: return BoolExpr::negate(next(e.operand()));
    case K::And: return BoolExpr::conj(next(e.lhs()), next(e.rhs()));
    case K::Or: return BoolExpr::disj(next(e.lhs()), next(e.rhs()));
    case K::Implies: return BoolExpr::implies(next(e.lhs()), next(e.rhs()));
  }
  return e;
}

inline bool eval_expr(const BoolExpr& e, const Valuation& now,
                      const std::optional<Valuation>& next_val = std::nullopt) {
  using K = BoolExpr::Kind;
  switch (e.kind()) {
    case K::Const: return e.truth();
    case K::Atom: {
      const Valuation* v = &now;
      if (e.primed()) {
        if (!next_val) throw EvalError("primed atom 'next(" + e.var() + ")' needs a next valuation");
        v = &*next_val;
      }
      auto it = v->find(e.var());
      if (it == v->end())
        throw EvalError("variable '" + e.var() + "' is absent from the " +
                        (e.primed() ? "next" : "current") + " valuation");
      return it->second == e.value();
    }
    case K::Not: return !eval_expr(e.operand(), now, next_val);
    case K::And: return eval_expr(e.lhs(), now, next_val) && eval_expr(e.rhs(), now, next_val);
    case K::Or: return eval_expr(e.lhs(), now, next_val) || eval_expr(e.rhs(), now, next_val);
    case K::Implies: return !eval_expr(e.lhs(), now, next_val) || eval_expr(e.rhs(), now, next_val);
  }
  return false;
}

// Negation normal form over And/Or with negated atoms; implications removed.
inline BoolExpr to_nnf(const BoolExpr& e, bool negated = false) {
  using K = BoolExpr::Kind;
  switch (e.kind()) {
    case K::Const: return BoolExpr::constant(e.truth() != negated);
    case K::Atom: return negated ? BoolExpr::negate(e) : e;
    case K::Not: return to_nnf(e.operand(), !negated);
    case K::And:
      return negated ? BoolExpr::disj(to_nnf(e.lhs(), true), to_nnf(e.rhs(), true))
                     : BoolExpr::conj(to_nnf(e.lhs()), to_nnf(e.rhs()));
    case K::Or:
      return negated ? BoolExpr::conj(to_nnf(e.lhs(), true), to_nnf(e.rhs(), true))
                     : BoolExpr::disj(to_nnf(e.lhs()), to_nnf(e.rhs()));
    case K::Implies:
      return negated ? BoolExpr::conj(to_nnf(e.lhs()), to_nnf(e.rhs(), true))
                     : BoolExpr::disj(to_nnf(e.lhs(), true), to_nnf(e.rhs()));
  }
  return e;
}

namespace detail {

inline int precedence(BoolExpr::Kind k) {
  switch (k) {
    case BoolExpr::Kind::Implies: return 1;
    case BoolExpr::Kind::Or: return 2;
    case BoolExpr::Kind::And: return 3;
    case BoolExpr::Kind::Not: return 4;
    default: return 5;
  }
}

inline void print_atom(std::string& out, const BoolExpr& e) {
  std::string body = e.value() == "true" ? e.var() : e.var() + " = " + e.value();
  out += e.primed() ? "next(" + body + ")" : body;
}

inline void print(std::string& out, const BoolExpr& e, int parent_prec, bool right_operand) {
  using K = BoolExpr::Kind;
  const int prec = precedence(e.kind());
  // -> is right associative, & and | are left-folded by the parser.
  bool paren = prec < parent_prec;
  if (prec == parent_prec && prec < 4) {
    paren = e.kind() == K::Implies ? !right_operand : right_operand;
  }
  if (paren) out += '(';
  switch (e.kind()) {
    case K::Const: out += e.truth() ? "true" : "false"; break;
    case K::Atom: print_atom(out, e); break;
    case K::Not:
      out += '!';
      print(out, e.operand(), prec, false);
      break;
    case K::And:
    case K::Or:
    case K::Implies: {
      const char* op = e.kind() == K::And ? " & " : e.kind() == K::Or ? " | " : " -> ";
      print(out, e.lhs(), prec, false);
      out += op;
      print(out, e.rhs(), prec, true);
      break;
    }
  }
  if (paren) out += ')';
}

}  // namespace detail

// Deterministic concrete syntax accepted back by the spec parser.
inline std::string to_string(const BoolExpr& e) {
  std::string out;
  detail::print(out, e, 0, false);
  return out;
}

}  // namespace gr1
