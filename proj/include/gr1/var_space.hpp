#pragma once

// Dense encodings of valuations and a compiled evaluator for formulas over them.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gr1/expr.hpp"

namespace gr1 {

// Mixed-radix index over a list of variables. The first variable is the most
// significant digit, so index order equals lexicographic valuation order.
class VarSpace {
 public:
  VarSpace() = default;
  explicit VarSpace(std::vector<VarDecl> vars) : vars_(std::move(vars)) {
    size_ = 1;
    overflow_ = false;
    for (const auto& v : vars_) {
      const std::size_t d = v.domain.size();
      if (d == 0 || size_ > std::numeric_limits<std::size_t>::max() / d) overflow_ = true;
      else size_ *= d;
    }
  }

  const std::vector<VarDecl>& vars() const { return vars_; }
  std::size_t arity() const { return vars_.size(); }
  // Number of valuations; saturates at SIZE_MAX.
  std::size_t size() const { return overflow_ ? std::numeric_limits<std::size_t>::max() : size_; }

  int position(std::string_view name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  void decode(std::size_t index, std::span<std::uint8_t> out) const {
    for (std::size_t k = vars_.size(); k-- > 0;) {
      const std::size_t d = vars_[k].domain.size();
      out[k] = static_cast<std::uint8_t>(index % d);
      index /= d;
    }
  }

  std::vector<std::uint8_t> decode(std::size_t index) const {
    std::vector<std::uint8_t> out(vars_.size());
    decode(index, out);
    return out;
  }

  std::size_t encode(std::span<const std::uint8_t> values) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < vars_.size(); ++k) idx = idx * vars_[k].domain.size() + values[k];
    return idx;
  }

  Valuation to_valuation(std::size_t index) const {
    Valuation v;
    auto vals = decode(index);
    for (std::size_t k = 0; k < vars_.size(); ++k) v[vars_[k].name] = vars_[k].domain[vals[k]];
    return v;
  }

  // Reads exactly this space's variables from v; extra entries are ignored.
  std::size_t from_valuation(const Valuation& v) const {
    std::vector<std::uint8_t> vals(vars_.size());
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      auto it = v.find(vars_[k].name);
      if (it == v.end()) throw EvalError("valuation lacks variable '" + vars_[k].name + "'");
      int i = vars_[k].value_index(it->second);
      if (i < 0) throw EvalError("'" + it->second + "' is not a value of '" + vars_[k].name + "'");
      vals[k] = static_cast<std::uint8_t>(i);
    }
    return encode(vals);
  }

 private:
  std::vector<VarDecl> vars_;
  std::size_t size_ = 1;
  bool overflow_ = false;
};

// Pointers to the four dense value arrays a formula may read.
struct Frame {
  const std::uint8_t* env = nullptr;
  const std::uint8_t* sys = nullptr;
  const std::uint8_t* next_env = nullptr;
  const std::uint8_t* next_sys = nullptr;
};

class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const BoolExpr& e, const VarSpace& env, const VarSpace& sys) { root_ = emit(e, env, sys); }

  bool operator()(const Frame& f) const { return eval(root_, f); }

 private:
  enum class Op : std::uint8_t { Const, Atom, Not, And, Or, Implies };
  struct Node {
    Op op = Op::Const;
    bool truth = true;
    std::uint8_t slot = 0;  // 0 env, 1 sys, 2 next env, 3 next sys
    std::uint8_t value = 0;
    std::uint32_t pos = 0;
    std::int32_t a = -1;
    std::int32_t b = -1;
  };

  std::int32_t emit(const BoolExpr& e, const VarSpace& env, const VarSpace& sys) {
    using K = BoolExpr::Kind;
    Node n;
    switch (e.kind()) {
      case K::Const:
        n.op = Op::Const;
        n.truth = e.truth();
        break;
      case K::Atom: {
        n.op = Op::Atom;
        int p = env.position(e.var());
        bool is_sys = false;
        if (p < 0) {
          p = sys.position(e.var());
          is_sys = true;
        }
        if (p < 0) throw EvalError("formula mentions unknown variable '" + e.var() + "'");
        const VarDecl& d = is_sys ? sys.vars()[p] : env.vars()[p];
        int v = d.value_index(e.value());
        if (v < 0) throw EvalError("'" + e.value() + "' is not a value of '" + e.var() + "'");
        n.slot = static_cast<std::uint8_t>((is_sys ? 1 : 0) + (e.primed() ? 2 : 0));
        n.pos = static_cast<std::uint32_t>(p);
        n.value = static_cast<std::uint8_t>(v);
        break;
      }
      case K::Not:
        n.op = Op::Not;
        n.a = emit(e.operand(), env, sys);
        break;
      default:
        n.op = e.kind() == K::And ? Op::And : e.kind() == K::Or ? Op::Or : Op::Implies;
        n.a = emit(e.lhs(), env, sys);
        n.b = emit(e.rhs(), env, sys);
        break;
    }
    nodes_.push_back(n);
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  bool eval(std::int32_t i, const Frame& f) const {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::Const: return n.truth;
      case Op::Atom: {
        const std::uint8_t* base = n.slot == 0 ? f.env : n.slot == 1 ? f.sys : n.slot == 2 ? f.next_env : f.next_sys;
        return base[n.pos] == n.value;
      }
      case Op::Not: return !eval(n.a, f);
      case Op::And: return eval(n.a, f) && eval(n.b, f);
      case Op::Or: return eval(n.a, f) || eval(n.b, f);
      case Op::Implies: return !eval(n.a, f) || eval(n.b, f);
    }
    return false;
  }

  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

// Conjunction of several compiled formulas.
class CompiledConj {
 public:
  CompiledConj() = default;
  CompiledConj(const std::vector<BoolExpr>& fs, const VarSpace& env, const VarSpace& sys) {
    for (const auto& f : fs) parts_.emplace_back(f, env, sys);
  }
  bool operator()(const Frame& f) const {
    for (const auto& p : parts_)
      if (!p(f)) return false;
    return true;
  }

 private:
  std::vector<CompiledExpr> parts_;
};

}  // namespace gr1
