#pragma once

// Line-oriented sectioned spec format.
//
//   # comment
//   [env_vars]
//   work_zone                 # Boolean
//   dist : {none, d2, d1}     # enumerated
//   [sys_vars]
//   move_slow
//   [env_init]      [sys_init]       one formula per line, lines are conjoined
//   [env_safety]    [sys_safety]     one formula per line
//   [env_progress]  [sys_progress]   one goal per line; empty lists become `true`
//
// Operators by decreasing precedence: `!`, `&`, `|`, `->` (right assoc), `<->`.
// `next(f)` primes every atom of f. Atoms are `x` (x = true), `x = v`, `x != v`.
// A formula continues onto the next line while parentheses are open or the line
// ends in a binary operator.

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gr1/spec.hpp"

namespace gr1 {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct ParseOptions {
  // Run validate_spec and reject shape violations.
  bool validate = true;
};

namespace detail {

enum class Tok { Ident, LParen, RParen, LBrace, RBrace, Comma, Colon, Not, And, Or, Implies, Iff, Eq, Neq, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 0;
  std::size_t col = 0;
};

inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

inline std::vector<Token> tokenize(const std::string& src, std::size_t line, std::size_t col0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    std::size_t col = col0 + i;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') break;
    auto push = [&](Tok k, std::size_t len) {
      out.push_back({k, src.substr(i, len), line, col});
      i += len;
    };
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      push(Tok::Ident, j - i);
    } else if (src.compare(i, 3, "<->") == 0) {
      push(Tok::Iff, 3);
    } else if (src.compare(i, 2, "->") == 0) {
      push(Tok::Implies, 2);
    } else if (src.compare(i, 2, "!=") == 0) {
      push(Tok::Neq, 2);
    } else {
      switch (c) {
        case '(': push(Tok::LParen, 1); break;
        case ')': push(Tok::RParen, 1); break;
        case '{': push(Tok::LBrace, 1); break;
        case '}': push(Tok::RBrace, 1); break;
        case ',': push(Tok::Comma, 1); break;
        case ':': push(Tok::Colon, 1); break;
        case '!': push(Tok::Not, 1); break;
        case '&': push(Tok::And, 1); break;
        case '|': push(Tok::Or, 1); break;
        case '=': push(Tok::Eq, 1); break;
        default: throw ParseError(line, col, std::string("unexpected character '") + c + "'");
      }
    }
  }
  out.push_back({Tok::End, "", line, col0 + src.size()});
  return out;
}

class FormulaParser {
 public:
  FormulaParser(std::vector<Token> toks, const std::vector<VarDecl>& vars)
      : toks_(std::move(toks)), vars_(vars) {}

  BoolExpr parse() {
    BoolExpr e = iff();
    if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw ParseError(t.line, t.col, msg);
  }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) fail(peek(), std::string("expected ") + what);
    return take();
  }

  BoolExpr iff() {
    BoolExpr lhs = implication();
    while (accept(Tok::Iff)) {
      BoolExpr rhs = implication();
      lhs = BoolExpr::conj(BoolExpr::implies(lhs, rhs), BoolExpr::implies(rhs, lhs));
    }
    return lhs;
  }
  BoolExpr implication() {
    BoolExpr lhs = disjunction();
    if (accept(Tok::Implies)) return BoolExpr::implies(lhs, implication());
    return lhs;
  }
  BoolExpr disjunction() {
    BoolExpr lhs = conjunction();
    while (accept(Tok::Or)) lhs = BoolExpr::disj(lhs, conjunction());
    return lhs;
  }
  BoolExpr conjunction() {
    BoolExpr lhs = unary();
    while (accept(Tok::And)) lhs = BoolExpr::conj(lhs, unary());
    return lhs;
  }
  BoolExpr unary() {
    if (accept(Tok::Not)) return BoolExpr::negate(unary());
    return primary();
  }
  BoolExpr primary() {
    const Token& t = peek();
    if (accept(Tok::LParen)) {
      BoolExpr e = iff();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (t.kind != Tok::Ident) fail(t, t.kind == Tok::End ? "unexpected end of formula" : "unexpected '" + t.text + "'");
    take();
    if (t.text == "true") return BoolExpr::constant(true);
    if (t.text == "false") return BoolExpr::constant(false);
    if (t.text == "next" && peek().kind == Tok::LParen) {
      take();
      if (in_next_) fail(t, "nested next(...)");
      in_next_ = true;
      BoolExpr e = iff();
      in_next_ = false;
      expect(Tok::RParen, "')' closing next(");
      return e;
    }
    const VarDecl* var = nullptr;
    for (const auto& v : vars_)
      if (v.name == t.text) var = &v;
    if (!var) fail(t, "undeclared variable '" + t.text + "'");
    bool negated = false;
    std::string value;
    if (peek().kind == Tok::Eq || peek().kind == Tok::Neq) {
      negated = take().kind == Tok::Neq;
      const Token& vt = expect(Tok::Ident, "a value");
      if (var->value_index(vt.text) < 0)
        fail(vt, "value '" + vt.text + "' is outside the domain of '" + var->name + "'");
      value = vt.text;
    } else {
      if (!var->is_boolean()) fail(t, "non-Boolean variable '" + var->name + "' needs '= value'");
      value = "true";
    }
    BoolExpr a = BoolExpr::atom(var->name, value, in_next_);
    return negated ? BoolExpr::negate(a) : a;
  }

  std::vector<Token> toks_;
  const std::vector<VarDecl>& vars_;
  std::size_t pos_ = 0;
  bool in_next_ = false;
};

inline bool ends_with_operator(const std::vector<Token>& toks) {
  if (toks.size() < 2) return false;
  Tok k = toks[toks.size() - 2].kind;
  return k == Tok::And || k == Tok::Or || k == Tok::Implies || k == Tok::Iff || k == Tok::Not ||
         k == Tok::LParen;
}

inline int paren_balance(const std::vector<Token>& toks) {
  int depth = 0;
  for (const auto& t : toks) {
    if (t.kind == Tok::LParen) ++depth;
    if (t.kind == Tok::RParen) --depth;
  }
  return depth;
}

}  // namespace detail

// Source line of every formula, for error positions after parsing.
struct SpecSourceMap {
  std::map<std::pair<Section, std::size_t>, std::size_t> formula_line;
};

inline GR1Spec parse_spec(const std::string& text, const ParseOptions& opts = {},
                          SpecSourceMap* source_map = nullptr) {
  using detail::Tok;
  GR1Spec spec;
  spec.env_progress.clear();
  spec.sys_progress.clear();
  std::vector<BoolExpr> env_init, sys_init;
  SpecSourceMap local_map;
  SpecSourceMap& smap = source_map ? *source_map : local_map;

  enum class Mode { None, EnvVars, SysVars, Formula };
  Mode mode = Mode::None;
  Section current = Section::Vars;

  auto list_for = [&](Section s) -> std::vector<BoolExpr>& {
    switch (s) {
      case Section::EnvInit: return env_init;
      case Section::SysInit: return sys_init;
      case Section::EnvSafety: return spec.env_safety;
      case Section::SysSafety: return spec.sys_safety;
      case Section::EnvProgress: return spec.env_progress;
      default: return spec.sys_progress;
    }
  };

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  std::vector<detail::Token> pending;
  std::size_t pending_line = 0;

  auto flush_formula = [&](std::size_t line) {
    if (pending.empty()) return;
    pending.push_back({Tok::End, "", line, 0});
    detail::FormulaParser p(std::move(pending), spec.vars);
    pending.clear();
    BoolExpr f = p.parse();
    auto& list = list_for(current);
    smap.formula_line[{current, list.size()}] = pending_line;
    list.push_back(std::move(f));
  };

  while (std::getline(in, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t first = raw.find_first_not_of(" \t");
    if (first == std::string::npos || raw[first] == '#') continue;

    if (raw[first] == '[' && pending.empty()) {
      std::size_t close = raw.find(']', first);
      if (close == std::string::npos) throw ParseError(lineno, first + 1, "unterminated section header");
      std::string name = raw.substr(first + 1, close - first - 1);
      std::string rest = raw.substr(close + 1);
      std::size_t extra = rest.find_first_not_of(" \t");
      if (extra != std::string::npos && rest[extra] != '#')
        throw ParseError(lineno, close + 2 + extra, "unexpected text after section header");
      if (name == "env_vars") mode = Mode::EnvVars;
      else if (name == "sys_vars") mode = Mode::SysVars;
      else {
        mode = Mode::Formula;
        if (name == "env_init") current = Section::EnvInit;
        else if (name == "sys_init") current = Section::SysInit;
        else if (name == "env_safety") current = Section::EnvSafety;
        else if (name == "sys_safety") current = Section::SysSafety;
        else if (name == "env_progress") current = Section::EnvProgress;
        else if (name == "sys_progress") current = Section::SysProgress;
        else throw ParseError(lineno, first + 2, "unknown section '" + name + "'");
      }
      continue;
    }

    auto toks = detail::tokenize(raw, lineno, 1);
    switch (mode) {
      case Mode::None: throw ParseError(lineno, first + 1, "content before any section header");
      case Mode::EnvVars:
      case Mode::SysVars: {
        const Owner owner = mode == Mode::EnvVars ? Owner::Environment : Owner::System;
        std::size_t k = 0;
        auto fail = [&](const std::string& m) { throw ParseError(toks[k].line, toks[k].col, m); };
        if (toks[k].kind != Tok::Ident) fail("expected a variable name");
        VarDecl v{toks[k].text, owner, {}};
        if (v.name == "true" || v.name == "false" || v.name == "next") fail("'" + v.name + "' is reserved");
        if (spec.find(v.name)) fail("variable '" + v.name + "' declared twice");
        ++k;
        if (toks[k].kind == Tok::End) {
          v.domain = {"false", "true"};
        } else {
          if (toks[k].kind != Tok::Colon) fail("expected ':' or end of line");
          ++k;
          if (toks[k].kind != Tok::LBrace) fail("expected '{'");
          ++k;
          while (true) {
            if (toks[k].kind != Tok::Ident) fail("expected a value");
            if (v.value_index(toks[k].text) >= 0) fail("value '" + toks[k].text + "' repeated");
            v.domain.push_back(toks[k].text);
            ++k;
            if (toks[k].kind == Tok::Comma) {
              ++k;
              continue;
            }
            if (toks[k].kind != Tok::RBrace) fail("expected ',' or '}'");
            ++k;
            break;
          }
          if (toks[k].kind != Tok::End) fail("unexpected text after domain");
          if (v.domain.size() < 2) fail("domain of '" + v.name + "' needs at least two values");
        }
        spec.vars.push_back(std::move(v));
        break;
      }
      case Mode::Formula: {
        if (pending.empty()) pending_line = lineno;
        toks.pop_back();  // End
        pending.insert(pending.end(), toks.begin(), toks.end());
        auto probe = pending;
        probe.push_back({Tok::End, "", lineno, 0});
        if (detail::paren_balance(probe) > 0 || detail::ends_with_operator(probe)) break;
        flush_formula(lineno);
        break;
      }
    }
  }
  if (!pending.empty()) {
    const auto& t = pending.back();
    throw ParseError(t.line, t.col, "formula is not terminated (open parenthesis or trailing operator)");
  }

  // env vars first, then sys vars, each in declaration order.
  std::stable_partition(spec.vars.begin(), spec.vars.end(),
                        [](const VarDecl& v) { return v.owner == Owner::Environment; });
  spec.theta_env = BoolExpr::conj(env_init);
  spec.theta_sys = BoolExpr::conj(sys_init);
  if (spec.env_progress.empty()) spec.env_progress.push_back(BoolExpr::constant(true));
  if (spec.sys_progress.empty()) spec.sys_progress.push_back(BoolExpr::constant(true));

  if (opts.validate) {
    auto diags = validate_spec(spec);
    if (!diags.empty()) {
      const auto& d = diags.front();
      std::size_t line = 0;
      auto it = smap.formula_line.find({d.section, d.index});
      if (it != smap.formula_line.end()) line = it->second;
      throw ParseError(line, 1, "formula in wrong section shape: " + d.to_string());
    }
  }
  return spec;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline GR1Spec load_spec(const std::string& path, const ParseOptions& opts = {}) {
  return parse_spec(read_text_file(path), opts);
}

}  // namespace gr1
