#pragma once

// Plain-text notation for terms and equations:
//
//   ∀ x y. ∃ z. x◇(y◇z) = z
//
// `*` is accepted for ◇, `forall`/`exists` for the quantifiers and `!=` for ≠.
// Nested magma applications must be parenthesized. Without an explicit prefix
// a name is a variable when it is one of u..z optionally followed by digits or
// primes; every other name is a constant.

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "eqmin/term.hpp"

namespace eqmin {

enum class VarStyle {
  Math,  // u..z with optional digits/primes
  Tptp,  // names starting with an upper-case letter; mul/2 is the magma operation
  Bound,  // only names bound by a quantifier prefix (or passed in) are variables
};

inline bool is_math_variable_name(std::string_view n) {
  if (n.empty() || n[0] < 'u' || n[0] > 'z') return false;
  for (std::size_t i = 1; i < n.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(n[i])) && n[i] != '\'') return false;
  return true;
}

inline bool is_skolem_name(std::string_view n) {
  if (n.size() >= 2 && n[0] == 's' && (n[1] == 'k' || n[1] == 'K')) {
    for (std::size_t i = 2; i < n.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(n[i]))) return false;
    return n[1] == 'k' || n.size() > 2;
  }
  return false;
}

namespace detail {

enum class Tok { Ident, LParen, RParen, Comma, Dot, Eq, Neq, Op, Forall, Exists, Bottom, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src, std::size_t line = 1, std::size_t column = 1)
      : src_(src), line_(line), col_(column) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", line_, col_});
        return out;
      }
      std::size_t l = line_, c = col_;
      auto starts = [&](std::string_view s) { return src_.substr(pos_, s.size()) == s; };
      auto emit = [&](Tok k, std::size_t bytes, std::string text) {
        advance(bytes);
        out.push_back({k, std::move(text), l, c});
      };
      char ch = src_[pos_];
      if (starts("\xE2\x97\x87")) emit(Tok::Op, 3, "◇");
      else if (starts("\xE2\x88\x80")) emit(Tok::Forall, 3, "∀");
      else if (starts("\xE2\x88\x83")) emit(Tok::Exists, 3, "∃");
      else if (starts("\xE2\x89\xA0")) emit(Tok::Neq, 3, "≠");
      else if (starts("\xE2\x8A\xA5")) emit(Tok::Bottom, 3, "⊥");
      else if (starts("!=")) emit(Tok::Neq, 2, "!=");
      else if (starts("$false")) emit(Tok::Bottom, 6, "$false");
      else if (ch == '*') emit(Tok::Op, 1, "*");
      else if (ch == '(') emit(Tok::LParen, 1, "(");
      else if (ch == ')') emit(Tok::RParen, 1, ")");
      else if (ch == ',') emit(Tok::Comma, 1, ",");
      else if (ch == '.') emit(Tok::Dot, 1, ".");
      else if (ch == ':') emit(Tok::Dot, 1, ":");
      else if (ch == '=') emit(Tok::Eq, 1, "=");
      else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '#') {
        std::size_t end = pos_ + 1;
        while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_' ||
                                     src_[end] == '\''))
          ++end;
        std::string word(src_.substr(pos_, end - pos_));
        if (word == "forall") emit(Tok::Forall, word.size(), word);
        else if (word == "exists") emit(Tok::Exists, word.size(), word);
        else emit(Tok::Ident, word.size(), word);
      } else {
        throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
      }
    }
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance(1);
  }
  void advance(std::size_t bytes) {
    for (std::size_t i = 0; i < bytes; ++i, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
        ++col_;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t col_;
};

class MathParser {
 public:
  MathParser(std::vector<Token> toks, VarStyle style) : toks_(std::move(toks)), style_(style) {}

  std::optional<QuantifiedEquation> statement() {
    if (peek().kind == Tok::Bottom) {
      next();
      expect_end();
      return std::nullopt;
    }
    QuantifiedEquation q;
    while (peek().kind == Tok::Forall || peek().kind == Tok::Exists) {
      Quantifier quant = next().kind == Tok::Forall ? Quantifier::Forall : Quantifier::Exists;
      bool any = false;
      while (peek().kind == Tok::Ident) {
        q.prefix.push_back({quant, next().text});
        bound_.insert(q.prefix.back().var);
        any = true;
        if (peek().kind == Tok::Comma) next();
      }
      if (!any) fail("expected a variable after the quantifier");
      if (peek().kind != Tok::Dot) fail("expected '.' after the quantified variables");
      next();
    }
    q.body = equation();
    expect_end();
    return normalize_prefix(std::move(q));
  }

  Equation equation() {
    Term l = term();
    Polarity pol;
    if (peek().kind == Tok::Eq) pol = Polarity::Equal;
    else if (peek().kind == Tok::Neq) pol = Polarity::Disequal;
    else fail("expected '=' or '≠'");
    next();
    Term r = term();
    return {l, r, pol};
  }

  Term term() {
    Term l = primary();
    if (peek().kind != Tok::Op) return l;
    next();
    Term r = primary();
    if (peek().kind == Tok::Op) fail("nested ◇ applications must be parenthesized");
    return Term::magma(l, r);
  }

  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
  }

  void bind(const std::set<std::string>& vars) { bound_.insert(vars.begin(), vars.end()); }

 private:
  Term primary() {
    if (peek().kind == Tok::LParen) {
      next();
      Term t = term();
      if (peek().kind != Tok::RParen) fail("expected ')'");
      next();
      return t;
    }
    if (peek().kind != Tok::Ident) fail("expected a term");
    Token id = next();
    if (peek().kind == Tok::LParen) {
      next();
      std::vector<Term> args{term()};
      while (peek().kind == Tok::Comma) {
        next();
        args.push_back(term());
      }
      if (peek().kind != Tok::RParen) fail("expected ')'");
      next();
      if (style_ == VarStyle::Tptp && id.text == "mul" && args.size() == 2) return Term::magma(args[0], args[1]);
      return Term::app(id.text, std::move(args));
    }
    if (is_var(id.text)) return Term::var(id.text);
    return Term::constant(id.text, is_skolem_name(id.text));
  }

  bool is_var(const std::string& n) const {
    if (bound_.count(n)) return true;
    if (style_ == VarStyle::Tptp) return std::isupper(static_cast<unsigned char>(n[0])) != 0;
    if (style_ == VarStyle::Bound) return false;
    return is_math_variable_name(n);
  }

  const Token& peek() const { return toks_[i_]; }
  Token next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, peek().line, peek().column); }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  VarStyle style_;
  std::set<std::string> bound_;
};

}  // namespace detail

inline Term parse_term(std::string_view text, VarStyle style = VarStyle::Math,
                       const std::set<std::string>& bound = {}) {
  detail::MathParser p(detail::Lexer(text).run(), style);
  p.bind(bound);
  Term t = p.term();
  p.expect_end();
  return t;
}

inline Equation parse_equation(std::string_view text, VarStyle style = VarStyle::Math) {
  detail::MathParser p(detail::Lexer(text).run(), style);
  Equation e = p.equation();
  p.expect_end();
  return e;
}

/// Parses a possibly quantified statement. Returns nullopt for ⊥.
inline std::optional<QuantifiedEquation> parse_statement(std::string_view text, VarStyle style = VarStyle::Math) {
  detail::MathParser p(detail::Lexer(text).run(), style);
  return p.statement();
}

inline QuantifiedEquation parse_quantified(std::string_view text, VarStyle style = VarStyle::Math) {
  auto q = parse_statement(text, style);
  if (!q) throw ParseError("expected an equation, found ⊥", 1, 1);
  return *q;
}

// ---------------------------------------------------------------------------
// Printing

inline void print_term(const Term& t, std::string& out) {
  if (!t.is_app()) {
    out += t.name();
    return;
  }
  if (t.is_magma()) {
    auto operand = [&](const Term& a) {
      if (a.is_magma()) {
        out += "(";
        print_term(a, out);
        out += ")";
      } else {
        print_term(a, out);
      }
    };
    operand(t.arg(0));
    out += kMagmaOp;
    operand(t.arg(1));
    return;
  }
  out += t.name();
  out += "(";
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ",";
    print_term(t.arg(i), out);
  }
  out += ")";
}

inline std::string to_string(const Term& t) {
  std::string s;
  print_term(t, s);
  return s;
}

inline std::string to_string(const Equation& e) {
  return to_string(e.lhs) + (e.positive() ? " = " : " ≠ ") + to_string(e.rhs);
}

inline std::string to_string(const QuantifiedEquation& q) {
  QuantifiedEquation n = normalize_prefix(q);
  std::string s;
  std::size_t i = 0;
  while (i < n.prefix.size()) {
    Quantifier quant = n.prefix[i].quantifier;
    s += quant == Quantifier::Forall ? "∀" : "∃";
    while (i < n.prefix.size() && n.prefix[i].quantifier == quant) s += " " + n.prefix[i++].var;
    s += ". ";
  }
  return s + to_string(n.body);
}

}  // namespace eqmin
