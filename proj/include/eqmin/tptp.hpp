#pragma once

// Reader and writer for the unit-equality subset of TPTP (fof/cnf), plus the
// generic annotation terms used by TSTP derivations.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "eqmin/proof.hpp"
#include "eqmin/syntax.hpp"
#include "eqmin/term.hpp"

namespace eqmin::tptp {

/// The function symbol standing for the magma operation in TPTP files.
inline const std::string kMagmaSymbol = "mul";

/// General term of a TSTP annotation: `inference(rule,[...],[f1,f2])`.
struct GTerm {
  std::string functor;  // empty for lists
  std::vector<GTerm> args;
  bool list = false;

  const GTerm* arg(std::size_t i) const { return i < args.size() ? &args[i] : nullptr; }
};

struct Formula {
  std::string language;  // fof or cnf
  std::string name;
  std::string role;
  std::optional<QuantifiedEquation> statement;  // nullopt is $false
  std::optional<GTerm> source;
  std::size_t line = 0;
  std::string unsupported;  // set by lenient parsing when the formula is outside the fragment
};

namespace detail {

enum class Tok { Word, Var, Quoted, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto adv = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') adv(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      adv(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) adv(1);
      adv(2);
      continue;
    }
    std::size_t l = line, cl = col;
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t j = i + 1;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string w(src.substr(i, j - i));
      Tok k = std::isupper(static_cast<unsigned char>(c)) || c == '_' ? Tok::Var : Tok::Word;
      adv(j - i);
      out.push_back({k, w, l, cl});
      continue;
    }
    if (c == '\'' || c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != c) j += src[j] == '\\' ? 2 : 1;
      if (j >= src.size()) throw ParseError("unterminated quoted name", l, cl);
      std::string w(src.substr(i + 1, j - i - 1));
      adv(j + 1 - i);
      out.push_back({Tok::Quoted, w, l, cl});
      continue;
    }
    static const char* multi[] = {"<=>", "<~>", "=>", "<=", "!=", "~|", "~&"};
    bool matched = false;
    for (const char* m : multi) {
      std::string_view mv(m);
      if (src.substr(i, mv.size()) == mv) {
        adv(mv.size());
        out.push_back({Tok::Punct, std::string(mv), l, cl});
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("()[],.:!?~=&|").find(c) != std::string_view::npos) {
      adv(1);
      out.push_back({Tok::Punct, std::string(1, c), l, cl});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<Formula> file(bool lenient = false) {
    std::vector<Formula> out;
    while (peek().kind != Tok::End) {
      const Token& head = peek();
      if (head.kind != Tok::Word) fail("expected fof, cnf or include");
      if (head.text == "include") fail("include directives are not supported");
      if (head.text != "fof" && head.text != "cnf") {
        throw UnsupportedLogic("unsupported TPTP language '" + head.text + "' at line " + std::to_string(head.line));
      }
      out.push_back(lenient ? annotated_lenient() : annotated());
    }
    return out;
  }

  GTerm general_term() {
    if (is_punct("[")) {
      next();
      GTerm g;
      g.list = true;
      if (!is_punct("]")) {
        g.args.push_back(general_term());
        while (is_punct(",")) {
          next();
          g.args.push_back(general_term());
        }
      }
      expect("]");
      return g;
    }
    const Token& t = peek();
    if (t.kind != Tok::Word && t.kind != Tok::Var && t.kind != Tok::Quoted) fail("expected a term");
    GTerm g;
    g.functor = next().text;
    if (is_punct("(")) {
      next();
      g.args.push_back(general_term());
      while (is_punct(",")) {
        next();
        g.args.push_back(general_term());
      }
      expect(")");
    }
    // `status(thm)`-style and `name:value` annotations
    if (is_punct(":")) {
      next();
      GTerm rhs = general_term();
      GTerm pair;
      pair.functor = ":";
      pair.args = {g, rhs};
      return pair;
    }
    return g;
  }

 private:
  // On an out-of-fragment formula, keeps name, role and source and skips the body.
  Formula annotated_lenient() {
    std::size_t start = i_;
    try {
      return annotated();
    } catch (const UnsupportedLogic& e) {
      i_ = start;
      Formula f;
      f.unsupported = e.what();
      f.line = peek().line;
      f.language = next().text;
      expect("(");
      f.name = next().text;
      expect(",");
      f.role = next().text;
      expect(",");
      int depth = 0;
      while (peek().kind != Tok::End) {
        if (is_punct("(") || is_punct("[")) ++depth;
        if (is_punct(")") || is_punct("]")) {
          if (depth == 0) break;
          --depth;
        }
        if (depth == 0 && is_punct(",")) break;
        next();
      }
      if (is_punct(",")) {
        next();
        f.source = general_term();
        while (is_punct(",")) {
          next();
          general_term();
        }
      }
      expect(")");
      expect(".");
      return f;
    }
  }

  Formula annotated() {
    Formula f;
    f.line = peek().line;
    f.language = next().text;
    expect("(");
    const Token& n = peek();
    if (n.kind != Tok::Word && n.kind != Tok::Quoted && n.kind != Tok::Var) fail("expected a formula name");
    f.name = next().text;
    expect(",");
    if (peek().kind != Tok::Word) fail("expected a formula role");
    f.role = next().text;
    expect(",");
    vars_.clear();
    f.statement = f.language == "cnf" ? clause() : formula();
    if (is_punct(",")) {
      next();
      f.source = general_term();
      while (is_punct(",")) {  // useful info
        next();
        general_term();
      }
    }
    expect(")");
    expect(".");
    return f;
  }

  // cnf: a single literal; disjunctions are outside the unit fragment.
  std::optional<QuantifiedEquation> clause() {
    std::size_t depth = 0;
    while (is_punct("(")) {
      next();
      ++depth;
    }
    auto lit = literal(false);
    if (is_punct("|")) throw UnsupportedLogic("non-unit clause at line " + std::to_string(peek().line));
    for (; depth > 0; --depth) expect(")");
    if (is_punct("|")) throw UnsupportedLogic("non-unit clause at line " + std::to_string(peek().line));
    if (!lit) return std::nullopt;
    return universal_closure(*lit);
  }

  std::optional<QuantifiedEquation> formula() {
    auto f = unitary(false);
    if (peek().kind == Tok::Punct) {
      static const std::set<std::string> binary{"&", "|", "=>", "<=", "<=>", "<~>", "~|", "~&"};
      if (binary.count(peek().text))
        throw UnsupportedLogic("connective '" + peek().text + "' outside the unit-equality fragment at line " +
                               std::to_string(peek().line));
    }
    return f;
  }

  // `negate` tracks an odd number of enclosing negations.
  std::optional<QuantifiedEquation> unitary(bool negate) {
    if (is_punct("(")) {
      next();
      auto f = formula_inner(negate);
      expect(")");
      return f;
    }
    if (is_punct("~")) {
      next();
      return unitary(!negate);
    }
    if (is_punct("!") || is_punct("?")) {
      bool forall = next().text == "!";
      expect("[");
      std::vector<std::string> bound;
      for (;;) {
        if (peek().kind != Tok::Var) fail("expected a variable");
        bound.push_back(next().text);
        if (is_punct(",")) {
          next();
          continue;
        }
        break;
      }
      expect("]");
      expect(":");
      for (const auto& v : bound) vars_.insert(v);
      auto body = unitary(negate);
      if (!body) return body;
      Quantifier q = (forall != negate) ? Quantifier::Forall : Quantifier::Exists;
      QuantifiedEquation out;
      for (const auto& v : bound) out.prefix.push_back({q, v});
      out.prefix.insert(out.prefix.end(), body->prefix.begin(), body->prefix.end());
      out.body = body->body;
      return normalize_prefix(out);
    }
    auto lit = literal(negate);
    if (!lit) return std::nullopt;
    QuantifiedEquation q;
    q.body = *lit;
    return q;
  }

  std::optional<QuantifiedEquation> formula_inner(bool negate) {
    auto f = unitary(negate);
    if (peek().kind == Tok::Punct && peek().text != ")")
      if (peek().text == "&" || peek().text == "|" || peek().text == "=>" || peek().text == "<=>" ||
          peek().text == "<=")
        throw UnsupportedLogic("connective '" + peek().text + "' outside the unit-equality fragment at line " +
                               std::to_string(peek().line));
    return f;
  }

  // Returns nullopt for $false.
  std::optional<Equation> literal(bool negate) {
    bool neg = negate;
    while (is_punct("~")) {
      next();
      neg = !neg;
    }
    if (peek().kind == Tok::Word && peek().text == "$false") {
      next();
      if (neg) fail("negated $false is not supported");
      return std::nullopt;
    }
    Term l = term();
    Polarity pol;
    if (is_punct("=")) pol = Polarity::Equal;
    else if (is_punct("!=")) pol = Polarity::Disequal;
    else throw UnsupportedLogic("non-equational atom at line " + std::to_string(peek().line));
    next();
    Term r = term();
    Equation e{l, r, pol};
    return neg ? e.negated() : e;
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == Tok::Var) return Term::var(next().text);
    if (t.kind != Tok::Word && t.kind != Tok::Quoted) fail("expected a term");
    std::string f = next().text;
    if (!is_punct("(")) return Term::constant(f, is_skolem_name(f));
    next();
    std::vector<Term> args{term()};
    while (is_punct(",")) {
      next();
      args.push_back(term());
    }
    expect(")");
    if (f == kMagmaSymbol && args.size() == 2) return Term::magma(args[0], args[1]);
    return Term::app(f, std::move(args));
  }

  const Token& peek() const { return toks_[i_]; }
  const Token& next() { return toks_[i_ + 1 < toks_.size() ? i_++ : i_]; }
  bool is_punct(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
  void expect(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    next();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + (peek().kind == Tok::End ? " at end of input" : ", found '" + peek().text + "'"),
                     peek().line, peek().column);
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::set<std::string> vars_;
};

}  // namespace detail

inline std::vector<Formula> parse_formulas(std::string_view text, bool lenient = false) {
  return detail::Parser(detail::lex(text)).file(lenient);
}

/// Renames variables to x, y, z, ... in order of first occurrence.
inline QuantifiedEquation present(const QuantifiedEquation& q) { return presentation_form(q); }

inline Problem read_problem(std::string_view text, const std::string& id = "problem") {
  Problem p;
  p.id = id;
  bool have_conjecture = false;
  std::set<std::string> names;
  for (auto& f : parse_formulas(text)) {
    if (!f.statement) throw UnsupportedLogic("$false in a problem file");
    if (!f.statement->universal()) throw UnsupportedLogic("existential formula '" + f.name + "' in a problem file");
    if (!f.statement->body.positive()) throw UnsupportedLogic("negative formula '" + f.name + "' in a problem file");
    NamedEquation ne{f.name, present(*f.statement)};
    if (f.role == "conjecture") {
      if (have_conjecture) throw ParseError("more than one conjecture", f.line, 1);
      have_conjecture = true;
      p.conjecture = ne;
    } else if (f.role == "axiom" || f.role == "hypothesis" || f.role == "lemma" || f.role == "definition") {
      if (!names.insert(f.name).second) throw ParseError("duplicate formula name '" + f.name + "'", f.line, 1);
      p.axioms.push_back(ne);
    } else {
      throw ParseError("unsupported role '" + f.role + "'", f.line, 1);
    }
  }
  if (!have_conjecture) throw ParseError("no conjecture", 1, 1);
  return p;
}

// ---------------------------------------------------------------------------
// Writing

inline std::string variable_symbol(std::size_t index) {
  std::string n = variable_name(index);
  n[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(n[0])));
  return n;
}

/// TPTP-safe lower-case name.
inline std::string formula_name(const std::string& raw) {
  std::string out;
  for (char c : raw) out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_';
  if (out.empty() || !std::islower(static_cast<unsigned char>(out[0]))) out = "f_" + out;
  return out;
}

inline void write_term(const Term& t, const std::map<std::string, std::string>& vars, std::string& out) {
  switch (t.kind()) {
    case TermKind::Variable: {
      auto it = vars.find(t.name());
      out += it == vars.end() ? t.name() : it->second;
      return;
    }
    case TermKind::Constant:
      out += t.name();
      return;
    case TermKind::App:
      out += t.is_magma() ? kMagmaSymbol : t.name();
      out += "(";
      for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ",";
        write_term(t.arg(i), vars, out);
      }
      out += ")";
      return;
  }
}

/// Universally closed formula text with variables X, Y, Z, W, V, U, X1, ...
inline std::string formula_text(const QuantifiedEquation& q) {
  std::map<std::string, std::string> vars;
  std::vector<std::string> order = vars_in_order(q.body);
  for (std::size_t i = 0; i < order.size(); ++i) vars[order[i]] = variable_symbol(i);
  std::string out;
  if (!order.empty()) {
    out += "! [";
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i) out += ",";
      out += vars[order[i]];
    }
    out += "] : ";
  }
  std::string eq;
  write_term(q.body.lhs, vars, eq);
  eq += q.body.positive() ? " = " : " != ";
  write_term(q.body.rhs, vars, eq);
  out += order.empty() ? eq : "(" + eq + ")";
  return out;
}

/// Clause text without quantifiers; variables become X, Y, ... in order.
inline std::string clause_text(const std::optional<QuantifiedEquation>& q) {
  if (!q) return "$false";
  std::map<std::string, std::string> vars;
  std::vector<std::string> order = vars_in_order(q->body);
  for (std::size_t i = 0; i < order.size(); ++i) vars[order[i]] = variable_symbol(i);
  std::string eq;
  write_term(q->body.lhs, vars, eq);
  eq += q->body.positive() ? " = " : " != ";
  write_term(q->body.rhs, vars, eq);
  return eq;
}

inline std::string write_problem(const Problem& p) {
  for (const auto& a : p.axioms)
    if (!a.eq.universal()) throw Error("axiom '" + a.name + "' is not universally quantified");
  if (!p.conjecture.eq.universal()) throw Error("conjecture is not universally quantified");
  std::string out = "% " + p.id + " (" + to_string(p.variant) + ")\n";
  std::set<std::string> used;
  auto unique = [&](std::string n) {
    std::string base = n;
    for (int k = 2; !used.insert(n).second; ++k) n = base + "_" + std::to_string(k);
    return n;
  };
  for (const auto& a : p.axioms)
    out += "fof(" + unique(formula_name(a.name)) + ", axiom, " + formula_text(a.eq) + ").\n";
  out += "fof(" + unique(formula_name(p.conjecture.name.empty() ? "goal" : p.conjecture.name)) + ", conjecture, " +
         formula_text(p.conjecture.eq) + ").\n";
  return out;
}

}  // namespace eqmin::tptp

namespace eqmin {

/// TPTP text of a problem: one axiom formula per axiom, one conjecture.
inline std::string write_tptp(const Problem& p) { return tptp::write_problem(p); }

inline Problem read_tptp(std::string_view text, const std::string& id = "problem") {
  return tptp::read_problem(text, id);
}

}  // namespace eqmin
