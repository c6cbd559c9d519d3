#pragma once

// First-order terms over a signature with one distinguished binary operation
// (the magma operation), plus substitutions, unification, matching and
// rewriting. Everything here is an immutable value and safe to share across
// threads.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eqmin/errors.hpp"

namespace eqmin {

/// Symbol of the magma operation. Always binary.
inline const std::string kMagmaOp = "\xE2\x97\x87";  // U+25C7 WHITE DIAMOND

enum class TermKind : std::uint8_t { Variable, Constant, App };

class Term {
 public:
  /// The empty constant; a placeholder for default-constructed aggregates.
  Term() : node_(empty_node()) {}

  static Term var(std::string name) { return Term(make_node(TermKind::Variable, std::move(name), false, {})); }

  static Term constant(std::string name, bool skolem = false) {
    return Term(make_node(TermKind::Constant, std::move(name), skolem, {}));
  }

  static Term app(std::string op, std::vector<Term> args) {
    if (args.empty()) return constant(std::move(op));
    if (op == kMagmaOp && args.size() != 2) throw Error("the magma operation takes exactly two arguments");
    return Term(make_node(TermKind::App, std::move(op), false, std::move(args)));
  }

  static Term magma(Term lhs, Term rhs) { return app(kMagmaOp, {std::move(lhs), std::move(rhs)}); }

  TermKind kind() const noexcept { return node_->kind; }
  bool is_var() const noexcept { return node_->kind == TermKind::Variable; }
  bool is_constant() const noexcept { return node_->kind == TermKind::Constant; }
  bool is_app() const noexcept { return node_->kind == TermKind::App; }
  bool is_magma() const noexcept { return is_app() && node_->name == kMagmaOp; }
  bool skolem() const noexcept { return node_->skolem; }

  /// Variable name, constant name, or function symbol.
  const std::string& name() const noexcept { return node_->name; }
  std::span<const Term> args() const noexcept { return node_->args; }
  const Term& arg(std::size_t i) const { return node_->args.at(i); }
  std::size_t arity() const noexcept { return node_->args.size(); }

  std::size_t hash() const noexcept { return node_->hash; }
  /// Number of symbol occurrences.
  std::size_t size() const noexcept { return node_->size; }
  std::size_t depth() const noexcept { return node_->depth; }
  bool ground() const noexcept { return node_->ground; }

  friend bool operator==(const Term& a, const Term& b) noexcept {
    if (a.node_ == b.node_) return true;
    if (a.node_->hash != b.node_->hash || a.node_->kind != b.node_->kind || a.node_->size != b.node_->size)
      return false;
    if (a.node_->name != b.node_->name || a.node_->args.size() != b.node_->args.size()) return false;
    if (a.node_->kind == TermKind::Constant && a.node_->skolem != b.node_->skolem) return false;
    for (std::size_t i = 0; i < a.node_->args.size(); ++i)
      if (!(a.node_->args[i] == b.node_->args[i])) return false;
    return true;
  }

  /// Structural total order; used wherever deterministic iteration matters.
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (auto c = a.node_->kind <=> b.node_->kind; c != 0) return c;
    if (auto c = a.node_->name.compare(b.node_->name); c != 0) return c <=> 0;
    if (auto c = a.node_->args.size() <=> b.node_->args.size(); c != 0) return c;
    for (std::size_t i = 0; i < a.node_->args.size(); ++i)
      if (auto c = a.node_->args[i] <=> b.node_->args[i]; c != 0) return c;
    return a.node_->skolem <=> b.node_->skolem;
  }

 private:
  struct Node {
    TermKind kind;
    std::string name;
    bool skolem;
    std::vector<Term> args;
    std::size_t hash;
    std::size_t size;
    std::size_t depth;
    bool ground;
  };

  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static const std::shared_ptr<const Node>& empty_node() {
    static const std::shared_ptr<const Node> n = make_node(TermKind::Constant, "", false, {});
    return n;
  }

  static std::shared_ptr<const Node> make_node(TermKind kind, std::string name, bool skolem, std::vector<Term> args) {
    std::size_t h = std::hash<std::string>{}(name) * 31u + static_cast<std::size_t>(kind);
    std::size_t size = 1;
    std::size_t depth = 0;
    bool ground = kind != TermKind::Variable;
    for (const Term& a : args) {
      h = h * 1000003u ^ a.hash();
      size += a.size();
      depth = std::max(depth, a.depth() + 1);
      ground = ground && a.ground();
    }
    return std::make_shared<const Node>(
        Node{kind, std::move(name), skolem, std::move(args), h, size, depth, ground});
  }

  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

// ---------------------------------------------------------------------------
// Positions

/// Path of argument indices from the root; empty is the root itself.
struct Position {
  std::vector<std::size_t> path;

  Position() = default;
  Position(std::initializer_list<std::size_t> p) : path(p) {}
  explicit Position(std::vector<std::size_t> p) : path(std::move(p)) {}

  bool is_root() const noexcept { return path.empty(); }
  Position child(std::size_t i) const {
    Position p = *this;
    p.path.push_back(i);
    return p;
  }
  bool is_prefix_of(const Position& other) const {
    return path.size() <= other.path.size() && std::equal(path.begin(), path.end(), other.path.begin());
  }

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

inline std::string to_string(const Position& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.path.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(p.path[i]);
  }
  return s + "]";
}

inline std::optional<Term> try_subterm_at(const Term& t, const Position& p) {
  const Term* cur = &t;
  for (std::size_t i : p.path) {
    if (i >= cur->arity()) return std::nullopt;
    cur = &cur->arg(i);
  }
  return *cur;
}

inline Term subterm_at(const Term& t, const Position& p) {
  auto s = try_subterm_at(t, p);
  if (!s) throw BadPosition("position " + to_string(p) + " does not exist in the term");
  return *s;
}

namespace detail {
inline Term replace_at(const Term& t, const std::vector<std::size_t>& path, std::size_t depth, const Term& with) {
  if (depth == path.size()) return with;
  std::size_t i = path[depth];
  if (i >= t.arity()) throw BadPosition("position does not exist in the term");
  std::vector<Term> args(t.args().begin(), t.args().end());
  args[i] = replace_at(args[i], path, depth + 1, with);
  return Term::app(t.name(), std::move(args));
}
}  // namespace detail

inline Term replace_at(const Term& t, const Position& p, const Term& with) {
  return detail::replace_at(t, p.path, 0, with);
}

/// All positions in pre-order (root first, arguments left to right).
inline std::vector<Position> positions(const Term& t) {
  std::vector<Position> out;
  std::function<void(const Term&, Position&)> walk = [&](const Term& s, Position& p) {
    out.push_back(p);
    for (std::size_t i = 0; i < s.arity(); ++i) {
      p.path.push_back(i);
      walk(s.arg(i), p);
      p.path.pop_back();
    }
  };
  Position root;
  walk(t, root);
  return out;
}

// ---------------------------------------------------------------------------
// Variables and naming

inline void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.ground()) return;
  if (t.is_var()) {
    out.insert(t.name());
    return;
  }
  for (const Term& a : t.args()) collect_vars(a, out);
}

inline std::set<std::string> vars_of(const Term& t) {
  std::set<std::string> out;
  collect_vars(t, out);
  return out;
}

/// Variables in order of first occurrence (pre-order, left to right).
inline void vars_in_order(const Term& t, std::vector<std::string>& out) {
  if (t.ground()) return;
  if (t.is_var()) {
    if (std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
    return;
  }
  for (const Term& a : t.args()) vars_in_order(a, out);
}

inline bool occurs(const std::string& var, const Term& t) {
  if (t.ground()) return false;
  if (t.is_var()) return t.name() == var;
  return std::any_of(t.args().begin(), t.args().end(), [&](const Term& a) { return occurs(var, a); });
}

/// Presentation order for variable names: x, y, z, w, v, u, then x1, x2, ...
inline std::string variable_name(std::size_t index) {
  static constexpr const char* kFirst[] = {"x", "y", "z", "w", "v", "u"};
  if (index < 6) return kFirst[index];
  return "x" + std::to_string(index - 5);
}

/// First name in presentation order not contained in `used`.
inline std::string first_unused_variable_name(const std::set<std::string>& used) {
  for (std::size_t i = 0;; ++i) {
    std::string n = variable_name(i);
    if (!used.count(n)) return n;
  }
}

/// Deterministic fresh-name source. The counter is explicit state owned by
/// the caller; two supplies with equal counters produce equal names.
struct NameSupply {
  std::string prefix = "_v";
  std::size_t counter = 0;

  std::string fresh(const std::set<std::string>& avoid = {}) {
    for (;;) {
      std::string n = prefix + std::to_string(counter++);
      if (!avoid.count(n)) return n;
    }
  }
};

// ---------------------------------------------------------------------------
// Substitutions

class Substitution {
 public:
  Substitution() = default;
  Substitution(std::initializer_list<std::pair<const std::string, Term>> init) : bindings_(init) {}

  bool empty() const noexcept { return bindings_.empty(); }
  std::size_t size() const noexcept { return bindings_.size(); }
  const std::map<std::string, Term>& bindings() const noexcept { return bindings_; }

  const Term* lookup(const std::string& var) const {
    auto it = bindings_.find(var);
    return it == bindings_.end() ? nullptr : &it->second;
  }
  bool binds(const std::string& var) const { return bindings_.count(var) != 0; }

  /// Adds a binding without composing; callers keep the map idempotent.
  void set(const std::string& var, Term t) { bindings_.insert_or_assign(var, std::move(t)); }

  friend bool operator==(const Substitution& a, const Substitution& b) { return a.bindings_ == b.bindings_; }

 private:
  std::map<std::string, Term> bindings_;
};

/// Simultaneous replacement of every variable in dom(sigma).
inline Term substitute(const Term& t, const Substitution& sigma) {
  if (t.ground() || sigma.empty()) return t;
  if (t.is_var()) {
    const Term* b = sigma.lookup(t.name());
    return b ? *b : t;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(substitute(a, sigma));
    changed = changed || !(args.back() == a);
  }
  return changed ? Term::app(t.name(), std::move(args)) : t;
}

inline Substitution renaming(const std::map<std::string, std::string>& names) {
  Substitution s;
  for (const auto& [from, to] : names) s.set(from, Term::var(to));
  return s;
}

namespace detail {

// Binds var to t (t already normalised under sigma) and keeps sigma idempotent.
inline void bind_idempotent(Substitution& sigma, const std::string& var, const Term& t) {
  Substitution single;
  single.set(var, t);
  Substitution next;
  for (const auto& [v, b] : sigma.bindings()) next.set(v, substitute(b, single));
  next.set(var, t);
  sigma = std::move(next);
}

inline bool unify_into(std::vector<std::pair<Term, Term>> work, Substitution& sigma) {
  while (!work.empty()) {
    auto [a, b] = std::move(work.back());
    work.pop_back();
    a = substitute(a, sigma);
    b = substitute(b, sigma);
    if (a == b) continue;
    if (!a.is_var() && b.is_var()) std::swap(a, b);
    if (a.is_var()) {
      if (occurs(a.name(), b)) return false;
      bind_idempotent(sigma, a.name(), b);
      continue;
    }
    if (a.kind() != b.kind() || a.name() != b.name() || a.arity() != b.arity()) return false;
    for (std::size_t i = a.arity(); i-- > 0;) work.emplace_back(a.arg(i), b.arg(i));
  }
  return true;
}

inline bool match_into(const Term& pattern, const Term& subject, Substitution& sigma) {
  if (pattern.is_var()) {
    if (const Term* b = sigma.lookup(pattern.name())) return *b == subject;
    sigma.set(pattern.name(), subject);
    return true;
  }
  if (pattern.ground()) return pattern == subject;
  if (pattern.kind() != subject.kind() || pattern.name() != subject.name() || pattern.arity() != subject.arity())
    return false;
  for (std::size_t i = 0; i < pattern.arity(); ++i)
    if (!match_into(pattern.arg(i), subject.arg(i), sigma)) return false;
  return true;
}

}  // namespace detail

/// Most general unifier; the result is idempotent.
inline std::optional<Substitution> unify(const Term& t, const Term& u) {
  Substitution sigma;
  if (!detail::unify_into({{t, u}}, sigma)) return std::nullopt;
  return sigma;
}

/// Simultaneous unifier of several pairs.
inline std::optional<Substitution> unify_all(const std::vector<std::pair<Term, Term>>& pairs) {
  Substitution sigma;
  std::vector<std::pair<Term, Term>> work(pairs.rbegin(), pairs.rend());
  if (!detail::unify_into(std::move(work), sigma)) return std::nullopt;
  return sigma;
}

/// One-sided unification: binds only variables of `pattern`; variables of
/// `subject` are rigid.
inline std::optional<Substitution> match_term(const Term& pattern, const Term& subject) {
  Substitution sigma;
  if (!detail::match_into(pattern, subject, sigma)) return std::nullopt;
  return sigma;
}

/// Extends `sigma` so that it matches every pattern to its subject.
inline bool match_all(const std::vector<std::pair<Term, Term>>& pairs, Substitution& sigma) {
  for (const auto& [p, s] : pairs)
    if (!detail::match_into(p, s, sigma)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Equations

enum class Polarity : std::uint8_t { Equal, Disequal };
enum class Direction : std::uint8_t { LeftToRight, RightToLeft };

inline Direction reversed(Direction d) {
  return d == Direction::LeftToRight ? Direction::RightToLeft : Direction::LeftToRight;
}

struct Equation {
  Term lhs;
  Term rhs;
  Polarity polarity = Polarity::Equal;

  bool positive() const noexcept { return polarity == Polarity::Equal; }
  bool trivial() const { return lhs == rhs; }
  Equation flipped() const { return {rhs, lhs, polarity}; }
  Equation negated() const {
    return {lhs, rhs, polarity == Polarity::Equal ? Polarity::Disequal : Polarity::Equal};
  }
  const Term& source(Direction d) const { return d == Direction::LeftToRight ? lhs : rhs; }
  const Term& target(Direction d) const { return d == Direction::LeftToRight ? rhs : lhs; }

  friend bool operator==(const Equation&, const Equation&) = default;
};

inline Equation substitute(const Equation& e, const Substitution& sigma) {
  return {substitute(e.lhs, sigma), substitute(e.rhs, sigma), e.polarity};
}

inline std::set<std::string> vars_of(const Equation& e) {
  std::set<std::string> out;
  collect_vars(e.lhs, out);
  collect_vars(e.rhs, out);
  return out;
}

inline std::vector<std::string> vars_in_order(const Equation& e) {
  std::vector<std::string> out;
  vars_in_order(e.lhs, out);
  vars_in_order(e.rhs, out);
  return out;
}

/// Positions inside an equation: the first index selects the side (0 = lhs,
/// 1 = rhs), the rest is a path inside that side.
inline const Term& side(const Equation& e, std::size_t s) { return s == 0 ? e.lhs : e.rhs; }

inline std::optional<Term> try_subterm_at(const Equation& e, const Position& p) {
  if (p.path.empty() || p.path[0] > 1) return std::nullopt;
  return try_subterm_at(side(e, p.path[0]), Position(std::vector<std::size_t>(p.path.begin() + 1, p.path.end())));
}

inline Equation replace_at(const Equation& e, const Position& p, const Term& with) {
  if (p.path.empty() || p.path[0] > 1) throw BadPosition("equation positions start with side index 0 or 1");
  Position inner(std::vector<std::size_t>(p.path.begin() + 1, p.path.end()));
  Equation out = e;
  (p.path[0] == 0 ? out.lhs : out.rhs) = replace_at(side(e, p.path[0]), inner, with);
  return out;
}

enum class Quantifier : std::uint8_t { Forall, Exists };

struct QuantifierBinding {
  Quantifier quantifier;
  std::string var;
  friend bool operator==(const QuantifierBinding&, const QuantifierBinding&) = default;
};

/// An equation with an explicit quantifier prefix. Free variables of the body
/// that are missing from the prefix are read as universally quantified.
struct QuantifiedEquation {
  std::vector<QuantifierBinding> prefix;
  Equation body;

  bool universal() const {
    return std::all_of(prefix.begin(), prefix.end(),
                       [](const QuantifierBinding& b) { return b.quantifier == Quantifier::Forall; });
  }
  Quantifier quantifier_of(const std::string& var) const {
    for (const auto& b : prefix)
      if (b.var == var) return b.quantifier;
    return Quantifier::Forall;
  }

  friend bool operator==(const QuantifiedEquation&, const QuantifiedEquation&) = default;
};

/// Universal closure, variables bound in order of first occurrence.
inline QuantifiedEquation universal_closure(const Equation& e) {
  QuantifiedEquation q;
  q.body = e;
  for (auto& v : vars_in_order(e)) q.prefix.push_back({Quantifier::Forall, v});
  return q;
}

/// Drops prefix entries for variables absent from the body and appends
/// universal entries for free variables.
inline QuantifiedEquation normalize_prefix(QuantifiedEquation q) {
  auto vs = vars_of(q.body);
  std::vector<QuantifierBinding> prefix;
  std::set<std::string> seen;
  for (const auto& b : q.prefix)
    if (vs.count(b.var) && seen.insert(b.var).second) prefix.push_back(b);
  for (const auto& v : vars_in_order(q.body))
    if (!seen.count(v)) {
      prefix.push_back({Quantifier::Forall, v});
      seen.insert(v);
    }
  q.prefix = std::move(prefix);
  return q;
}

inline QuantifiedEquation rename(const QuantifiedEquation& q, const std::map<std::string, std::string>& names) {
  QuantifiedEquation out;
  out.body = substitute(q.body, renaming(names));
  for (const auto& b : q.prefix) {
    auto it = names.find(b.var);
    out.prefix.push_back({b.quantifier, it == names.end() ? b.var : it->second});
  }
  return out;
}

namespace detail {

inline void canonical_term_string(const Term& t, std::map<std::string, std::size_t>& vars, std::string& out) {
  switch (t.kind()) {
    case TermKind::Variable: {
      auto [it, inserted] = vars.try_emplace(t.name(), vars.size());
      out += "?";
      out += std::to_string(it->second);
      return;
    }
    case TermKind::Constant:
      out += t.skolem() ? "!" : "'";
      out += t.name();
      return;
    case TermKind::App:
      out += t.name();
      out += "(";
      for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ",";
        canonical_term_string(t.arg(i), vars, out);
      }
      out += ")";
      return;
  }
}

inline std::string canonical_orientation(const QuantifiedEquation& q, const Term& a, const Term& b) {
  std::map<std::string, std::size_t> vars;
  std::string body;
  canonical_term_string(a, vars, body);
  body += q.body.positive() ? " = " : " != ";
  canonical_term_string(b, vars, body);
  // Quantifier blocks in prefix order; within a block the order is irrelevant.
  std::vector<std::pair<Quantifier, std::set<std::size_t>>> blocks;
  std::set<std::string> seen;
  for (const auto& bind : q.prefix) {
    auto it = vars.find(bind.var);
    if (it == vars.end() || !seen.insert(bind.var).second) continue;
    if (blocks.empty() || blocks.back().first != bind.quantifier) blocks.push_back({bind.quantifier, {}});
    blocks.back().second.insert(it->second);
  }
  // free variables are implicitly universal and outermost
  std::set<std::size_t> free_vars;
  for (const auto& [name, idx] : vars)
    if (!seen.count(name)) free_vars.insert(idx);
  if (!free_vars.empty()) {
    if (!blocks.empty() && blocks.front().first == Quantifier::Forall)
      blocks.front().second.insert(free_vars.begin(), free_vars.end());
    else
      blocks.insert(blocks.begin(), {Quantifier::Forall, free_vars});
  }
  std::string prefix;
  for (const auto& [quant, members] : blocks) {
    prefix += quant == Quantifier::Forall ? "A" : "E";
    for (std::size_t m : members) prefix += std::to_string(m) + ",";
    prefix += ".";
  }
  return prefix + "|" + body;
}

}  // namespace detail

/// Canonical key of a quantified equation: variables renamed by first
/// occurrence, computed for both orientations of the body, and the smaller
/// string kept. Two equations are alpha-equal iff their keys coincide.
inline std::string canonical_key(const QuantifiedEquation& q) {
  std::string a = detail::canonical_orientation(q, q.body.lhs, q.body.rhs);
  std::string b = detail::canonical_orientation(q, q.body.rhs, q.body.lhs);
  return std::min(a, b);
}

inline std::string canonical_key(const Equation& e) { return canonical_key(universal_closure(e)); }

/// Equality up to a bijective renaming of variables, with the two sides of
/// the equation read as an unordered pair.
inline bool alpha_equal(const QuantifiedEquation& a, const QuantifiedEquation& b) {
  return canonical_key(a) == canonical_key(b);
}

/// Renames the variables of `q` to x, y, z, w, v, u, x1, ... in order of
/// first occurrence, keeping the orientation of the body.
inline QuantifiedEquation presentation_form(const QuantifiedEquation& q) {
  QuantifiedEquation n = normalize_prefix(q);
  std::map<std::string, std::string> names;
  std::size_t next = 0;
  for (const auto& v : vars_in_order(n.body)) names[v] = variable_name(next++);
  QuantifiedEquation out = rename(n, names);
  // order prefix by first occurrence within each quantifier block
  std::vector<QuantifierBinding> prefix;
  std::vector<std::string> order = vars_in_order(out.body);
  std::size_t i = 0;
  while (i < out.prefix.size()) {
    std::size_t j = i;
    while (j < out.prefix.size() && out.prefix[j].quantifier == out.prefix[i].quantifier) ++j;
    std::vector<QuantifierBinding> block(out.prefix.begin() + i, out.prefix.begin() + j);
    std::sort(block.begin(), block.end(), [&](const QuantifierBinding& x, const QuantifierBinding& y) {
      return std::find(order.begin(), order.end(), x.var) < std::find(order.begin(), order.end(), y.var);
    });
    prefix.insert(prefix.end(), block.begin(), block.end());
    i = j;
  }
  out.prefix = std::move(prefix);
  return out;
}

/// Renames the variables of `e` that clash with `avoid` by appending primes.
inline Equation rename_apart(const Equation& e, const std::set<std::string>& avoid) {
  auto own = vars_of(e);
  std::set<std::string> taken = avoid;
  taken.insert(own.begin(), own.end());
  std::map<std::string, std::string> names;
  for (const auto& v : own) {
    if (!avoid.count(v)) continue;
    std::string n = v + "'";
    while (taken.count(n)) n += "'";
    taken.insert(n);
    names[v] = n;
  }
  if (names.empty()) return e;
  return substitute(e, renaming(names));
}

inline QuantifiedEquation rename_apart(const QuantifiedEquation& q, const std::set<std::string>& avoid) {
  auto own = vars_of(q.body);
  std::set<std::string> taken = avoid;
  taken.insert(own.begin(), own.end());
  std::map<std::string, std::string> names;
  for (const auto& v : own) {
    if (!avoid.count(v)) continue;
    std::string n = v + "'";
    while (taken.count(n)) n += "'";
    taken.insert(n);
    names[v] = n;
  }
  return rename(q, names);
}

// ---------------------------------------------------------------------------
// Rewriting

/// Rewrites the occurrence at `p` using `rule` in direction `dir`. The rule is
/// renamed apart from `t` first; target-side variables not bound by matching
/// stay as (renamed) variables.
inline Term rewrite_at(const Term& t, const Position& p, const Equation& rule, Direction dir) {
  Term sub = subterm_at(t, p);
  Equation r = rename_apart(rule, vars_of(t));
  auto sigma = match_term(r.source(dir), sub);
  if (!sigma) throw NoMatch("rule does not match the subterm at " + to_string(p));
  return replace_at(t, p, substitute(r.target(dir), *sigma));
}

/// Whether `to` is obtained from `from` by one rewrite with `rule` at `p`:
/// the two terms agree outside `p`, and a single instance of the rule maps the
/// subterm of `from` at `p` to the subterm of `to` at `p`. Variables of the
/// terms are rigid.
inline bool is_rewrite_step(const Term& from, const Term& to, const Position& p, const Equation& rule,
                            Direction dir) {
  const Term* a = &from;
  const Term* b = &to;
  for (std::size_t i : p.path) {
    if (a->kind() != TermKind::App || b->kind() != TermKind::App) return false;
    if (a->name() != b->name() || a->arity() != b->arity() || i >= a->arity()) return false;
    for (std::size_t k = 0; k < a->arity(); ++k)
      if (k != i && !(a->arg(k) == b->arg(k))) return false;
    a = &a->arg(i);
    b = &b->arg(i);
  }
  auto avoid = vars_of(from);
  auto more = vars_of(to);
  avoid.insert(more.begin(), more.end());
  Equation r = rename_apart(rule, avoid);
  Substitution sigma;
  return match_all({{r.source(dir), *a}, {r.target(dir), *b}}, sigma);
}

/// Positions at which a single rewrite could turn `from` into `to`: the
/// ancestors of the outermost disagreement, deepest first. When the terms are
/// equal every position is a candidate.
inline std::vector<Position> candidate_rewrite_positions(const Term& from, const Term& to) {
  if (from == to) {
    auto ps = positions(from);
    std::reverse(ps.begin(), ps.end());
    return ps;
  }
  Position p;
  const Term* a = &from;
  const Term* b = &to;
  for (;;) {
    if (a->kind() != TermKind::App || b->kind() != TermKind::App || a->name() != b->name() ||
        a->arity() != b->arity())
      break;
    std::optional<std::size_t> diff;
    bool several = false;
    for (std::size_t k = 0; k < a->arity(); ++k) {
      if (!(a->arg(k) == b->arg(k))) {
        if (diff) several = true;
        diff = k;
      }
    }
    if (several || !diff) break;
    p.path.push_back(*diff);
    a = &a->arg(*diff);
    b = &b->arg(*diff);
  }
  std::vector<Position> out;
  for (std::size_t len = p.path.size() + 1; len-- > 0;)
    out.emplace_back(std::vector<std::size_t>(p.path.begin(), p.path.begin() + static_cast<std::ptrdiff_t>(len)));
  return out;
}

/// Finds a position witnessing `is_rewrite_step`, deepest first.
inline std::optional<Position> find_rewrite_position(const Term& from, const Term& to, const Equation& rule,
                                                     Direction dir) {
  for (const Position& p : candidate_rewrite_positions(from, to))
    if (is_rewrite_step(from, to, p, rule, dir)) return p;
  return std::nullopt;
}

namespace detail {
inline Term rewrite_parallel_renamed(const Term& t, const Equation& r, Direction dir) {
  if (auto sigma = match_term(r.source(dir), t)) return substitute(r.target(dir), *sigma);
  if (!t.is_app()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(rewrite_parallel_renamed(a, r, dir));
    changed = changed || !(args.back() == a);
  }
  return changed ? Term::app(t.name(), std::move(args)) : t;
}
}  // namespace detail

/// Replaces every outermost non-overlapping occurrence matching the rule's
/// source side, each occurrence matched independently, in one pass. Returns
/// `t` unchanged when nothing matches.
inline Term rewrite_parallel(const Term& t, const Equation& rule, Direction dir) {
  Equation r = rename_apart(rule, vars_of(t));
  return detail::rewrite_parallel_renamed(t, r, dir);
}

inline Equation rewrite_parallel(const Equation& e, const Equation& rule, Direction dir) {
  auto avoid = vars_of(e);
  Equation r = rename_apart(rule, avoid);
  return {detail::rewrite_parallel_renamed(e.lhs, r, dir), detail::rewrite_parallel_renamed(e.rhs, r, dir),
          e.polarity};
}

/// Whether `instance` is obtained from `general` by substitution, sides
/// unordered. Variables of `instance` are rigid.
inline bool is_instance_of(const Equation& instance, const Equation& general) {
  if (instance.polarity != general.polarity) return false;
  Equation g = rename_apart(general, vars_of(instance));
  Substitution s1;
  if (match_all({{g.lhs, instance.lhs}, {g.rhs, instance.rhs}}, s1)) return true;
  Substitution s2;
  return match_all({{g.lhs, instance.rhs}, {g.rhs, instance.lhs}}, s2);
}

}  // namespace eqmin

template <>
struct std::hash<eqmin::Term> {
  std::size_t operator()(const eqmin::Term& t) const noexcept { return t.hash(); }
};
