#pragma once

// Built-in provers. `builtin_search` finds a shortest rewrite chain between
// the two sides of a goal; `builtin_saturate` saturates the axioms with
// superposition for a few levels and reports a refutation in TSTP form.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "eqmin/calculus.hpp"
#include "eqmin/proof.hpp"
#include "eqmin/proof_io.hpp"
#include "eqmin/term.hpp"

namespace eqmin {

struct SearchLimits {
  std::size_t max_links = 8;
  std::size_t max_nodes = 200000;
  std::size_t max_term_size = 40;
};

/// One rewrite of a ground term, `rule` indexing the rule list.
struct RewriteMove {
  Term from;
  std::size_t rule;
  Direction dir;
  Position pos;
  Term to;
};

struct ValleyResult {
  std::optional<std::vector<RewriteMove>> left;   // lhs →* meeting point
  std::optional<std::vector<RewriteMove>> right;  // rhs →* meeting point
  bool hit_limit = false;                         // node or size limit reached

  bool found() const { return left.has_value(); }
  std::size_t links() const { return left ? left->size() + right->size() : 0; }
};

/// A rewrite direction is usable when its source is not a variable and its
/// target introduces no new variables, so ground terms stay ground.
inline bool admissible(const Equation& rule, Direction dir) {
  if (rule.source(dir).is_var()) return false;
  auto src = vars_of(rule.source(dir));
  for (const auto& v : vars_of(rule.target(dir)))
    if (!src.count(v)) return false;
  return true;
}

/// Every single rewrite of a ground term, in a fixed order.
inline std::vector<RewriteMove> ground_rewrites(const Term& t, const std::vector<Equation>& rules,
                                                std::size_t max_term_size = std::numeric_limits<std::size_t>::max()) {
  std::vector<RewriteMove> out;
  for (const Position& p : positions(t)) {
    const Term sub = subterm_at(t, p);
    for (std::size_t r = 0; r < rules.size(); ++r) {
      for (Direction dir : {Direction::LeftToRight, Direction::RightToLeft}) {
        if (!admissible(rules[r], dir)) continue;
        auto m = match_term(rules[r].source(dir), sub);
        if (!m) continue;
        Term next = replace_at(t, p, substitute(rules[r].target(dir), *m));
        if (next == t || next.size() > max_term_size) continue;
        out.push_back({t, r, dir, p, next});
      }
    }
  }
  return out;
}

namespace detail {

struct SearchNode {
  std::optional<RewriteMove> via;  // absent for the root
  std::size_t dist = 0;
};

struct SearchSide {
  std::unordered_map<Term, SearchNode> seen;
  std::vector<Term> frontier;
  std::size_t depth = 0;

  explicit SearchSide(const Term& root) {
    seen[root] = {};
    frontier.push_back(root);
  }

  std::vector<RewriteMove> path_to(const Term& t) const {
    std::vector<RewriteMove> out;
    Term cur = t;
    for (;;) {
      const SearchNode& n = seen.at(cur);
      if (!n.via) break;
      out.push_back(*n.via);
      cur = n.via->from;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }
};

}  // namespace detail

/// Shortest valley lhs →* m ←* rhs over ground terms, at most `max_links`
/// rewrites in total. Both sides are searched breadth-first; an undiscovered
/// meeting point costs at least one more than the shallower side's depth,
/// which bounds when the search may stop.
inline ValleyResult valley_search(const Term& lhs, const Term& rhs, const std::vector<Equation>& rules,
                                  const SearchLimits& limits) {
  ValleyResult result;
  if (lhs == rhs) {
    result.left.emplace();
    result.right.emplace();
    return result;
  }
  detail::SearchSide a(lhs), b(rhs);
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::size_t best = none;
  std::optional<Term> meet;
  for (;;) {
    std::size_t lb_a = a.frontier.empty() ? none : a.depth + 1;
    std::size_t lb_b = b.frontier.empty() ? none : b.depth + 1;
    std::size_t lower = std::min(lb_a, lb_b);
    if (lower == none || lower >= best || lower > limits.max_links) break;
    bool grow_a = lb_a < lb_b || (lb_a == lb_b && a.frontier.size() <= b.frontier.size());
    detail::SearchSide& s = grow_a ? a : b;
    detail::SearchSide& other = grow_a ? b : a;
    std::vector<Term> next;
    for (const Term& t : s.frontier) {
      for (RewriteMove& mv : ground_rewrites(t, rules, limits.max_term_size)) {
        if (s.seen.count(mv.to)) continue;
        Term to = mv.to;
        s.seen[to] = {std::move(mv), s.depth + 1};
        next.push_back(to);
        auto hit = other.seen.find(to);
        if (hit != other.seen.end() && s.depth + 1 + hit->second.dist < best) {
          best = s.depth + 1 + hit->second.dist;
          meet = to;
        }
        if (a.seen.size() + b.seen.size() > limits.max_nodes) {
          result.hit_limit = true;
          break;
        }
      }
      if (result.hit_limit) break;
    }
    s.depth += 1;
    s.frontier = std::move(next);
    if (result.hit_limit) break;
  }
  // a meeting point found before the limit is still a valid chain, but only
  // reported when its optimality is established
  if (meet && best <= limits.max_links && !result.hit_limit) {
    result.left = a.path_to(*meet);
    result.right = b.path_to(*meet);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Chain prover

namespace detail {

inline Term freeze(const Term& t) {
  if (t.is_var()) return Term::constant("#" + t.name());
  if (!t.is_app()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(freeze(a));
  return Term::app(t.name(), std::move(args));
}

inline Term unfreeze(const Term& t) {
  if (t.is_constant()) return t.name().size() > 1 && t.name()[0] == '#' ? Term::var(t.name().substr(1)) : t;
  if (!t.is_app()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(unfreeze(a));
  return Term::app(t.name(), std::move(args));
}

inline ProofStep axiom_step(const std::string& id, const NamedEquation& ax) {
  ProofStep s;
  s.id = id;
  s.statement = ax.eq;
  s.rule = RuleKind::Axiom;
  s.rule_name = "axiom";
  s.name = ax.name;
  return s;
}

}  // namespace detail

struct ChainSearchResult {
  std::optional<DirectProof> proof;
  bool hit_limit = false;
};

/// Shortest chain proof of the problem's conjecture, or nothing within the
/// limits. Conjecture variables are treated as fresh constants.
inline ChainSearchResult builtin_chain_search(const Problem& p, const SearchLimits& limits) {
  ChainSearchResult out;
  const QuantifiedEquation& conj = p.conjecture.eq;
  if (!conj.universal() || !conj.body.positive()) return out;
  for (std::size_t i = 0; i < p.axioms.size(); ++i) {
    const auto& ax = p.axioms[i];
    if (ax.eq.universal() && ax.eq.body.positive() &&
        (alpha_equal(ax.eq, conj) || is_instance_of(conj.body, ax.eq.body))) {
      out.proof = DirectProof{{detail::axiom_step("A1", ax)}, Origin::Builtin};
      return out;
    }
  }
  std::vector<Equation> rules;
  std::vector<std::size_t> axiom_of;
  for (std::size_t i = 0; i < p.axioms.size(); ++i) {
    const auto& ax = p.axioms[i];
    if (!ax.eq.universal() || !ax.eq.body.positive()) continue;
    rules.push_back(ax.eq.body);
    axiom_of.push_back(i);
  }
  ValleyResult v = valley_search(detail::freeze(conj.body.lhs), detail::freeze(conj.body.rhs), rules, limits);
  out.hit_limit = v.hit_limit;
  if (!v.found()) return out;

  std::map<std::size_t, std::string> ids;  // axiom index -> step id, in axiom order
  for (const auto* side : {&*v.left, &*v.right})
    for (const auto& mv : *side) ids[axiom_of[mv.rule]];
  std::size_t n = 0;
  DirectProof proof;
  proof.origin = Origin::Builtin;
  for (auto& [ax, id] : ids) {
    id = "A" + std::to_string(++n);
    proof.steps.push_back(detail::axiom_step(id, p.axioms[ax]));
  }
  ProofStep goal;
  goal.id = "C";
  goal.statement = conj;
  goal.rule = RuleKind::Chain;
  goal.rule_name = "chain";
  goal.name = p.conjecture.name;
  auto cite = [&](std::size_t rule) {
    const std::string& id = ids.at(axiom_of[rule]);
    if (std::find(goal.premises.begin(), goal.premises.end(), id) == goal.premises.end()) goal.premises.push_back(id);
    return id;
  };
  for (const auto& mv : *v.left)
    goal.chain.push_back({detail::unfreeze(mv.from), cite(mv.rule), mv.dir, mv.pos, detail::unfreeze(mv.to)});
  for (auto it = v.right->rbegin(); it != v.right->rend(); ++it)
    goal.chain.push_back(
        {detail::unfreeze(it->to), cite(it->rule), reversed(it->dir), it->pos, detail::unfreeze(it->from)});
  proof.steps.push_back(std::move(goal));
  out.proof = std::move(proof);
  return out;
}

inline std::optional<DirectProof> builtin_search(const Problem& p, std::size_t bound) {
  SearchLimits limits;
  limits.max_links = bound;
  return builtin_chain_search(p, limits).proof;
}

// ---------------------------------------------------------------------------
// Saturation engine

struct SaturationLimits {
  std::size_t max_levels = 3;
  std::size_t max_clauses = 300;
  std::size_t max_term_size = 13;
  SearchLimits valley{4, 20000, 40};
};

struct SaturationResult {
  std::optional<std::string> tstp;  // refutation text, when found
  bool hit_limit = false;
};

namespace detail {

struct SatClause {
  std::string id;
  Equation eq;
  RuleKind rule;
  std::vector<std::string> premises;
  std::string name;
};

inline std::vector<Equation> single_superpositions(const Equation& rule, const Equation& target) {
  std::vector<Equation> out;
  Equation r = rename_apart(rule, vars_of(target));
  for (std::size_t s = 0; s < 2; ++s) {
    for (const Position& inner : positions(side(target, s))) {
      Position pos = inner;
      pos.path.insert(pos.path.begin(), s);
      if (try_subterm_at(target, pos)->is_var()) continue;
      for (Direction dir : {Direction::LeftToRight, Direction::RightToLeft}) {
        if (r.source(dir).is_var()) continue;
        try {
          out.push_back(apply_superposition(r, target, pos, dir));
        } catch (const NotUnifiable&) {
        }
      }
    }
  }
  return out;
}

// Renames variables to x, y, z, ... so that derived clauses print stably.
inline Equation tidy(const Equation& e) {
  std::map<std::string, std::string> names;
  std::vector<std::string> order = vars_in_order(e);
  for (std::size_t i = 0; i < order.size(); ++i) names[order[i]] = variable_name(i);
  return substitute(e, renaming(names));
}

}  // namespace detail

/// Saturates the axioms level by level with superposition. After each level
/// the skolemized goal is closed, if possible, by a short valley of rewrites
/// with the clauses so far; each rewrite becomes a superposition into the
/// negated conjecture and the final t ≠ t is removed by equality resolution.
inline SaturationResult builtin_saturate(const Problem& p, const SaturationLimits& limits) {
  SaturationResult out;
  const QuantifiedEquation& conj = p.conjecture.eq;
  if (!conj.universal() || !conj.body.positive()) return out;
  for (const auto& ax : p.axioms)
    if (!ax.eq.universal() || !ax.eq.body.positive()) return out;

  Substitution sk;
  std::vector<std::string> cvars = vars_in_order(conj.body);
  for (std::size_t i = 0; i < cvars.size(); ++i) sk.set(cvars[i], Term::constant("sK" + std::to_string(i), true));
  const Term s = substitute(conj.body.lhs, sk);
  const Term t = substitute(conj.body.rhs, sk);

  std::vector<detail::SatClause> clauses;
  std::set<std::string> keys;
  for (std::size_t i = 0; i < p.axioms.size(); ++i) {
    if (!keys.insert(canonical_key(p.axioms[i].eq)).second) continue;
    clauses.push_back({"a" + std::to_string(i + 1), p.axioms[i].eq.body, RuleKind::Axiom, {}, p.axioms[i].name});
  }

  std::size_t old_count = 0;
  for (std::size_t level = 0;; ++level) {
    std::vector<Equation> rules;
    for (const auto& c : clauses) rules.push_back(c.eq);
    ValleyResult v = valley_search(s, t, rules, limits.valley);
    out.hit_limit = out.hit_limit || v.hit_limit;
    if (v.found()) {
      // used clauses and their ancestors, in derivation order
      std::set<std::string> used;
      std::vector<std::string> work;
      for (const auto* side : {&*v.left, &*v.right})
        for (const auto& mv : *side) work.push_back(clauses[mv.rule].id);
      std::map<std::string, const detail::SatClause*> by_id;
      for (const auto& c : clauses) by_id[c.id] = &c;
      while (!work.empty()) {
        std::string id = work.back();
        work.pop_back();
        if (!used.insert(id).second) continue;
        for (const auto& pr : by_id.at(id)->premises) work.push_back(pr);
      }
      std::vector<ProofStep> steps;
      for (const auto& c : clauses) {
        if (!used.count(c.id)) continue;
        ProofStep st;
        st.id = c.id;
        st.statement = universal_closure(c.eq);
        st.rule = c.rule;
        st.rule_name = to_string(c.rule);
        st.premises = c.premises;
        st.name = c.name;
        steps.push_back(std::move(st));
      }
      ProofStep nc;
      nc.id = "n0";
      nc.rule = RuleKind::NegatedConjecture;
      nc.statement = universal_closure(Equation{s, t, Polarity::Disequal});
      Equation d = nc.statement->body;
      steps.push_back(nc);
      std::string prev = "n0";
      std::size_t k = 0;
      for (std::size_t side_index = 0; side_index < 2; ++side_index) {
        for (const auto& mv : side_index == 0 ? *v.left : *v.right) {
          Position pos = mv.pos;
          pos.path.insert(pos.path.begin(), side_index);
          d = apply_superposition(clauses[mv.rule].eq, d, pos, mv.dir);
          if (!(side(d, side_index) == mv.to)) throw Error("superposition does not reproduce the rewrite");
          ProofStep st;
          st.id = "n" + std::to_string(++k);
          st.statement = universal_closure(d);
          st.rule = RuleKind::Superposition;
          st.rule_name = "superposition";
          st.premises = {clauses[mv.rule].id, prev};
          prev = st.id;
          steps.push_back(std::move(st));
        }
      }
      ProofStep bottom;
      bottom.id = "n" + std::to_string(++k);
      bottom.rule = RuleKind::EqualityResolution;
      bottom.premises = {prev};
      steps.push_back(std::move(bottom));
      out.tstp = write_tstp(steps, p);
      return out;
    }
    if (level == limits.max_levels) {
      out.hit_limit = true;
      return out;
    }

    std::size_t before = clauses.size();
    for (std::size_t i = 0; i < before && clauses.size() < limits.max_clauses; ++i) {
      for (std::size_t j = 0; j < before && clauses.size() < limits.max_clauses; ++j) {
        if (i < old_count && j < old_count) continue;
        for (const Equation& c : detail::single_superpositions(clauses[i].eq, clauses[j].eq)) {
          if (c.trivial()) continue;
          if (c.lhs.size() + c.rhs.size() > limits.max_term_size) {
            out.hit_limit = true;  // dropped, so not saturated
            continue;
          }
          Equation e = detail::tidy(c);
          if (!keys.insert(canonical_key(e)).second) continue;
          clauses.push_back({"c" + std::to_string(clauses.size() + 1), e, RuleKind::Superposition,
                             {clauses[i].id, clauses[j].id}, ""});
          if (clauses.size() >= limits.max_clauses) {
            out.hit_limit = true;
            break;
          }
        }
      }
    }
    old_count = before;
    if (clauses.size() == before) return out;  // saturated
  }
}

}  // namespace eqmin
