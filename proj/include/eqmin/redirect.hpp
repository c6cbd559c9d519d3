#pragma once

// Turning prover output into direct proofs. A unit-equality refutation is a
// single path of disequations from the negated conjecture to ⊥; reading that
// path backwards, each disequation becomes the negation of its contrapositive
// and the negated conjecture becomes the conjecture.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqmin/errors.hpp"
#include "eqmin/proof.hpp"
#include "eqmin/term.hpp"

namespace eqmin {

namespace detail {

inline void collect_skolems(const Term& t, std::vector<std::string>& out) {
  if (t.is_constant()) {
    if (t.skolem() && std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
    return;
  }
  for (const Term& a : t.args()) collect_skolems(a, out);
}

inline Term replace_constants(const Term& t, const std::map<std::string, std::string>& vars) {
  if (t.is_constant()) {
    auto it = vars.find(t.name());
    return it == vars.end() ? t : Term::var(it->second);
  }
  if (!t.is_app()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(replace_constants(a, vars));
  return Term::app(t.name(), std::move(args));
}

// Names for the skolem constants of the negated conjecture: the conjecture's
// own variable where the conjecture body matches it, fresh names otherwise.
class SkolemNames {
 public:
  SkolemNames(const QuantifiedEquation& conjecture, const Equation& negated_conjecture) {
    Equation pos = negated_conjecture.negated();
    Substitution sigma;
    bool ok = match_all({{conjecture.body.lhs, pos.lhs}, {conjecture.body.rhs, pos.rhs}}, sigma);
    if (!ok) {
      sigma = Substitution();
      ok = match_all({{conjecture.body.lhs, pos.rhs}, {conjecture.body.rhs, pos.lhs}}, sigma);
    }
    if (ok) {
      for (const auto& [var, t] : sigma.bindings())
        if (t.is_constant() && t.skolem() && !names_.count(t.name())) names_[t.name()] = var;
    }
    for (const auto& [sk, var] : names_) used_.insert(var);
    for (const auto& v : vars_of(conjecture.body)) used_.insert(v);
  }

  const std::string& name(const std::string& skolem) {
    auto it = names_.find(skolem);
    if (it != names_.end()) return it->second;
    std::string n = first_unused_variable_name(used_);
    used_.insert(n);
    return names_[skolem] = n;
  }

  const std::set<std::string>& used() const { return used_; }

 private:
  std::map<std::string, std::string> names_;
  std::set<std::string> used_;
};

// ¬d as a statement: skolems become leading universal variables, the clause's
// own variables become existential.
inline QuantifiedEquation negate_clause(const Equation& d, SkolemNames& names) {
  std::vector<std::string> skolems;
  collect_skolems(d.lhs, skolems);
  collect_skolems(d.rhs, skolems);
  std::map<std::string, std::string> as_vars;
  std::set<std::string> avoid = names.used();
  for (const auto& s : skolems) {
    as_vars[s] = names.name(s);
    avoid.insert(as_vars[s]);
  }
  // clause variables must not collide with the skolem names
  std::map<std::string, std::string> fresh;
  std::set<std::string> taken = avoid;
  for (const auto& v : vars_in_order(d)) {
    if (!avoid.count(v)) {
      taken.insert(v);
      continue;
    }
    std::string n = first_unused_variable_name(taken);
    taken.insert(n);
    fresh[v] = n;
  }
  Equation body = substitute(d, renaming(fresh)).negated();
  body = {replace_constants(body.lhs, as_vars), replace_constants(body.rhs, as_vars), body.polarity};
  QuantifiedEquation q;
  // skolems in the order they were first named, which follows the conjecture
  std::vector<std::string> universal;
  for (const auto& v : vars_in_order(body))
    if (std::any_of(as_vars.begin(), as_vars.end(), [&](const auto& kv) { return kv.second == v; }))
      universal.push_back(v);
  for (const auto& v : universal) q.prefix.push_back({Quantifier::Forall, v});
  for (const auto& v : vars_in_order(body))
    if (std::find(universal.begin(), universal.end(), v) == universal.end())
      q.prefix.push_back({Quantifier::Exists, v});
  q.body = body;
  return q;
}

inline DirectProof completion_to_direct(const ParsedDerivation& d) {
  if (d.steps.empty()) throw NotARefutation("empty derivation");
  std::size_t goal = d.steps.size() - 1;
  for (std::size_t i = d.steps.size(); i-- > 0;)
    if (!d.steps[i].id.empty() && d.steps[i].id[0] == 'g') {
      goal = i;
      break;
    }
  DirectProof p;
  p.steps.assign(d.steps.begin(), d.steps.begin() + static_cast<std::ptrdiff_t>(goal) + 1);
  return prune_unreachable(p);
}

}  // namespace detail

/// The direct proof of `conjecture` read off a derivation. Its length equals
/// `d.proof_length()`.
inline DirectProof to_direct(const ParsedDerivation& d, const QuantifiedEquation& conjecture) {
  if (d.source == DerivationSource::Completion) return detail::completion_to_direct(d);

  std::optional<std::size_t> bottom;
  for (std::size_t i = 0; i < d.steps.size(); ++i)
    if (d.steps[i].bottom()) {
      bottom = i;
      break;
    }
  if (!bottom) throw NotARefutation("derivation does not reach ⊥");
  DirectProof all;
  all.steps.assign(d.steps.begin(), d.steps.begin() + static_cast<std::ptrdiff_t>(*bottom) + 1);
  std::vector<ProofStep> steps = prune_unreachable(all).steps;
  std::map<std::string, const ProofStep*> by_id;
  for (const auto& s : steps) by_id[s.id] = &s;
  auto negative = [&](const std::string& id) {
    const ProofStep* s = by_id.at(id);
    return !s->bottom() && !s->statement->body.positive();
  };

  // The spine d_0 .. d_k followed by ⊥; `derivers[i]` is the step deriving
  // spine[i + 1] (the last one derives ⊥).
  std::vector<const ProofStep*> spine;
  const ProofStep* cur = &steps.back();
  std::vector<const ProofStep*> derivers;
  for (;;) {
    std::vector<std::string> neg;
    for (const auto& p : cur->premises)
      if (negative(p)) neg.push_back(p);
    if (neg.size() > 1) throw MultipleGoalPaths("step " + cur->id + " uses more than one disequation");
    if (neg.empty()) {
      if (cur->bottom()) throw NotARefutation("⊥ is derived without the negated conjecture");
      break;
    }
    derivers.push_back(cur);
    cur = by_id.at(neg[0]);
    spine.push_back(cur);
  }
  std::reverse(spine.begin(), spine.end());
  std::reverse(derivers.begin(), derivers.end());
  if (spine.front()->rule != RuleKind::NegatedConjecture && spine.front()->rule != RuleKind::Opaque)
    throw NotARefutation("the disequation path does not start at the negated conjecture");

  std::set<std::string> on_spine;
  for (const auto* s : spine) on_spine.insert(s->id);
  DirectProof out;
  for (const auto& s : steps) {
    if (s.bottom() || on_spine.count(s.id)) continue;
    if (!s.statement->body.positive())
      throw MultipleGoalPaths("disequation " + s.id + " is not on the path to ⊥");
    for (const auto& p : s.premises)
      if (on_spine.count(p)) throw NotARefutation("equation " + s.id + " depends on the negated conjecture");
    ProofStep c = s;
    c.statement = universal_closure(s.statement->body);
    out.steps.push_back(std::move(c));
  }

  detail::SkolemNames names(conjecture, spine.front()->statement->body);
  const std::size_t k = spine.size() - 1;
  const ProofStep& last_rule = *derivers.back();
  const Equation& dk = spine[k]->statement->body;
  bool omit_last = last_rule.rule == RuleKind::EqualityResolution && last_rule.premises.size() == 1 && dk.trivial();

  if (omit_last && k == 0) {
    // the conjecture is itself an instance of t = t
    ProofStep c;
    c.id = spine[0]->id;
    c.statement = detail::negate_clause(dk, names);
    c.rule = RuleKind::Chain;
    c.rule_name = "reflexivity";
    out.steps.push_back(std::move(c));
    return out;
  }

  std::string next_id;
  for (std::size_t i = k + 1; i-- > 0;) {
    if (i == k && omit_last) continue;
    const ProofStep& rule = *derivers[i];
    ProofStep c;
    c.id = spine[i]->id;
    c.statement = detail::negate_clause(spine[i]->statement->body, names);
    c.rule = rule.rule;
    c.rule_name = rule.rule_name;
    c.contrapositive = true;
    for (const auto& p : rule.premises)
      if (!on_spine.count(p)) c.premises.push_back(p);
    if (i + 1 == k && omit_last) {
      QuantifiedEquation t = detail::negate_clause(spine[k]->statement->body, names);
      c.tautology = t.body;
    } else if (i < k) {
      c.premises.push_back(next_id);
    }
    next_id = c.id;
    out.steps.push_back(std::move(c));
  }
  return out;
}

}  // namespace eqmin
