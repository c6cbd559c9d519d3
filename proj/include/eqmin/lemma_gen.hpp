#pragma once

// Per-lemma problems derived from a baseline direct proof, and the table of
// best proofs found for each lemma.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqmin/proof.hpp"
#include "eqmin/term.hpp"

namespace eqmin {

struct StoredProof {
  DirectProof raw;       // as found for its problem; may cite lemma axioms
  DirectProof expanded;  // self-contained over the original axioms
  std::size_t length = 0;
  VariantKind variant = VariantKind::Baseline;
  std::string backend;
  std::size_t discovery = 0;
};

struct LemmaRecord {
  std::string id;
  QuantifiedEquation statement;
  std::size_t baseline_index = 0;  // index of the step in the baseline proof
  QuantifiedEquation axiom_form;   // what later problems assume; a generalization once one wins
  std::optional<StoredProof> best;
  std::optional<StoredProof> exact;  // best proof of `statement` itself, not of a generalization
  std::vector<Problem> problems;

  bool existential() const { return !statement.universal(); }
  bool generalized() const { return !alpha_equal(axiom_form, statement); }
};

/// Lower is preferred among proofs of equal length.
inline int variant_priority(VariantKind v) {
  switch (v) {
    case VariantKind::SmallStep: return 0;
    case VariantKind::BigStep: return 1;
    case VariantKind::Abstracted: return 2;
    case VariantKind::Segment: return 3;
    case VariantKind::Baseline: return 4;
  }
  return 5;
}

/// Strict preference: length, then variant, then configured backend order,
/// then discovery order.
inline bool better_proof(const StoredProof& a, const StoredProof& b, const std::vector<std::string>& backend_order) {
  if (a.length != b.length) return a.length < b.length;
  if (variant_priority(a.variant) != variant_priority(b.variant))
    return variant_priority(a.variant) < variant_priority(b.variant);
  auto rank = [&](const std::string& n) {
    auto it = std::find(backend_order.begin(), backend_order.end(), n);
    return static_cast<std::size_t>(it - backend_order.begin());
  };
  if (rank(a.backend) != rank(b.backend)) return rank(a.backend) < rank(b.backend);
  return a.discovery < b.discovery;
}

// ---------------------------------------------------------------------------
// Problem variants

namespace detail {

inline std::string variant_problem_id(const std::string& theorem, const std::string& lemma, VariantKind v,
                                      std::optional<std::size_t> abstraction = std::nullopt) {
  std::string id = theorem + "_" + lemma + "_" + to_string(v);
  if (abstraction) id += "_" + std::to_string(*abstraction);
  return id;
}

}  // namespace detail

inline Problem make_big_step(const std::vector<NamedEquation>& axioms, const NamedEquation& lemma,
                             const std::string& theorem = "problem") {
  Problem p;
  p.id = detail::variant_problem_id(theorem, lemma.name, VariantKind::BigStep);
  p.axioms = axioms;
  p.conjecture = lemma;
  p.variant = VariantKind::BigStep;
  p.lemma_id = lemma.name;
  return p;
}

/// Non-axiom steps of a baseline proof, in order.
inline std::vector<const ProofStep*> baseline_lemmas(const DirectProof& baseline) {
  std::vector<const ProofStep*> out;
  for (const auto& s : baseline.steps)
    if (!s.is_axiom() && !s.bottom()) out.push_back(&s);
  return out;
}

/// The `i`-th lemma of the baseline as conjecture, with the original axioms
/// and every earlier universally quantified lemma as axioms.
inline Problem make_small_step(const std::vector<NamedEquation>& axioms, const DirectProof& baseline, std::size_t i,
                               const std::string& theorem = "problem") {
  auto lemmas = baseline_lemmas(baseline);
  if (i >= lemmas.size()) throw Error("lemma index " + std::to_string(i) + " out of range");
  Problem p;
  p.axioms = axioms;
  for (std::size_t j = 0; j < i; ++j)
    if (lemmas[j]->statement->universal()) p.axioms.push_back({lemmas[j]->id, *lemmas[j]->statement});
  p.conjecture = {lemmas[i]->id, *lemmas[i]->statement};
  p.id = detail::variant_problem_id(theorem, lemmas[i]->id, VariantKind::SmallStep);
  p.variant = VariantKind::SmallStep;
  p.lemma_id = lemmas[i]->id;
  return p;
}

/// Positions (side index first) of subterms v◇w with v and w variables, one
/// per distinct such subterm, in pre-order.
inline std::vector<Position> abstraction_candidates(const QuantifiedEquation& e) {
  std::vector<Position> out;
  std::set<Term> seen;
  for (std::size_t s = 0; s < 2; ++s) {
    const Term& t = side(e.body, s);
    for (const Position& inner : positions(t)) {
      Term sub = subterm_at(t, inner);
      if (!sub.is_magma() || !sub.arg(0).is_var() || !sub.arg(1).is_var()) continue;
      if (!seen.insert(sub).second) continue;
      Position p = inner;
      p.path.insert(p.path.begin(), s);
      out.push_back(p);
    }
  }
  return out;
}

/// Replaces the subterm at `pos` by a fresh universally quantified variable.
inline QuantifiedEquation abstract_at(const QuantifiedEquation& e, const Position& pos, Abstraction* record = nullptr) {
  std::set<std::string> used = vars_of(e.body);
  for (const auto& b : e.prefix) used.insert(b.var);
  std::string fresh = first_unused_variable_name(used);
  Term replaced = *try_subterm_at(e.body, pos);
  if (record) *record = {pos, fresh, replaced};
  return universal_closure(replace_at(e.body, pos, Term::var(fresh)));
}

/// One abstracted problem per candidate.
inline std::vector<Problem> make_abstracted(const std::vector<NamedEquation>& axioms, const NamedEquation& lemma,
                                            const std::string& theorem = "problem") {
  std::vector<Problem> out;
  if (!lemma.eq.universal()) return out;
  auto candidates = abstraction_candidates(lemma.eq);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    Problem p;
    Abstraction a;
    p.conjecture = {lemma.name, abstract_at(lemma.eq, candidates[k], &a)};
    p.abstraction = a;
    p.axioms = axioms;
    p.variant = VariantKind::Abstracted;
    p.lemma_id = lemma.name;
    p.id = detail::variant_problem_id(theorem, lemma.name, VariantKind::Abstracted, k + 1);
    out.push_back(std::move(p));
  }
  return out;
}

/// Substituting the abstracted variable back gives the original lemma.
inline QuantifiedEquation concretize(const QuantifiedEquation& abstracted, const Abstraction& a) {
  Substitution s;
  s.set(a.fresh_var, a.replaced);
  return universal_closure(substitute(abstracted.body, s));
}

// ---------------------------------------------------------------------------
// Table

struct LemmaTable {
  Problem problem;
  DirectProof baseline;  // relabelled: A1.., L1.., C
  std::vector<LemmaRecord> records;
  std::vector<std::string> backend_order;
  std::size_t discoveries = 0;

  LemmaRecord* find(const std::string& id) {
    for (auto& r : records)
      if (r.id == id) return &r;
    return nullptr;
  }
  const LemmaRecord* find(const std::string& id) const {
    for (const auto& r : records)
      if (r.id == id) return &r;
    return nullptr;
  }
  std::size_t index_of(const std::string& id) const {
    for (std::size_t i = 0; i < records.size(); ++i)
      if (records[i].id == id) return i;
    throw Error("unknown lemma " + id);
  }

  /// Stores `candidate` when it beats the current best; with `strict`, only
  /// when it is shorter. Returns whether it did.
  bool offer(const std::string& id, StoredProof candidate, bool strict = false) {
    LemmaRecord* r = find(id);
    if (!r) throw Error("unknown lemma " + id);
    candidate.discovery = discoveries++;
    auto beats = [&](const std::optional<StoredProof>& cur) {
      if (!cur) return true;
      return strict ? candidate.length < cur->length : better_proof(candidate, *cur, backend_order);
    };
    const auto& steps = candidate.expanded.steps;
    if (!steps.empty() && steps.back().statement && alpha_equal(*steps.back().statement, r->statement) &&
        beats(r->exact))
      r->exact = candidate;
    if (!beats(r->best)) return false;
    r->best = std::move(candidate);
    return true;
  }
};

/// Relabels the baseline and creates one record per lemma. Problems are
/// generated for universally quantified lemmas only; abstracted problems are
/// not generated for the conjecture.
inline LemmaTable make_table(const Problem& problem, const DirectProof& baseline, std::set<VariantKind> variants) {
  LemmaTable t;
  t.problem = problem;
  t.baseline = relabel(baseline, "C");
  const auto& steps = t.baseline.steps;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].is_axiom() || steps[i].bottom()) continue;
    LemmaRecord r;
    r.id = steps[i].id;
    r.statement = *steps[i].statement;
    r.axiom_form = r.statement;
    r.baseline_index = i;
    t.records.push_back(std::move(r));
  }
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    LemmaRecord& r = t.records[k];
    if (r.existential()) continue;
    NamedEquation lemma{r.id, r.statement};
    if (variants.count(VariantKind::BigStep)) r.problems.push_back(make_big_step(problem.axioms, lemma, problem.id));
    if (variants.count(VariantKind::SmallStep))
      r.problems.push_back(make_small_step(problem.axioms, t.baseline, k, problem.id));
    if (variants.count(VariantKind::Abstracted) && k + 1 < t.records.size())
      for (auto& p : make_abstracted(problem.axioms, lemma, problem.id)) r.problems.push_back(std::move(p));
  }
  return t;
}

/// After a lemma's abstracted proof wins, later small-step problems assume
/// the generalization instead of the lemma. Returns the indices of the
/// records whose problems changed; they need to be proved again.
inline std::vector<std::size_t> propagate_generalization(LemmaTable& t, const std::string& lemma_id) {
  LemmaRecord* g = t.find(lemma_id);
  std::vector<std::size_t> affected;
  if (!g || !g->best || g->best->variant != VariantKind::Abstracted) return affected;
  g->axiom_form = g->best->expanded.final_step().statement.value();
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    bool changed = false;
    for (auto& p : t.records[k].problems) {
      if (p.variant != VariantKind::SmallStep) continue;
      for (auto& a : p.axioms)
        if (a.name == lemma_id && !alpha_equal(a.eq, g->axiom_form)) {
          a.eq = g->axiom_form;
          changed = true;
        }
    }
    if (changed) affected.push_back(k);
  }
  return affected;
}

}  // namespace eqmin
