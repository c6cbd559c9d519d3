#pragma once

// Proof and problem representations shared by every stage of the pipeline.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqmin/syntax.hpp"
#include "eqmin/term.hpp"

namespace eqmin {

enum class RuleKind {
  Axiom,
  NegatedConjecture,
  Superposition,
  ParallelSuperposition,
  EqualityResolution,
  Chain,
  Opaque,  // inference the checker cannot reconstruct; kept for its structure
};

inline const char* to_string(RuleKind k) {
  switch (k) {
    case RuleKind::Axiom: return "axiom";
    case RuleKind::NegatedConjecture: return "negated_conjecture";
    case RuleKind::Superposition: return "superposition";
    case RuleKind::ParallelSuperposition: return "parallel_superposition";
    case RuleKind::EqualityResolution: return "equality_resolution";
    case RuleKind::Chain: return "chain";
    case RuleKind::Opaque: return "opaque";
  }
  return "opaque";
}

inline std::optional<RuleKind> rule_kind_from_string(const std::string& s) {
  for (RuleKind k : {RuleKind::Axiom, RuleKind::NegatedConjecture, RuleKind::Superposition,
                     RuleKind::ParallelSuperposition, RuleKind::EqualityResolution, RuleKind::Chain,
                     RuleKind::Opaque})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

/// One rewrite in an equality chain. `by` names the step whose statement is
/// used as the rewrite rule.
struct ChainLink {
  Term from;
  std::string by;
  Direction dir = Direction::LeftToRight;
  Position pos;
  Term to;
};

struct ProofStep {
  std::string id;
  std::optional<QuantifiedEquation> statement;  // nullopt is ⊥
  RuleKind rule = RuleKind::Axiom;
  std::string rule_name;  // as reported by the source; informational
  std::vector<std::string> premises;
  std::vector<ChainLink> chain;
  std::string name;  // for axiom steps: the axiom's name in the problem
  bool contrapositive = false;
  std::optional<Equation> tautology;  // virtual premise t = t of a contrapositive step

  bool bottom() const { return !statement.has_value(); }
  bool is_axiom() const { return rule == RuleKind::Axiom; }
};

/// Length contribution: axioms are free, a chain counts its links, any other
/// inference counts one.
inline std::size_t step_length(const ProofStep& s) {
  if (s.rule == RuleKind::Axiom) return 0;
  if (s.rule == RuleKind::Chain) return s.chain.size();
  return 1;
}

enum class Origin { Baseline, BigStep, SmallStep, Abstracted, Segment, Builtin };

inline const char* to_string(Origin o) {
  switch (o) {
    case Origin::Baseline: return "baseline";
    case Origin::BigStep: return "bigstep";
    case Origin::SmallStep: return "smallstep";
    case Origin::Abstracted: return "abstracted";
    case Origin::Segment: return "segment";
    case Origin::Builtin: return "builtin";
  }
  return "baseline";
}

inline std::optional<Origin> origin_from_string(const std::string& s) {
  for (Origin o : {Origin::Baseline, Origin::BigStep, Origin::SmallStep, Origin::Abstracted, Origin::Segment,
                   Origin::Builtin})
    if (s == to_string(o)) return o;
  return std::nullopt;
}

/// A forward derivation whose last step is the proved statement.
struct DirectProof {
  std::vector<ProofStep> steps;
  Origin origin = Origin::Baseline;

  std::size_t length() const {
    std::size_t n = 0;
    for (const auto& s : steps) n += step_length(s);
    return n;
  }
  std::size_t chain_links() const {
    std::size_t n = 0;
    for (const auto& s : steps)
      if (s.rule == RuleKind::Chain) n += s.chain.size();
    return n;
  }
  const ProofStep* find(const std::string& id) const {
    for (const auto& s : steps)
      if (s.id == id) return &s;
    return nullptr;
  }
  const ProofStep& final_step() const {
    if (steps.empty()) throw Error("empty proof");
    return steps.back();
  }
};

enum class DerivationSource { Saturation, Completion };

struct ParsedDerivation {
  std::vector<ProofStep> steps;
  DerivationSource source = DerivationSource::Saturation;
  std::set<std::string> preprocessing_ids;

  const ProofStep* find(const std::string& id) const {
    for (const auto& s : steps)
      if (s.id == id) return &s;
    return nullptr;
  }

  /// Inferences other than axioms and the negated conjecture.
  std::size_t inference_count() const {
    std::size_t n = 0;
    for (const auto& s : steps)
      if (s.rule != RuleKind::Axiom && s.rule != RuleKind::NegatedConjecture) ++n;
    return n;
  }

  /// Length of the corresponding direct proof: chain links for completion
  /// proofs; inferences minus equality resolutions from t ≠ t otherwise.
  std::size_t proof_length() const {
    if (source == DerivationSource::Completion) {
      std::size_t n = 0;
      for (const auto& s : steps) n += step_length(s);
      return n;
    }
    std::size_t n = inference_count();
    for (const auto& s : steps) {
      if (s.rule != RuleKind::EqualityResolution || s.premises.size() != 1) continue;
      const ProofStep* p = find(s.premises[0]);
      if (p && p->statement && p->statement->body.trivial()) --n;
    }
    return n;
  }
};

// ---------------------------------------------------------------------------
// Problems

enum class VariantKind { BigStep, SmallStep, Abstracted, Baseline, Segment };

inline const char* to_string(VariantKind v) {
  switch (v) {
    case VariantKind::BigStep: return "bigstep";
    case VariantKind::SmallStep: return "smallstep";
    case VariantKind::Abstracted: return "abstracted";
    case VariantKind::Baseline: return "baseline";
    case VariantKind::Segment: return "segment";
  }
  return "baseline";
}

inline Origin origin_of(VariantKind v) {
  switch (v) {
    case VariantKind::BigStep: return Origin::BigStep;
    case VariantKind::SmallStep: return Origin::SmallStep;
    case VariantKind::Abstracted: return Origin::Abstracted;
    case VariantKind::Baseline: return Origin::Baseline;
    case VariantKind::Segment: return Origin::Segment;
  }
  return Origin::Baseline;
}

struct NamedEquation {
  std::string name;
  QuantifiedEquation eq;
};

/// Records which subterm of a lemma was replaced by a fresh variable.
struct Abstraction {
  Position pos;  // equation position: side index first
  std::string fresh_var;
  Term replaced;
};

struct Problem {
  std::string id;
  std::vector<NamedEquation> axioms;
  NamedEquation conjecture;
  VariantKind variant = VariantKind::BigStep;
  std::string lemma_id;  // the lemma this problem was generated for, if any
  std::optional<Abstraction> abstraction;
};

/// Key identifying a problem up to alpha-equivalence and axiom order.
inline std::string problem_key(const std::vector<NamedEquation>& axioms, const QuantifiedEquation& conjecture) {
  std::vector<std::string> keys;
  for (const auto& a : axioms) keys.push_back(canonical_key(a.eq));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::string k;
  for (const auto& s : keys) k += s + ";";
  return k + "|-" + canonical_key(conjecture);
}

inline std::string problem_key(const Problem& p) { return problem_key(p.axioms, p.conjecture.eq); }

// ---------------------------------------------------------------------------
// Proof surgery

/// Keeps only the steps reachable from the final step through premise and
/// chain references.
inline DirectProof prune_unreachable(const DirectProof& p) {
  if (p.steps.empty()) return p;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < p.steps.size(); ++i) index[p.steps[i].id] = i;
  std::vector<bool> live(p.steps.size(), false);
  std::vector<std::size_t> work{p.steps.size() - 1};
  live.back() = true;
  while (!work.empty()) {
    const ProofStep& s = p.steps[work.back()];
    work.pop_back();
    auto visit = [&](const std::string& id) {
      auto it = index.find(id);
      if (it != index.end() && !live[it->second]) {
        live[it->second] = true;
        work.push_back(it->second);
      }
    };
    for (const auto& pr : s.premises) visit(pr);
    for (const auto& l : s.chain) visit(l.by);
  }
  DirectProof out;
  out.origin = p.origin;
  for (std::size_t i = 0; i < p.steps.size(); ++i)
    if (live[i]) out.steps.push_back(p.steps[i]);
  return out;
}

/// Renames step ids (premises and chain references follow).
inline void rename_steps(std::vector<ProofStep>& steps, const std::map<std::string, std::string>& names) {
  auto map = [&](std::string& id) {
    auto it = names.find(id);
    if (it != names.end()) id = it->second;
  };
  for (auto& s : steps) {
    map(s.id);
    for (auto& p : s.premises) map(p);
    for (auto& l : s.chain) map(l.by);
  }
}

/// Ids of the form A1.. for axioms and L1.. for lemmas, keeping `final_id`
/// for the last step when given.
inline DirectProof relabel(const DirectProof& p, const std::string& final_id = "") {
  DirectProof out = p;
  std::map<std::string, std::string> names;
  std::size_t a = 0, l = 0;
  for (std::size_t i = 0; i < out.steps.size(); ++i) {
    const auto& s = out.steps[i];
    if (i + 1 == out.steps.size() && !final_id.empty() && !s.is_axiom()) names[s.id] = final_id;
    else names[s.id] = s.is_axiom() ? "A" + std::to_string(++a) : "L" + std::to_string(++l);
  }
  rename_steps(out.steps, names);
  return out;
}

}  // namespace eqmin
