#pragma once

// Superposition, parallel superposition and equality resolution on unit
// equations, and the proof checker built on them.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqmin/proof.hpp"
#include "eqmin/term.hpp"

namespace eqmin {

namespace detail {

inline Position inner_path(const Position& p) {
  return Position(std::vector<std::size_t>(p.path.begin() + 1, p.path.end()));
}

// Unifier of the rule's source side with the target subterm at `pos`, the rule
// already renamed apart from the target.
inline Substitution superposition_unifier(const Equation& rule, const Equation& target, const Position& pos,
                                          Direction dir) {
  auto sub = try_subterm_at(target, pos);
  if (!sub) throw BadPosition("position " + to_string(pos) + " does not exist in the target");
  if (sub->is_var()) throw PositionIsVariable("superposition into a variable at " + to_string(pos));
  auto mu = unify(rule.source(dir), *sub);
  if (!mu) throw NotUnifiable("rule does not unify with the subterm at " + to_string(pos));
  return *mu;
}

inline Term replace_all(const Term& t, const Term& what, const Term& with) {
  if (t == what) return with;
  if (!t.is_app() || t.size() <= what.size()) return t;
  std::vector<Term> args;
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(replace_all(a, what, with));
    changed = changed || !(args.back() == a);
  }
  return changed ? Term::app(t.name(), std::move(args)) : t;
}

}  // namespace detail

/// Superposition of `rule` (read in direction `dir`) into `target` at `pos`.
/// `pos` starts with the side index of `target`. The rule is renamed apart
/// from the target before unification.
inline Equation apply_superposition(const Equation& rule, const Equation& target, const Position& pos,
                                    Direction dir = Direction::LeftToRight) {
  if (!rule.positive()) throw Error("the rule premise of superposition must be an equation");
  Equation r = rename_apart(rule, vars_of(target));
  Substitution mu = detail::superposition_unifier(r, target, pos, dir);
  return substitute(replace_at(target, pos, r.target(dir)), mu);
}

/// Parallel superposition: after unifying at `pos`, every occurrence of the
/// instantiated subterm is replaced.
inline Equation apply_parallel_superposition(const Equation& rule, const Equation& target, const Position& pos,
                                             Direction dir = Direction::LeftToRight) {
  if (!rule.positive()) throw Error("the rule premise of superposition must be an equation");
  Equation r = rename_apart(rule, vars_of(target));
  Substitution mu = detail::superposition_unifier(r, target, pos, dir);
  Term from = substitute(r.source(dir), mu);
  Term to = substitute(r.target(dir), mu);
  Equation t = substitute(target, mu);
  return {detail::replace_all(t.lhs, from, to), detail::replace_all(t.rhs, from, to), t.polarity};
}

/// Equality resolution. Returns the unifier witnessing ⊥.
inline Substitution apply_equality_resolution(const Equation& d) {
  if (d.positive()) throw NotUnifiable("equality resolution needs a disequation");
  auto mu = unify(d.lhs, d.rhs);
  if (!mu) throw NotUnifiable("the sides of the disequation do not unify");
  return *mu;
}

/// All conclusions of single and parallel superposition of `rule` into
/// `target`, over both rule orientations and every non-variable position.
inline std::vector<Equation> superposition_conclusions(const Equation& rule, const Equation& target) {
  std::vector<Equation> out;
  if (!rule.positive()) return out;
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
          out.push_back(apply_parallel_superposition(r, target, pos, dir));
        } catch (const NotUnifiable&) {
        }
      }
    }
  }
  return out;
}

/// Whether `conclusion` is an instance of a superposition of `rule` into
/// `target`.
inline bool is_superposition_of(const Equation& rule, const Equation& target, const Equation& conclusion) {
  if (!rule.positive() || target.polarity != conclusion.polarity) return false;
  for (const Equation& c : superposition_conclusions(rule, target))
    if (is_instance_of(conclusion, c)) return true;
  return false;
}

/// Replaces universally quantified variables by constants and leaves the
/// existential ones as free variables. Used to check contrapositive steps,
/// whose statements come from negated clauses.
inline Substitution skolem_substitution(const QuantifiedEquation& q) {
  Substitution s;
  for (const auto& b : normalize_prefix(q).prefix)
    if (b.quantifier == Quantifier::Forall) s.set(b.var, Term::constant("sk$" + b.var, true));
  return s;
}

inline Equation skolemize_universals(const QuantifiedEquation& q) { return substitute(q.body, skolem_substitution(q)); }

// ---------------------------------------------------------------------------
// Checker

enum class Validity { Valid, Invalid, Unchecked };

struct StepVerdict {
  std::string id;
  Validity validity = Validity::Valid;
  std::string message;
};

struct CheckReport {
  std::vector<StepVerdict> steps;
  bool conclusion_ok = false;
  std::string conclusion_message;

  /// No invalid step and the right conclusion. Opaque steps are tolerated.
  bool accepted() const {
    if (!conclusion_ok) return false;
    for (const auto& s : steps)
      if (s.validity == Validity::Invalid) return false;
    return true;
  }
  /// Accepted and every step reconstructed.
  bool certified() const {
    if (!accepted()) return false;
    for (const auto& s : steps)
      if (s.validity != Validity::Valid) return false;
    return true;
  }
  bool partially_certified() const { return accepted() && !certified(); }

  std::optional<StepVerdict> first_invalid() const {
    for (const auto& s : steps)
      if (s.validity == Validity::Invalid) return s;
    return std::nullopt;
  }

  std::string summary() const {
    if (auto bad = first_invalid()) return "step " + bad->id + ": " + bad->message;
    if (!conclusion_ok) return conclusion_message;
    return certified() ? "certified" : "accepted (partially certified)";
  }
};

namespace detail {

class Checker {
 public:
  Checker(const std::vector<NamedEquation>& axioms, const QuantifiedEquation& conjecture)
      : axioms_(axioms), conjecture_(conjecture) {}

  CheckReport run(const std::vector<ProofStep>& steps) {
    CheckReport report;
    if (steps.empty()) {
      report.conclusion_message = "empty proof";
      return report;
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const ProofStep& s = steps[i];
      StepVerdict v{s.id, Validity::Valid, ""};
      try {
        if (seen_.count(s.id)) fail("duplicate step id");
        if (s.bottom() && i + 1 != steps.size()) fail("⊥ before the last step");
        for (const auto& p : s.premises)
          if (!seen_.count(p)) fail("premise " + p + " is not an earlier step");
        v.validity = check_step(s);
      } catch (const StepFailure& f) {
        v.validity = Validity::Invalid;
        v.message = f.what;
      } catch (const Error& e) {
        v.validity = Validity::Invalid;
        v.message = e.what();
      }
      report.steps.push_back(std::move(v));
      seen_[s.id] = &s;
    }
    check_conclusion(steps.back(), report);
    return report;
  }

 private:
  struct StepFailure {
    std::string what;
  };
  [[noreturn]] static void fail(std::string what) { throw StepFailure{std::move(what)}; }

  const ProofStep& premise(const std::string& id) const {
    auto it = seen_.find(id);
    if (it == seen_.end()) fail("reference " + id + " is not an earlier step");
    return *it->second;
  }

  // Body of a premise that must be a universally quantified equation.
  Equation universal_body(const std::string& id) const {
    const ProofStep& p = premise(id);
    if (p.bottom()) fail("premise " + id + " is ⊥");
    if (!p.statement->universal()) fail("premise " + id + " is existentially quantified");
    return p.statement->body;
  }

  Validity check_step(const ProofStep& s) {
    switch (s.rule) {
      case RuleKind::Axiom: {
        if (s.bottom()) fail("axiom step without statement");
        for (const auto& a : axioms_)
          if (alpha_equal(a.eq, *s.statement)) return Validity::Valid;
        fail("statement is not a declared axiom");
      }
      case RuleKind::NegatedConjecture: {
        if (s.bottom() || s.statement->body.positive()) fail("negated conjecture must be a disequation");
        if (!is_instance_of(s.statement->body.negated(), conjecture_.body))
          fail("statement is not the negated conjecture");
        return Validity::Valid;
      }
      case RuleKind::Superposition:
      case RuleKind::ParallelSuperposition:
        return s.contrapositive ? check_contrapositive(s) : check_superposition(s);
      case RuleKind::EqualityResolution:
        return s.contrapositive ? check_contrapositive(s) : check_equality_resolution(s);
      case RuleKind::Chain:
        return check_chain(s);
      case RuleKind::Opaque:
        return Validity::Unchecked;
    }
    fail("unknown rule");
  }

  Validity check_superposition(const ProofStep& s) {
    if (s.premises.size() != 2) fail("superposition needs two premises");
    if (s.bottom()) fail("superposition cannot conclude ⊥");
    if (!s.statement->universal()) fail("conclusion is existentially quantified");
    Equation a = universal_body(s.premises[0]);
    Equation b = universal_body(s.premises[1]);
    const Equation& c = s.statement->body;
    if (is_superposition_of(a, b, c) || is_superposition_of(b, a, c)) return Validity::Valid;
    fail("conclusion does not follow by superposition from " + s.premises[0] + " and " + s.premises[1]);
  }

  Validity check_equality_resolution(const ProofStep& s) {
    if (s.premises.size() != 1) fail("equality resolution needs one premise");
    if (!s.bottom()) fail("equality resolution concludes ⊥");
    const ProofStep& p = premise(s.premises[0]);
    if (p.bottom()) fail("premise is ⊥");
    try {
      apply_equality_resolution(p.statement->body);
    } catch (const NotUnifiable& e) {
      fail(e.what());
    }
    return Validity::Valid;
  }

  // A contrapositive step derives ¬d_i from a positive premise P and ¬d_{i+1}
  // (or the tautology annotation standing in for it), where the refutation
  // derived d_{i+1} from P and d_i.
  Validity check_contrapositive(const ProofStep& s) {
    if (s.bottom()) fail("contrapositive step without statement");
    if (!s.statement->body.positive()) fail("contrapositive step must conclude an equation");
    Equation di = skolemize_universals(*s.statement).negated();
    if (s.rule == RuleKind::EqualityResolution) {
      if (!s.premises.empty()) fail("contrapositive equality resolution takes no premises");
      if (!unify(di.lhs, di.rhs)) fail("sides of the statement do not unify");
      return Validity::Valid;
    }
    std::optional<Equation> next;
    std::optional<Equation> rule;
    if (s.tautology) {
      if (s.premises.size() != 1) fail("contrapositive step with tautology needs one premise");
      if (!s.tautology->trivial()) fail("annotated tautology is not of the form t = t");
      // the tautology shares the statement's universal variables
      next = substitute(Equation{s.tautology->lhs, s.tautology->rhs, Polarity::Disequal},
                        skolem_substitution(*s.statement));
      rule = universal_body(s.premises[0]);
    } else {
      if (s.premises.size() != 2) fail("contrapositive step needs two premises");
      for (std::size_t k = 0; k < 2 && !next; ++k) {
        const ProofStep& cand = premise(s.premises[k]);
        if (!cand.contrapositive || cand.bottom()) continue;
        next = skolemize_universals(*cand.statement).negated();
        rule = universal_body(s.premises[1 - k]);
      }
      if (!next) fail("no contrapositive premise");
    }
    if (is_superposition_of(*rule, di, *next)) return Validity::Valid;
    fail("contrapositive inference does not reconstruct");
  }

  Validity check_chain(const ProofStep& s) {
    if (s.bottom()) fail("chain cannot conclude ⊥");
    if (!s.statement->universal()) fail("chain conclusion is existentially quantified");
    const Equation& goal = s.statement->body;
    if (!goal.positive()) fail("chain must prove an equation");
    for (const auto& l : s.chain)
      if (std::find(s.premises.begin(), s.premises.end(), l.by) == s.premises.end())
        fail("chain cites " + l.by + " which is not a premise");
    auto walk = [&](const Term& start, const Term& end) -> std::optional<std::string> {
      Term cur = start;
      for (std::size_t i = 0; i < s.chain.size(); ++i) {
        const ChainLink& l = s.chain[i];
        if (!(l.from == cur)) return "link " + std::to_string(i + 1) + " does not continue the chain";
        Equation rule = universal_body(l.by);
        if (!rule.positive()) return "link " + std::to_string(i + 1) + " cites a disequation";
        if (!is_rewrite_step(l.from, l.to, l.pos, rule, l.dir))
          return "link " + std::to_string(i + 1) + " is not a rewrite by " + l.by;
        cur = l.to;
      }
      if (!(cur == end)) return std::string("chain does not end at the other side");
      return std::nullopt;
    };
    auto forward = walk(goal.lhs, goal.rhs);
    if (!forward) return Validity::Valid;
    if (!walk(goal.rhs, goal.lhs)) return Validity::Valid;
    fail(*forward);
  }

  void check_conclusion(const ProofStep& last, CheckReport& report) const {
    if (last.bottom()) {
      report.conclusion_ok = true;
      return;
    }
    const QuantifiedEquation& f = *last.statement;
    if (alpha_equal(f, conjecture_) ||
        (f.universal() && conjecture_.universal() && f.body.positive() == conjecture_.body.positive() &&
         is_instance_of(conjecture_.body, f.body))) {
      report.conclusion_ok = true;
      return;
    }
    report.conclusion_message = "final statement does not prove the conjecture";
  }

  const std::vector<NamedEquation>& axioms_;
  const QuantifiedEquation& conjecture_;
  std::map<std::string, const ProofStep*> seen_;
};

}  // namespace detail

/// Checks every step of `steps`. A refutation ends in ⊥; a direct proof ends
/// in the conjecture or a generalization of it.
inline CheckReport check_proof(const std::vector<ProofStep>& steps, const std::vector<NamedEquation>& axioms,
                               const QuantifiedEquation& conjecture) {
  return detail::Checker(axioms, conjecture).run(steps);
}

inline CheckReport check_proof(const DirectProof& p, const Problem& problem) {
  return check_proof(p.steps, problem.axioms, problem.conjecture.eq);
}

}  // namespace eqmin
