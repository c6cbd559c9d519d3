#include <gtest/gtest.h>

#include "eqmin/calculus.hpp"
#include "eqmin/syntax.hpp"
#include "support/golden.hpp"
#include "support/random_terms.hpp"

using namespace eqmin;
using eqmin::testkit::step;

namespace {

Term T(const char* s) { return parse_term(s); }
Equation E(const char* s) { return parse_equation(s); }
QuantifiedEquation Q(const char* s) { return parse_quantified(s); }

// Ground-instance oracle: the ground equation `c` follows from the premises if
// its lhs rewrites in one step with `rule` to a term w such that (w, c.rhs) is
// an instance of the target premise, in either orientation.
bool reachable_by_two_rewrites(const Equation& c, const Equation& rule, const Equation& target) {
  for (const Position& p : positions(c.lhs)) {
    for (Direction d : {Direction::LeftToRight, Direction::RightToLeft}) {
      Equation r = rename_apart(rule, vars_of(c));
      auto m = match_term(r.target(d), subterm_at(c.lhs, p));
      if (!m) continue;
      // source-only variables stay free and are solved together with the
      // target premise's variables
      Term w = replace_at(c.lhs, p, substitute(r.source(d), *m));
      Equation t = rename_apart(target, vars_of(r));
      if (unify_all({{t.lhs, w}, {t.rhs, c.rhs}})) return true;
      if (unify_all({{t.rhs, w}, {t.lhs, c.rhs}})) return true;
    }
  }
  return false;
}

}  // namespace

TEST(Superposition, SelfOverlapExample) {
  Equation c = apply_superposition(E("f(f(x)) = g(x)"), E("f(f(x')) = g(x')"), {0, 0});
  EXPECT_EQ(c, E("f(g(x)) = g(f(x))"));
}

TEST(Superposition, FirstLemmaOf650) {
  Equation ax = E("x = x◇(y◇((z◇x)◇y))");
  Equation copy = E("x' = x'◇(y'◇((z'◇x')◇y'))");
  // z'◇x' sits at rhs / arg 1 / arg 1 / arg 0
  Equation c = apply_superposition(ax, copy, {1, 1, 1, 0}, Direction::RightToLeft);
  auto lemma1 = Q("∀ x y z w. x◇((y◇z)◇x) = (x◇((y◇z)◇x))◇(w◇(z◇w))");
  EXPECT_TRUE(alpha_equal(universal_closure(c), lemma1)) << to_string(c);
}

TEST(Superposition, Errors) {
  EXPECT_EQ(apply_superposition(E("a = b"), E("a = b"), {0}), E("b = b"));
  EXPECT_THROW(apply_superposition(E("f(x) = x"), E("g(y) = a"), {0}), NotUnifiable);
  EXPECT_THROW(apply_superposition(E("f(x) = x"), E("y = a"), {0}), PositionIsVariable);
  EXPECT_THROW(apply_superposition(E("f(x) = x"), E("y = a"), {0, 3}), BadPosition);
}

TEST(ParallelSuperposition, Example) {
  Equation c = apply_parallel_superposition(E("b = a"), E("h(b,a,b) != h(a,b,a)"), {0, 0});
  EXPECT_EQ(c, E("h(a,a,a) != h(a,a,a)"));
}

TEST(EqualityResolution, Cases) {
  EXPECT_NO_THROW(apply_equality_resolution(E("h(a,a) != h(a,a)")));
  auto mu = apply_equality_resolution(E("f(x) != f(a)"));
  EXPECT_EQ(mu, (Substitution{{"x", T("a")}}));
  EXPECT_THROW(apply_equality_resolution(E("a != b")), NotUnifiable);
}

TEST(Superposition, SoundOnGroundInstances) {
  eqmin::testkit::TermGen gen(31);
  gen.unary = false;
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    Equation rule = gen.equation(2);
    gen.vars = {"x'", "y'"};
    Equation target = gen.equation(3);
    gen.vars = {"x", "y", "z"};
    std::vector<Equation> conclusions;
    for (std::size_t side_index = 0; side_index < 2; ++side_index)
      for (Position pos : positions(side(target, side_index))) {
        pos.path.insert(pos.path.begin(), side_index);
        for (Direction dir : {Direction::LeftToRight, Direction::RightToLeft}) {
          try {
            conclusions.push_back(apply_superposition(rule, target, pos, dir));
          } catch (const Error&) {
          }
        }
      }
    for (const Equation& c : conclusions) {
      // ground the conclusion with constants
      Substitution theta;
      for (const auto& v : vars_of(c)) theta.set(v, Term::constant("a"));
      Equation g = substitute(c, theta);
      bool ok = reachable_by_two_rewrites(g, rule, target) || reachable_by_two_rewrites(g.flipped(), rule, target);
      EXPECT_TRUE(ok) << to_string(rule) << " into " << to_string(target) << " gave " << to_string(c);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(CheckProof, Example3Refutation) {
  auto report = check_proof(eqmin::testkit::example3_refutation(), eqmin::testkit::example3_axioms(),
                            eqmin::testkit::example3_conjecture());
  EXPECT_TRUE(report.certified()) << report.summary();
}

TEST(CheckProof, TweeChainProof) {
  auto report = check_proof(eqmin::testkit::twee_example_proof(), eqmin::testkit::example3_axioms(),
                            eqmin::testkit::example3_conjecture());
  EXPECT_TRUE(report.certified()) << report.summary();
}

TEST(CheckProof, RejectsSwappedPremise) {
  auto proof = eqmin::testkit::example3_refutation();
  proof[4].premises = {"2", "4"};
  auto report = check_proof(proof, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture());
  EXPECT_FALSE(report.accepted());
  ASSERT_TRUE(report.first_invalid());
  EXPECT_EQ(report.first_invalid()->id, "5");
}

TEST(CheckProof, RejectsForwardReference) {
  auto proof = eqmin::testkit::example3_refutation();
  proof[3].premises = {"2", "5"};
  auto report = check_proof(proof, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture());
  EXPECT_EQ(report.first_invalid()->id, "4");
}

TEST(CheckProof, RejectsUnmatchedAxiom) {
  auto proof = eqmin::testkit::example3_refutation();
  proof[0] = step("1", "a = c", RuleKind::Axiom);
  auto report = check_proof(proof, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture());
  EXPECT_EQ(report.first_invalid()->id, "1");
}

TEST(CheckProof, RejectsBrokenLink) {
  auto proof = eqmin::testkit::twee_example_proof();
  proof[3].chain[1].dir = Direction::LeftToRight;
  auto report = check_proof(proof, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture());
  EXPECT_EQ(report.first_invalid()->id, "g1");
}

TEST(CheckProof, RejectsWrongConclusionAndEmpty) {
  auto proof = eqmin::testkit::twee_example_proof();
  proof.pop_back();
  auto report = check_proof(proof, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture());
  EXPECT_FALSE(report.accepted());
  EXPECT_FALSE(check_proof({}, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture()).accepted());
}

TEST(CheckProof, OpaqueStepsArePartial) {
  std::vector<ProofStep> proof{step("1", "a = b", RuleKind::Axiom),
                               step("2", "b = a", RuleKind::Opaque, {"1"})};
  auto report = check_proof(proof, {{"ax", Q("a = b")}}, Q("b = a"));
  EXPECT_TRUE(report.accepted());
  EXPECT_FALSE(report.certified());
  EXPECT_TRUE(report.partially_certified());
}

TEST(CheckProof, ZeroLinkChainAndGeneralization) {
  ProofStep g = step("g", "f(a) = f(a)", RuleKind::Chain);
  auto r = check_proof({g}, {}, Q("f(a) = f(a)"));
  EXPECT_TRUE(r.certified()) << r.summary();
  // a proof of ∀x y. x◇y = y also proves ∀x. x◇x = x
  ProofStep ax = step("1", "∀ x y. x◇y = y", RuleKind::Axiom);
  auto r2 = check_proof({ax}, {{"ax", Q("∀ x y. x◇y = y")}}, Q("∀ x. x◇x = x"));
  EXPECT_TRUE(r2.certified()) << r2.summary();
}

TEST(CheckProof, ContrapositiveStep) {
  // direct form of Example 3: 3 from 1 and the tautology, 4 from 2 and 3
  auto s3 = step("3", "h(b,a) = h(a,b)", RuleKind::ParallelSuperposition, {"1"});
  s3.contrapositive = true;
  s3.tautology = E("h(a,a) = h(a,a)");
  auto s4 = step("4", "h(f(b),a) = h(a,f(b))", RuleKind::ParallelSuperposition, {"2", "3"});
  s4.contrapositive = true;
  std::vector<ProofStep> proof{step("1", "a = b", RuleKind::Axiom), step("2", "∀ x. f(x) = x", RuleKind::Axiom),
                               s3, s4};
  auto report = check_proof(proof, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture());
  EXPECT_TRUE(report.certified()) << report.summary();

  proof[2].tautology = E("h(c,c) = h(c,c)");
  EXPECT_FALSE(
      check_proof(proof, eqmin::testkit::example3_axioms(), eqmin::testkit::example3_conjecture()).accepted());
}

TEST(CheckProof, ContrapositiveWithQuantifiers) {
  // h(a,y) = b and h(x,sk) ≠ x give b ≠ a; contrapositively ∀z ∃x. h(x,z) = x
  auto s = step("c", "∀ z. ∃ x. h(x,z) = x", RuleKind::Superposition, {"p", "n"});
  s.contrapositive = true;
  auto n = step("n", "b = a", RuleKind::Opaque);
  n.contrapositive = true;
  std::vector<ProofStep> proof{step("p", "∀ y. h(a,y) = b", RuleKind::Axiom), n, s};
  auto report = check_proof(proof, {{"p", Q("∀ y. h(a,y) = b")}}, Q("∀ z. ∃ x. h(x,z) = x"));
  EXPECT_EQ(report.steps[2].validity, Validity::Valid) << report.summary();
}
