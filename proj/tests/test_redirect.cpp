#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "eqmin/calculus.hpp"
#include "eqmin/proof_io.hpp"
#include "eqmin/redirect.hpp"
#include "support/golden.hpp"
#include "support/random_terms.hpp"

using namespace eqmin;
using eqmin::testkit::step;

namespace {

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(EQMIN_FIXTURES) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QuantifiedEquation Q(const char* s) { return parse_quantified(s); }

Term replace_constant(const Term& t, const std::string& c, const Term& with) {
  if (t.is_constant()) return t.name() == c ? with : t;
  if (!t.is_app()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(replace_constant(a, c, with));
  return Term::app(t.name(), std::move(args));
}

}  // namespace

TEST(Redirect, Example3FromProverOutput) {
  ParsedDerivation d = parse_saturation_proof(fixture("example3_vampire.tstp"));
  DirectProof p = to_direct(d, testkit::example3_conjecture());
  EXPECT_EQ(p.length(), 2u);
  EXPECT_EQ(p.length(), d.proof_length());
  ASSERT_EQ(p.steps.size(), 4u);
  // the tautology h(a,a) ≠ h(a,a) is not a step of its own
  EXPECT_EQ(p.steps[2].id, "f9");
  ASSERT_TRUE(p.steps[2].tautology);
  EXPECT_EQ(p.steps[2].premises, (std::vector<std::string>{"f6"}));
  EXPECT_EQ(p.steps[3].id, "f8");
  EXPECT_EQ(p.steps[3].premises, (std::vector<std::string>{"f7", "f9"}));
  EXPECT_TRUE(alpha_equal(*p.final_step().statement, testkit::example3_conjecture()));
  auto report = check_proof(p.steps, testkit::example3_axioms(), testkit::example3_conjecture());
  EXPECT_TRUE(report.certified()) << report.summary();
}

TEST(Redirect, CompletionProofIsAlreadyDirect) {
  ParsedDerivation d = parse_chain_proof(fixture("example3_twee.txt"));
  DirectProof p = to_direct(d, testkit::example3_conjecture());
  EXPECT_EQ(p.length(), 4u);
  EXPECT_EQ(p.final_step().id, "g1");
  EXPECT_TRUE(check_proof(p.steps, testkit::example3_axioms(), testkit::example3_conjecture()).certified());
}

TEST(Redirect, UnifiableFinalDisequation) {
  // k(a) ≠ k(b) → c ≠ k(b) → k(X) ≠ k(b) → ⊥ with X = b
  ParsedDerivation d;
  d.steps = {step("1", "k(x) = c", RuleKind::Axiom), step("2", "k(a) ≠ k(b)", RuleKind::NegatedConjecture),
             step("3", "c ≠ k(b)", RuleKind::Superposition, {"1", "2"}),
             step("4", "k(x) ≠ k(b)", RuleKind::Superposition, {"1", "3"}),
             step("5", "⊥", RuleKind::EqualityResolution, {"4"})};
  std::vector<NamedEquation> axioms{{"k", Q("∀ x. k(x) = c")}};
  QuantifiedEquation conj = Q("k(a) = k(b)");
  ASSERT_TRUE(check_proof(d.steps, axioms, conj).certified());
  DirectProof p = to_direct(d, conj);
  EXPECT_EQ(p.length(), 3u);
  EXPECT_EQ(d.proof_length(), 3u);
  const ProofStep& er = p.steps[1];
  EXPECT_EQ(er.rule, RuleKind::EqualityResolution);
  EXPECT_TRUE(er.premises.empty());
  EXPECT_TRUE(alpha_equal(*er.statement, Q("∃ x. k(x) = k(b)")));
  auto report = check_proof(p.steps, axioms, conj);
  EXPECT_TRUE(report.certified()) << report.summary();
}

TEST(Redirect, SkolemsBecomeTheConjecturesVariables) {
  // sK0◇e ≠ sK0 becomes ∀y. y◇e = y, named after the conjecture
  Term sk = Term::constant("sK0", true);
  ParsedDerivation d;
  d.steps = {step("1", "x◇e = x", RuleKind::Axiom), step("2", "a = a", RuleKind::NegatedConjecture),
             step("4", "⊥", RuleKind::EqualityResolution, {"3"})};
  d.steps[1].statement->body = {Term::magma(sk, Term::constant("e")), sk, Polarity::Disequal};
  ProofStep s3 = step("3", "a = a", RuleKind::Superposition, {"1", "2"});
  s3.statement->body = {sk, sk, Polarity::Disequal};
  d.steps.insert(d.steps.begin() + 2, s3);
  QuantifiedEquation conj = Q("∀ y. y◇e = y");
  std::vector<NamedEquation> axioms{{"ax", Q("∀ x. x◇e = x")}};
  ASSERT_TRUE(check_proof(d.steps, axioms, conj).certified()) << check_proof(d.steps, axioms, conj).summary();
  DirectProof p = to_direct(d, conj);
  EXPECT_EQ(p.length(), 1u);
  EXPECT_EQ(to_string(*p.final_step().statement), "∀ y. y◇e = y");
  auto report = check_proof(p.steps, axioms, conj);
  EXPECT_TRUE(report.certified()) << report.summary();
}

TEST(Redirect, TautologicalConjecture) {
  ParsedDerivation d;
  d.steps = {step("1", "f(a) ≠ f(a)", RuleKind::NegatedConjecture),
             step("2", "⊥", RuleKind::EqualityResolution, {"1"})};
  DirectProof p = to_direct(d, Q("f(a) = f(a)"));
  ASSERT_EQ(p.steps.size(), 1u);
  EXPECT_EQ(p.steps[0].rule, RuleKind::Chain);
  EXPECT_EQ(p.length(), 0u);
  EXPECT_EQ(d.proof_length(), 0u);
  EXPECT_TRUE(check_proof(p.steps, {}, Q("f(a) = f(a)")).certified());
}

TEST(Redirect, Errors) {
  ParsedDerivation no_bottom;
  no_bottom.steps = {step("1", "a = b", RuleKind::Axiom), step("2", "a ≠ b", RuleKind::NegatedConjecture)};
  EXPECT_THROW(to_direct(no_bottom, Q("a = b")), NotARefutation);

  ParsedDerivation two_paths;
  two_paths.steps = {step("1", "a ≠ b", RuleKind::NegatedConjecture), step("2", "c ≠ d", RuleKind::NegatedConjecture),
                     step("3", "⊥", RuleKind::Opaque, {"1", "2"})};
  EXPECT_THROW(to_direct(two_paths, Q("a = b")), MultipleGoalPaths);
}

// Random ground refutations: rewrite the left side of the negated conjecture
// until it equals the right side, then close with equality resolution. The
// redirected proof must check and its length must follow the length law.
TEST(Redirect, RandomRefutationsKeepLengthLaw) {
  testkit::TermGen gen(2024);
  gen.unary = false;
  const Term sk = Term::constant("sK0", true);
  int done = 0;
  for (int i = 0; i < 600; ++i) {
    gen.vars = {"x", "y"};
    gen.constants = {"a", "b"};
    std::vector<Equation> rules{gen.equation(2), gen.equation(1)};
    gen.vars = {};
    gen.constants = {"a", "b", "sK0"};
    Term start = gen.ground_term(3);
    start = replace_constant(start, "sK0", sk);
    std::vector<std::tuple<std::size_t, Position, Direction, Term>> walk;
    Term cur = start;
    for (int k = 0; k < 4; ++k) {
      bool moved = false;
      for (const Position& pos : positions(cur)) {
        std::size_t r = gen.pick(2);
        Direction dir = gen.pick(2) ? Direction::LeftToRight : Direction::RightToLeft;
        if (rules[r].source(dir).is_var()) continue;
        try {
          Term next = rewrite_at(cur, pos, rules[r], dir);
          if (!vars_of(next).empty() || next == cur) continue;
          walk.emplace_back(r, pos, dir, next);
          cur = next;
          moved = true;
          break;
        } catch (const NoMatch&) {
        }
      }
      if (!moved) break;
    }
    if (walk.empty() || start == cur) continue;

    ParsedDerivation d;
    ProofStep a1, a2;
    a1.id = "A1";
    a1.statement = universal_closure(rules[0]);
    a2.id = "A2";
    a2.statement = universal_closure(rules[1]);
    ProofStep nc;
    nc.id = "N";
    nc.rule = RuleKind::NegatedConjecture;
    nc.statement = universal_closure(Equation{start, cur, Polarity::Disequal});
    d.steps = {a1, a2, nc};
    Equation di = nc.statement->body;
    std::string prev = "N";
    for (std::size_t k = 0; k < walk.size(); ++k) {
      auto [r, pos, dir, next] = walk[k];
      Position epos = pos;
      epos.path.insert(epos.path.begin(), 0);
      Equation c = apply_superposition(rules[r], di, epos, dir);
      ASSERT_EQ(c.lhs, next);
      ProofStep s;
      s.id = "S" + std::to_string(k);
      s.rule = RuleKind::Superposition;
      s.premises = {r == 0 ? "A1" : "A2", prev};
      s.statement = universal_closure(c);
      d.steps.push_back(s);
      di = c;
      prev = s.id;
    }
    ProofStep bot;
    bot.id = "B";
    bot.rule = RuleKind::EqualityResolution;
    bot.premises = {prev};
    d.steps.push_back(bot);

    std::vector<NamedEquation> axioms{{"r1", *a1.statement}, {"r2", *a2.statement}};
    Term x = Term::var("x");
    QuantifiedEquation conj =
        universal_closure(Equation{replace_constant(start, "sK0", x), replace_constant(cur, "sK0", x)});
    ASSERT_TRUE(check_proof(d.steps, axioms, conj).certified());
    DirectProof p = to_direct(d, conj);
    EXPECT_EQ(p.length(), d.inference_count() - 1);
    EXPECT_EQ(p.length(), d.proof_length());
    EXPECT_TRUE(alpha_equal(*p.final_step().statement, conj));
    auto report = check_proof(p.steps, axioms, conj);
    EXPECT_TRUE(report.certified()) << report.summary() << "\n" << write_native(p);
    ++done;
  }
  EXPECT_GT(done, 60);
}
