#include <gtest/gtest.h>

#include "eqmin/lemma_gen.hpp"
#include "eqmin/syntax.hpp"
#include "support/golden.hpp"
#include "support/random_terms.hpp"

using namespace eqmin;
using testkit::step;

namespace {

const char* kLemma1 = "∀ x,y,z,w. w = z◇(w◇((x◇(y◇(y◇y)))◇x))";
const char* kLemma2 = "∀ x,y,z. z = y◇(y◇x)";

std::vector<NamedEquation> sample_axioms() { return {{"A", parse_quantified("∀ x,y,z. x = y◇(x◇(z◇(z◇z)))")}}; }

// A1, then L1..L4 in order, the third one existential, then C.
DirectProof small_baseline() {
  DirectProof p;
  p.steps = {step("a", "∀ x,y. x◇y = y◇x", RuleKind::Axiom),
             step("s1", "∀ x,y. f(x◇y) = f(y◇x)", RuleKind::Superposition, {"a"}),
             step("s2", "∀ x,y. g(x◇y) = g(y◇x)", RuleKind::Superposition, {"a", "s1"}),
             step("s3", "∃ x. f(x) = x", RuleKind::Superposition, {"s2"}),
             step("s4", "∀ x,y,z. h(x◇y,z) = h(y◇x,z)", RuleKind::Superposition, {"s2"}),
             step("s5", "∀ x. k(x) = k(x)", RuleKind::Superposition, {"s4"})};
  p.steps[0].name = "comm";
  return p;
}

Problem small_problem() {
  Problem p;
  p.id = "t1";
  p.axioms = {{"comm", parse_quantified("∀ x,y. x◇y = y◇x")}};
  p.conjecture = {"goal", parse_quantified("∀ x. k(x) = k(x)")};
  return p;
}

const std::set<VariantKind> kAll{VariantKind::BigStep, VariantKind::SmallStep, VariantKind::Abstracted};

}  // namespace

TEST(Abstraction, SampleLemmaOne) {
  auto e = parse_quantified(kLemma1);
  auto c = abstraction_candidates(e);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(to_string(*try_subterm_at(e.body, c[0])), "y◇y");
  auto probs = make_abstracted(sample_axioms(), {"L1", e}, "ex");
  ASSERT_EQ(probs.size(), 1u);
  EXPECT_TRUE(alpha_equal(probs[0].conjecture.eq, parse_quantified("∀ x,y,z,w,v. w = z◇(w◇((x◇(y◇v))◇x))")));
  EXPECT_EQ(probs[0].variant, VariantKind::Abstracted);
  EXPECT_EQ(probs[0].id, "ex_L1_abstracted_1");
  ASSERT_EQ(probs[0].axioms.size(), 1u);
}

TEST(Abstraction, SampleLemmaTwo) {
  auto e = parse_quantified(kLemma2);
  auto c = abstraction_candidates(e);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(to_string(*try_subterm_at(e.body, c[0])), "y◇x");
  auto probs = make_abstracted(sample_axioms(), {"L2", e});
  ASSERT_EQ(probs.size(), 1u);
  EXPECT_TRUE(alpha_equal(probs[0].conjecture.eq, parse_quantified("∀ x,y,z,w. z = y◇w")));
  ASSERT_TRUE(probs[0].abstraction);
  EXPECT_EQ(to_string(probs[0].abstraction->replaced), "y◇x");
}

TEST(Abstraction, NoCandidates) {
  EXPECT_TRUE(abstraction_candidates(parse_quantified("a = b")).empty());
  EXPECT_TRUE(abstraction_candidates(parse_quantified("∀ x. x◇(x◇a) = x")).empty());
  EXPECT_TRUE(make_abstracted({}, {"L", parse_quantified("∀ x. f(x) = x")}).empty());
}

TEST(Abstraction, RepeatedSubtermCountsOnce) {
  auto e = parse_quantified("∀ x,y. (x◇y)◇(x◇y) = y◇x");
  auto c = abstraction_candidates(e);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(to_string(*try_subterm_at(e.body, c[0])), "x◇y");
  EXPECT_EQ(to_string(*try_subterm_at(e.body, c[1])), "y◇x");
  // one occurrence only
  auto probs = make_abstracted({}, {"L", e});
  EXPECT_TRUE(alpha_equal(probs[0].conjecture.eq, parse_quantified("∀ x,y,z. z◇(x◇y) = y◇x")));
}

// Substituting the subterm back gives the lemma, which is then an instance of
// the abstracted conjecture.
TEST(Abstraction, RandomConcretizeInverts) {
  testkit::TermGen gen(11);
  gen.unary = false;
  std::size_t seen = 0;
  for (int i = 0; i < 500; ++i) {
    auto lemma = universal_closure(gen.equation(3));
    for (const auto& p : make_abstracted({}, {"L", lemma})) {
      ++seen;
      EXPECT_TRUE(alpha_equal(concretize(p.conjecture.eq, *p.abstraction), lemma));
      EXPECT_TRUE(is_instance_of(lemma.body, p.conjecture.eq.body));
      EXPECT_FALSE(vars_of(lemma.body).count(p.abstraction->fresh_var));
    }
  }
  EXPECT_GT(seen, 100u);
}

TEST(Variants, BigStep) {
  auto p = make_big_step(sample_axioms(), {"L2", parse_quantified(kLemma2)}, "ex");
  EXPECT_EQ(p.axioms.size(), 1u);
  EXPECT_EQ(p.variant, VariantKind::BigStep);
  EXPECT_EQ(p.id, "ex_L2_bigstep");
  EXPECT_EQ(p.lemma_id, "L2");
}

TEST(Variants, SmallStepSample) {
  DirectProof base;
  base.steps = {step("A", "∀ x,y,z. x = y◇(x◇(z◇(z◇z)))", RuleKind::Axiom),
                step("L1", kLemma1, RuleKind::Superposition, {"A", "A"}),
                step("L2", kLemma2, RuleKind::Superposition, {"A", "L1"})};
  auto p1 = make_small_step(sample_axioms(), base, 0);
  auto b1 = make_big_step(sample_axioms(), {"L1", parse_quantified(kLemma1)});
  EXPECT_EQ(problem_key(p1), problem_key(b1));
  auto p2 = make_small_step(sample_axioms(), base, 1);
  ASSERT_EQ(p2.axioms.size(), 2u);
  EXPECT_EQ(p2.axioms[1].name, "L1");
  EXPECT_TRUE(alpha_equal(p2.axioms[1].eq, parse_quantified(kLemma1)));
  EXPECT_TRUE(alpha_equal(p2.conjecture.eq, parse_quantified(kLemma2)));
  EXPECT_THROW(make_small_step(sample_axioms(), base, 2), Error);
}

TEST(Variants, SmallStepAxiomsGrowAndSkipExistentials) {
  Problem prob = small_problem();
  DirectProof base = relabel(small_baseline(), "C");
  std::vector<std::string> prev;
  for (std::size_t i = 0; i < 5; ++i) {
    auto p = make_small_step(prob.axioms, base, i);
    std::vector<std::string> names;
    for (const auto& a : p.axioms) names.push_back(a.name);
    for (const auto& n : prev) EXPECT_NE(std::find(names.begin(), names.end(), n), names.end());
    for (const auto& a : p.axioms) EXPECT_TRUE(a.eq.universal()) << a.name;
    prev = names;
  }
  EXPECT_EQ(prev, (std::vector<std::string>{"comm", "L1", "L2", "L4"}));
}

TEST(Table, RecordsAndProblems) {
  LemmaTable t = make_table(small_problem(), small_baseline(), kAll);
  ASSERT_EQ(t.records.size(), 5u);
  EXPECT_EQ(t.records.back().id, "C");
  EXPECT_EQ(t.records[0].id, "L1");
  EXPECT_EQ(t.records[0].baseline_index, 1u);
  // L3 is existential
  EXPECT_TRUE(t.records[2].existential());
  EXPECT_TRUE(t.records[2].problems.empty());
  auto count = [](const LemmaRecord& r, VariantKind v) {
    return std::count_if(r.problems.begin(), r.problems.end(), [&](const Problem& p) { return p.variant == v; });
  };
  EXPECT_EQ(count(t.records[0], VariantKind::BigStep), 1);
  EXPECT_EQ(count(t.records[0], VariantKind::SmallStep), 1);
  EXPECT_EQ(count(t.records[0], VariantKind::Abstracted), 2);
  EXPECT_EQ(count(t.records[3], VariantKind::Abstracted), 2);
  // no abstraction of the conjecture
  EXPECT_EQ(count(t.records[4], VariantKind::Abstracted), 0);

  std::set<std::string> ids;
  for (const auto& r : t.records)
    for (const auto& p : r.problems) EXPECT_TRUE(ids.insert(p.id).second) << p.id;

  LemmaTable only_small = make_table(small_problem(), small_baseline(), {VariantKind::SmallStep});
  for (const auto& r : only_small.records)
    for (const auto& p : r.problems) EXPECT_EQ(p.variant, VariantKind::SmallStep);
}

TEST(Table, TieBreaking) {
  std::vector<std::string> order{"builtin-sat", "builtin-chain"};
  StoredProof a, b;
  a.length = 3;
  b.length = 4;
  EXPECT_TRUE(better_proof(a, b, order));
  b.length = 3;
  a.variant = VariantKind::BigStep;
  b.variant = VariantKind::SmallStep;
  EXPECT_TRUE(better_proof(b, a, order));
  b.variant = VariantKind::BigStep;
  a.backend = "builtin-chain";
  b.backend = "builtin-sat";
  EXPECT_TRUE(better_proof(b, a, order));
  a.backend = b.backend;
  a.discovery = 1;
  b.discovery = 2;
  EXPECT_TRUE(better_proof(a, b, order));
  EXPECT_FALSE(better_proof(a, a, order));

  LemmaTable t = make_table(small_problem(), small_baseline(), kAll);
  t.backend_order = order;
  StoredProof p;
  p.length = 5;
  EXPECT_TRUE(t.offer("L1", p));
  p.length = 5;
  EXPECT_FALSE(t.offer("L1", p));  // later discovery loses the tie
  p.length = 4;
  EXPECT_TRUE(t.offer("L1", p));
  EXPECT_EQ(t.find("L1")->best->length, 4u);
  EXPECT_THROW(t.offer("L9", p), Error);
}

TEST(Table, PropagateGeneralization) {
  LemmaTable t = make_table(small_problem(), small_baseline(), kAll);
  StoredProof g;
  g.variant = VariantKind::Abstracted;
  g.length = 1;
  g.expanded.steps = {step("A1", "∀ x,y. x◇y = y◇x", RuleKind::Axiom),
                      step("L2", "∀ x,y,z. g(z) = g(z)", RuleKind::Superposition, {"A1"})};
  t.offer("L2", g);
  auto affected = propagate_generalization(t, "L2");
  // small-step problems for L4 and C assume L2
  EXPECT_EQ(affected, (std::vector<std::size_t>{3, 4}));
  EXPECT_TRUE(t.records[1].generalized());
  for (std::size_t k : affected)
    for (const auto& p : t.records[k].problems)
      for (const auto& a : p.axioms) {
        if (a.name != "L2") continue;
        EXPECT_TRUE(alpha_equal(a.eq, parse_quantified("∀ z. g(z) = g(z)")));
      }
  // the big-step problems are untouched
  for (const auto& p : t.records[3].problems) {
    if (p.variant != VariantKind::BigStep) continue;
    EXPECT_EQ(p.axioms.size(), 1u);
  }
  EXPECT_TRUE(propagate_generalization(t, "L2").empty());
}

TEST(Table, PropagateUnusedOrNotAbstracted) {
  LemmaTable t = make_table(small_problem(), small_baseline(), kAll);
  StoredProof g;
  g.variant = VariantKind::Abstracted;
  g.expanded.steps = {step("C", "∀ x. k(x) = k(x)", RuleKind::Superposition)};
  t.offer("C", g);
  EXPECT_TRUE(propagate_generalization(t, "C").empty());
  StoredProof s;
  s.variant = VariantKind::SmallStep;
  s.expanded.steps = {step("L1", "∀ x. f(x) = f(x)", RuleKind::Superposition)};
  t.offer("L1", s);
  EXPECT_TRUE(propagate_generalization(t, "L1").empty());
  EXPECT_FALSE(t.records[0].generalized());
}
