#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "json.hpp"

#include "eqmin/cli.hpp"

using namespace eqmin;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(EQMIN_FIXTURES) + "/" + name; }
std::string corpus(const std::string& name) { return std::string(EQMIN_DATA) + "/corpus/" + name; }

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("eqmin_cli_" + name);
  fs::remove_all(p);
  return p;
}

cli::Settings quick(const fs::path& out) {
  cli::Settings s;
  s.out = out;
  s.overall_limit = 60;
  return s;
}

}  // namespace

TEST(Variants, KnownSets) {
  EXPECT_EQ(cli::parse_variants("SA"), (std::set{VariantKind::SmallStep, VariantKind::Abstracted}));
  EXPECT_EQ(cli::parse_variants("BSA").size(), 3u);
  EXPECT_EQ(cli::variants_name(cli::parse_variants("BS")), "BS");
  EXPECT_THROW(cli::parse_variants("AB"), Error);
  EXPECT_THROW(cli::parse_variants(""), Error);
}

TEST(Backends, Parse) {
  auto b = cli::parse_backends("builtin-chain,vampire=/opt/v,twee=/opt/twee", 7);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[1].kind, BackendKind::Saturation);
  EXPECT_EQ(b[1].executable, "/opt/v");
  EXPECT_EQ(b[1].time_limit, 7);
  EXPECT_EQ(b[2].kind, BackendKind::Completion);
  EXPECT_THROW(cli::parse_backends("vampire", 1), Error);
  EXPECT_THROW(cli::parse_backends("=x", 1), Error);
  EXPECT_THROW(cli::parse_backends("", 1), Error);
  EXPECT_THROW(cli::parse_backends("builtin-sat,builtin-sat", 1), Error);
}

TEST(Problems, Implication) {
  auto p = cli::implication_problem("650=>448");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->id, "Equation650_implies_Equation448");
  ASSERT_EQ(p->axioms.size(), 1u);
  EXPECT_EQ(p->axioms[0].name, "eq650");
  EXPECT_EQ(p->conjecture.name, "eq448");
  EXPECT_TRUE(cli::implication_problem("650 ⇒ 448"));
  EXPECT_FALSE(cli::implication_problem("650=448"));
  EXPECT_THROW(cli::implication_problem("1=>2"), Error);
}

TEST(Check, AcceptsFixture) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_check(fixture("example3_vampire.tstp"), fixture("example3.p"), out, err), cli::kOk);
  EXPECT_NE(out.str().find("certified"), std::string::npos);
}

TEST(Check, TamperedPremiseNamesTheStep) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_check(fixture("example3_tampered.tstp"), fixture("example3.p"), out, err), cli::kRejected);
  EXPECT_NE(out.str().find("rejected"), std::string::npos);
  EXPECT_NE(out.str().find("f9"), std::string::npos);
}

TEST(Check, EmptyProofFails) {
  std::ostringstream out, err;
  EXPECT_NE(cli::cmd_check(fixture("empty.txt"), fixture("example3.p"), out, err), cli::kOk);
  EXPECT_FALSE(err.str().empty());
}

TEST(Minimize, WritesOutputs) {
  fs::path dir = scratch("minimize");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_minimize(corpus("p13_right_absorb.p"), quick(dir), out, err), cli::kOk) << err.str();
  for (const char* f : {"p13_right_absorb.native.json", "p13_right_absorb.calc.lean.txt",
                        "p13_right_absorb.compact.lean.txt", "p13_right_absorb.stats.json",
                        "p13_right_absorb.runs.jsonl"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  auto stats = nlohmann::json::parse(cli::read_file(dir / "p13_right_absorb.stats.json"));
  EXPECT_EQ(stats["problem"], "p13_right_absorb");
  EXPECT_EQ(stats["variants"], "SA");
  EXPECT_LE(stats["final_len"].get<std::size_t>(), stats["baseline_len"].get<std::size_t>());

  // the written proof checks against the problem
  std::ostringstream cout, cerr;
  EXPECT_EQ(cli::cmd_check((dir / "p13_right_absorb.native.json").string(), corpus("p13_right_absorb.p"), cout, cerr),
            cli::kOk)
      << cout.str();
  fs::remove_all(dir);
}

TEST(Minimize, NoProofPrintsHint) {
  fs::path dir = scratch("noproof");
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_minimize(fixture("unprovable.p"), quick(dir), out, err), cli::kNoProof);
  EXPECT_NE(err.str().find("--baseline"), std::string::npos);
}

TEST(Minimize, BaselineFromTranscript) {
  fs::path dir = scratch("baseline");
  cli::Settings s = quick(dir);
  s.baseline = fixture("example3_vampire.tstp");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_minimize(fixture("example3.p"), s, out, err), cli::kOk) << err.str();
  EXPECT_TRUE(fs::exists(dir / "example3.native.json"));
  fs::remove_all(dir);
}

TEST(Minimize, BadArgumentsAreUsageErrors) {
  cli::Settings s = quick(scratch("usage"));
  s.backends = "nonsense";
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_minimize(fixture("example3.p"), s, out, err), cli::kUsage);
  EXPECT_EQ(cli::cmd_minimize(fixture("missing.p"), quick(scratch("usage")), out, err), cli::kUsage);
}

TEST(Batch, EmptyDirectory) {
  fs::path in = scratch("empty_in"), out_dir = scratch("empty_out");
  fs::create_directories(in);
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_batch(in.string(), quick(out_dir), out, err), cli::kOk);
  EXPECT_EQ(cli::read_file(out_dir / "batch.csv"), "problem,config,baseline_len,final_len,reduction_pct,status\n");
  fs::remove_all(in);
  fs::remove_all(out_dir);
}

TEST(Batch, CorpusIsReproducible) {
  fs::path a = scratch("batch_a"), b = scratch("batch_b");
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_batch(std::string(EQMIN_DATA) + "/corpus", quick(a), out, err), cli::kOk);
  ASSERT_EQ(cli::cmd_batch(std::string(EQMIN_DATA) + "/corpus", quick(b), out, err), cli::kOk);
  std::string csv = cli::read_file(a / "batch.csv");
  EXPECT_EQ(csv, cli::read_file(b / "batch.csv"));

  auto report = nlohmann::json::parse(cli::read_file(a / "batch.json"));
  for (const auto& row : report["rows"]) {
    EXPECT_TRUE(row["status"] == "minimized" || row["status"] == "baseline") << row.dump();
    EXPECT_LE(row["final_len"].get<std::size_t>(), row["baseline_len"].get<std::size_t>());
  }
  EXPECT_GT(report["all"]["reduction_pct"].get<double>(), 0.0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Batch, SummaryFilter) {
  cli::BatchReport r;
  r.rows = {{"a", "SA", 20, 10, 50, "minimized"}, {"b", "SA", 4, 4, 0, "baseline"}, {"c", "SA", 0, 0, 0, "error"}};
  auto all = r.summary();
  EXPECT_EQ(all.problems, 2u);
  EXPECT_DOUBLE_EQ(all.average_before, 12.0);
  EXPECT_DOUBLE_EQ(all.reduction_pct, 100.0 * 10 / 24);
  auto big = r.summary(15);
  EXPECT_EQ(big.problems, 1u);
  EXPECT_DOUBLE_EQ(big.reduction_pct, 50.0);
  EXPECT_EQ(cli::batch_csv(r).substr(cli::batch_csv(r).find('\n') + 1, 28), "a,SA,20,10,50.00,minimized\nb");
}
