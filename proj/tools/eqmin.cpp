#include <iostream>

#include "CLI11.hpp"

#include "eqmin/cli.hpp"

using namespace eqmin;

namespace {

// Flags shared by minimize and batch; every one can also come from the
// environment as EQMIN_<NAME>.
void add_settings(CLI::App& cmd, cli::Settings& s, std::string& variants) {
  cmd.add_option("--variants", variants, "problem variants: BA, SA, BS or BSA")
      ->envname("EQMIN_VARIANTS")
      ->capture_default_str();
  cmd.add_option("--landing-candidates", s.landing_candidates, "number of landing lemmas to try")
      ->envname("EQMIN_LANDING_CANDIDATES")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--time-limit", s.time_limit, "seconds per prover call")
      ->envname("EQMIN_TIME_LIMIT")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--overall-limit", s.overall_limit, "seconds per problem")
      ->envname("EQMIN_OVERALL_LIMIT")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--backends", s.backends, "builtin, or name=path[,name=path...]")
      ->envname("EQMIN_BACKENDS")
      ->capture_default_str();
  cmd.add_option("--parallel", s.parallel, "worker threads (0: one per core)")
      ->envname("EQMIN_PARALLEL")
      ->capture_default_str();
  cmd.add_option("--out", s.out, "output directory")->envname("EQMIN_OUT")->capture_default_str();
  cmd.add_option("--seed", s.seed, "recorded with the statistics")->envname("EQMIN_SEED")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eqmin: shorter proofs for equational problems"};
  app.require_subcommand(1);

  cli::Settings settings;
  std::string variants = "SA";
  std::string baseline;
  std::string problem, proof_file, corpus;

  auto* minimize = app.add_subcommand("minimize", "minimize the proof of one problem");
  minimize->add_option("problem", problem, "TPTP file or implication id such as 650=>448")->required();
  add_settings(*minimize, settings, variants);
  minimize->add_option("--baseline", baseline, "baseline prover transcript or native proof")
      ->envname("EQMIN_BASELINE")
      ->check(CLI::ExistingFile);

  auto* check = app.add_subcommand("check", "check a proof against a problem");
  check->add_option("proof", proof_file, "native, TSTP or chain proof")->required()->check(CLI::ExistingFile);
  check->add_option("problem", problem, "TPTP file or implication id")->required();

  auto* batch = app.add_subcommand("batch", "minimize every problem of a directory");
  batch->add_option("corpus", corpus, "directory of .p files")->required();
  add_settings(*batch, settings, variants);
  batch->add_option("--min-baseline-steps", settings.min_baseline_steps, "threshold of the filtered summary")
      ->envname("EQMIN_MIN_BASELINE_STEPS")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    settings.variants = cli::parse_variants(variants);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  }
  if (!baseline.empty()) settings.baseline = baseline;

  if (*minimize) return cli::cmd_minimize(problem, settings, std::cout, std::cerr);
  if (*check) return cli::cmd_check(proof_file, problem, std::cout, std::cerr);
  return cli::cmd_batch(corpus, settings, std::cout, std::cerr);
}
