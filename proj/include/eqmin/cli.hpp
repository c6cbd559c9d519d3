#pragma once

// What the command-line tool does, minus argument parsing: resolving
// problems and backends, the minimize and check commands, and batch runs
// over a directory of problems.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "eqmin/calculus.hpp"
#include "eqmin/combine.hpp"
#include "eqmin/emit.hpp"
#include "eqmin/errors.hpp"
#include "eqmin/orchestrator.hpp"
#include "eqmin/proof_io.hpp"
#include "eqmin/redirect.hpp"
#include "eqmin/syntax.hpp"
#include "eqmin/tptp.hpp"

namespace eqmin::cli {

/// "SA", "BSA", ... to the variant set. Throws Error on anything else.
inline std::set<VariantKind> parse_variants(const std::string& text) {
  static const std::map<std::string, std::set<VariantKind>> known{
      {"BA", {VariantKind::BigStep, VariantKind::Abstracted}},
      {"SA", {VariantKind::SmallStep, VariantKind::Abstracted}},
      {"BS", {VariantKind::BigStep, VariantKind::SmallStep}},
      {"BSA", {VariantKind::BigStep, VariantKind::SmallStep, VariantKind::Abstracted}},
  };
  auto it = known.find(text);
  if (it == known.end()) throw Error("unknown variant set '" + text + "' (expected BA, SA, BS or BSA)");
  return it->second;
}

inline std::string variants_name(const std::set<VariantKind>& v) {
  std::string s;
  if (v.count(VariantKind::BigStep)) s += "B";
  if (v.count(VariantKind::SmallStep)) s += "S";
  if (v.count(VariantKind::Abstracted)) s += "A";
  return s;
}

/// Command-line arguments for a prover, by the name it is registered under.
inline std::vector<std::string> default_arguments(const std::string& name) {
  if (name.find("vampire") != std::string::npos)
    return {"--input_syntax", "tptp", "--proof", "tptp", "--output_axiom_names", "on", "-t", "{limit}", "{file}"};
  if (name.find("twee") != std::string::npos) return {"{file}"};
  return {"{file}"};
}

/// "builtin", or a comma-separated list of name=path and builtin names.
inline std::vector<BackendSpec> parse_backends(const std::string& text, double time_limit) {
  std::vector<BackendSpec> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (item == "builtin") {
      for (auto& b : builtin_backends()) out.push_back(b);
      continue;
    }
    if (item == "builtin-sat" || item == "builtin-chain") {
      BackendSpec b;
      b.name = item;
      out.push_back(b);
      continue;
    }
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw Error("backend '" + item + "' is not of the form name=path");
    BackendSpec b;
    b.name = item.substr(0, eq);
    b.executable = item.substr(eq + 1);
    b.kind = b.name.find("twee") != std::string::npos ? BackendKind::Completion : BackendKind::Saturation;
    b.time_limit = time_limit;
    b.extra_args = default_arguments(b.name);
    out.push_back(b);
  }
  if (out.empty()) throw Error("no backends given");
  std::set<std::string> names;
  for (const auto& b : out)
    if (!names.insert(b.name).second) throw Error("backend '" + b.name + "' given twice");
  return out;
}

// ---------------------------------------------------------------------------
// Problems

/// Magma laws referred to by number in implication ids.
inline const std::map<int, std::string>& bundled_equations() {
  static const std::map<int, std::string> table{
      {448, "∀ x,y,z. x = x◇(y◇(z◇(x◇z)))"},
      {650, "∀ x,y,z. x = x◇(y◇((z◇x)◇y))"},
      {947, "∀ x,y,z. x = y◇((z◇x)◇(y◇x))"},
      {3897, "∀ x,y,z. x◇x = (y◇(z◇x))◇x"},
  };
  return table;
}

/// "650=>448" (or with ⇒) to the problem "law 650 implies law 448".
inline std::optional<Problem> implication_problem(const std::string& text) {
  static const std::regex re(R"(^\s*(\d+)\s*(?:=>|⇒)\s*(\d+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) return std::nullopt;
  int from = std::stoi(m[1]), to = std::stoi(m[2]);
  const auto& table = bundled_equations();
  for (int n : {from, to})
    if (!table.count(n)) throw Error("equation " + std::to_string(n) + " is not in the bundled table");
  Problem p;
  p.id = "Equation" + std::to_string(from) + "_implies_Equation" + std::to_string(to);
  p.axioms = {{"eq" + std::to_string(from), parse_quantified(table.at(from))}};
  p.conjecture = {"eq" + std::to_string(to), parse_quantified(table.at(to))};
  return p;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

/// An implication id or a TPTP file.
inline Problem load_problem(const std::string& arg) {
  if (auto p = implication_problem(arg)) return *p;
  return read_tptp(read_file(arg), std::filesystem::path(arg).stem().string());
}

/// A proof file in any supported format: native JSON, a TSTP refutation, or
/// a chain proof. Refutations are returned as parsed.
struct LoadedProof {
  std::optional<DirectProof> direct;
  std::optional<ParsedDerivation> derivation;
};

inline LoadedProof parse_proof_text(const std::string& text) {
  LoadedProof out;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    out.direct = read_native(text);
    return out;
  }
  if (text.find("cnf(") != std::string::npos || text.find("fof(") != std::string::npos)
    out.derivation = parse_saturation_proof(text);
  else
    out.derivation = parse_chain_proof(text);
  return out;
}

/// A baseline for `problem` from a prover transcript or native file.
inline DirectProof load_baseline(const std::filesystem::path& path, const Problem& problem) {
  LoadedProof lp = parse_proof_text(read_file(path));
  DirectProof d = lp.direct ? *lp.direct : to_direct(*lp.derivation, problem.conjecture.eq);
  name_axiom_steps(d, problem);
  d.origin = Origin::Baseline;
  return d;
}

// ---------------------------------------------------------------------------
// Commands

struct Settings {
  std::set<VariantKind> variants{VariantKind::SmallStep, VariantKind::Abstracted};
  std::size_t landing_candidates = 6;
  double time_limit = 10;
  double overall_limit = 600;
  std::string backends = "builtin";
  std::size_t parallel = 0;
  std::optional<std::filesystem::path> baseline;
  std::filesystem::path out = ".";
  std::size_t min_baseline_steps = 15;
  unsigned long seed = 0;
};

inline MinimizeConfig minimize_config(const Settings& s) {
  if (s.variants.empty()) throw Error("empty variant set");
  if (!(s.time_limit > 0) || !(s.overall_limit > 0)) throw Error("time limits must be positive");
  MinimizeConfig c;
  c.variants = s.variants;
  c.landing_candidates = s.landing_candidates;
  c.budget.overall_limit = s.overall_limit;
  c.budget.parallel = s.parallel;
  return c;
}

struct Backends {
  std::vector<std::unique_ptr<Backend>> owned;
  std::vector<const Backend*> list() const {
    std::vector<const Backend*> out;
    for (const auto& b : owned) out.push_back(b.get());
    return out;
  }
};

inline Backends make_backends(const Settings& s) {
  Backends b;
  for (const auto& spec : parse_backends(s.backends, s.time_limit)) b.owned.push_back(make_backend(spec));
  return b;
}

enum ExitCode { kOk = 0, kRejected = 1, kUsage = 2, kNoProof = 3 };

/// Minimizes one problem and writes the proof files, statistics and run log
/// to the output directory.
inline int cmd_minimize(const std::string& problem_arg, const Settings& s, std::ostream& out, std::ostream& err) {
  Problem problem;
  Backends backends;
  MinimizeConfig config;
  try {
    problem = load_problem(problem_arg);
    backends = make_backends(s);
    config = minimize_config(s);
    if (s.baseline) config.baseline = load_baseline(*s.baseline, problem);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  RunLog log;
  MinimizeResult r;
  try {
    r = minimize(problem, backends.list(), config, &log);
  } catch (const NoBaseline& e) {
    err << "error: no baseline proof: " << e.what() << "\n"
        << "hint: supply a prover transcript with --baseline <file>\n";
    return kNoProof;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kNoProof;
  }
  std::filesystem::create_directories(s.out);
  EmitOptions opt;
  opt.theorem = problem.id;
  opt.conjecture = problem.conjecture.eq;
  auto written = write_outputs(r.proof, s.out, opt);
  nlohmann::json stats = to_json(r.stats);
  stats["problem"] = problem.id;
  stats["variants"] = variants_name(s.variants);
  stats["seed"] = s.seed;
  write_file(s.out / (problem.id + ".stats.json"), stats.dump(2) + "\n");
  write_file(s.out / (problem.id + ".runs.jsonl"), log.jsonl());
  out << problem.id << ": " << r.stats.baseline_len << " -> " << r.stats.final_len << " steps ("
      << r.stats.source << (r.stats.certified ? "" : ", partially certified") << ")\n";
  for (const auto& p : written) out << "  wrote " << p.string() << "\n";
  return kOk;
}

/// Checks a proof against a problem; prints the first invalid step.
inline int cmd_check(const std::string& proof_file, const std::string& problem_arg, std::ostream& out,
                     std::ostream& err) {
  Problem problem;
  LoadedProof lp;
  try {
    problem = load_problem(problem_arg);
    lp = parse_proof_text(read_file(proof_file));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  const std::vector<ProofStep>& steps = lp.direct ? lp.direct->steps : lp.derivation->steps;
  CheckReport report = check_proof(steps, problem.axioms, problem.conjecture.eq);
  if (!report.accepted()) {
    out << "rejected: " << report.summary() << "\n";
    return kRejected;
  }
  out << report.summary() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// Batch

struct BatchRow {
  std::string problem;
  std::string config;
  std::size_t baseline_len = 0;
  std::size_t final_len = 0;
  double reduction_pct = 0;
  std::string status;  // minimized, baseline, no-baseline, error
};

struct BatchReport {
  std::vector<BatchRow> rows;
  std::size_t min_baseline_steps = 15;

  struct Summary {
    std::size_t problems = 0;
    double average_before = 0;
    double average_after = 0;
    double reduction_pct = 0;
  };

  /// Over the problems with a proof, optionally only those whose baseline
  /// has at least `min_steps` steps.
  Summary summary(std::size_t min_steps = 0) const {
    Summary s;
    double before = 0, after = 0;
    for (const auto& r : rows) {
      if (r.status != "minimized" && r.status != "baseline") continue;
      if (r.baseline_len < min_steps) continue;
      ++s.problems;
      before += static_cast<double>(r.baseline_len);
      after += static_cast<double>(r.final_len);
    }
    if (s.problems) {
      s.average_before = before / static_cast<double>(s.problems);
      s.average_after = after / static_cast<double>(s.problems);
    }
    s.reduction_pct = before > 0 ? 100.0 * (before - after) / before : 0.0;
    return s;
  }
};

inline std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Timing-free, sorted, so that equal runs give equal bytes.
inline std::string batch_csv(const BatchReport& b) {
  std::vector<BatchRow> rows = b.rows;
  std::sort(rows.begin(), rows.end(),
            [](const BatchRow& x, const BatchRow& y) { return std::tie(x.problem, x.config) < std::tie(y.problem, y.config); });
  std::string out = "problem,config,baseline_len,final_len,reduction_pct,status\n";
  for (const auto& r : rows)
    out += r.problem + "," + r.config + "," + std::to_string(r.baseline_len) + "," + std::to_string(r.final_len) +
           "," + fixed2(r.reduction_pct) + "," + r.status + "\n";
  return out;
}

inline nlohmann::json summary_json(const BatchReport::Summary& s) {
  return {{"problems", s.problems},
          {"average_before", s.average_before},
          {"average_after", s.average_after},
          {"reduction_pct", s.reduction_pct}};
}

inline nlohmann::json batch_json(const BatchReport& b) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : b.rows)
    rows.push_back({{"problem", r.problem},
                    {"config", r.config},
                    {"baseline_len", r.baseline_len},
                    {"final_len", r.final_len},
                    {"reduction_pct", r.reduction_pct},
                    {"status", r.status}});
  return {{"rows", rows},
          {"all", summary_json(b.summary())},
          {"min_baseline_steps", b.min_baseline_steps},
          {"filtered", summary_json(b.summary(b.min_baseline_steps))}};
}

inline std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && (e.path().extension() == ".p" || e.path().extension() == ".tptp"))
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

/// Minimizes every problem of a directory. Problems run one after another;
/// each uses the worker pool internally. Failures become rows.
inline BatchReport run_batch(const std::filesystem::path& dir, const Settings& s, std::ostream& err) {
  BatchReport report;
  report.min_baseline_steps = s.min_baseline_steps;
  Backends backends = make_backends(s);
  MinimizeConfig config = minimize_config(s);
  std::string config_name = variants_name(s.variants);
  for (const auto& file : corpus_files(dir)) {
    BatchRow row;
    row.problem = file.stem().string();
    row.config = config_name;
    try {
      Problem p = read_tptp(read_file(file), row.problem);
      MinimizeResult r = minimize(p, backends.list(), config);
      row.baseline_len = r.stats.baseline_len;
      row.final_len = r.stats.final_len;
      row.reduction_pct = r.stats.reduction_pct;
      row.status = r.stats.final_len < r.stats.baseline_len ? "minimized" : "baseline";
    } catch (const NoBaseline& e) {
      row.status = "no-baseline";
      err << row.problem << ": no baseline: " << e.what() << "\n";
    } catch (const Error& e) {
      row.status = "error";
      err << row.problem << ": " << e.what() << "\n";
    }
    report.rows.push_back(row);
  }
  return report;
}

inline int cmd_batch(const std::string& dir, const Settings& s, std::ostream& out, std::ostream& err) {
  BatchReport report;
  try {
    report = run_batch(dir, s, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  std::filesystem::create_directories(s.out);
  write_file(s.out / "batch.csv", batch_csv(report));
  write_file(s.out / "batch.json", batch_json(report).dump(2) + "\n");
  auto all = report.summary();
  auto filtered = report.summary(s.min_baseline_steps);
  out << "problems with a proof: " << all.problems << " of " << report.rows.size() << "\n"
      << "average before " << fixed2(all.average_before) << ", after " << fixed2(all.average_after) << " ("
      << fixed2(all.reduction_pct) << "% shorter)\n"
      << "baselines of at least " << s.min_baseline_steps << " steps: " << filtered.problems << ", average before "
      << fixed2(filtered.average_before) << ", after " << fixed2(filtered.average_after) << "\n";
  return kOk;
}

}  // namespace eqmin::cli
