#pragma once

// Running prover backends on generated problems and keeping the best proof
// per lemma. Workers only run backends; one coordinator applies results to
// the lemma table in a fixed order, so runs are reproducible.

#include <atomic>
#include <cmath>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "eqmin/calculus.hpp"
#include "eqmin/errors.hpp"
#include "eqmin/lemma_gen.hpp"
#include "eqmin/process.hpp"
#include "eqmin/proof.hpp"
#include "eqmin/proof_io.hpp"
#include "eqmin/redirect.hpp"
#include "eqmin/search.hpp"
#include "eqmin/tptp.hpp"

namespace eqmin {

enum class BackendKind { Saturation, Completion, Builtin };

inline const char* to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Saturation: return "saturation";
    case BackendKind::Completion: return "completion";
    case BackendKind::Builtin: return "builtin";
  }
  return "builtin";
}

struct BackendSpec {
  std::string name;
  BackendKind kind = BackendKind::Builtin;
  std::string executable;               // external backends only
  double time_limit = 10;               // seconds, external backends
  std::vector<std::string> extra_args;  // "{file}" and "{limit}" are substituted
  std::size_t node_bound = 20000;       // builtin backends
  std::size_t link_bound = 8;           // builtin chain search
};

inline constexpr double kKillGrace = 2.0;

struct RunBudget {
  double overall_limit = 600;
  std::size_t parallel = 0;  // 0: hardware concurrency
};

struct Deadline {
  std::chrono::steady_clock::time_point at = std::chrono::steady_clock::time_point::max();

  static Deadline after(double seconds) {
    Deadline d;
    d.at = std::chrono::steady_clock::now() +
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(seconds));
    return d;
  }
  bool passed() const { return std::chrono::steady_clock::now() >= at; }
};

inline std::size_t worker_count(std::size_t requested) {
  if (requested) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) on up to `threads` threads.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::min(worker_count(threads), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Backends

enum class Outcome { Proved, Timeout, GaveUp, Error };
enum class ErrorKind { None, Process, Parse, Certification };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Proved: return "proved";
    case Outcome::Timeout: return "timeout";
    case Outcome::GaveUp: return "gaveup";
    case Outcome::Error: return "error";
  }
  return "error";
}

inline const char* to_string(ErrorKind e) {
  switch (e) {
    case ErrorKind::None: return "none";
    case ErrorKind::Process: return "process";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Certification: return "certification";
  }
  return "none";
}

/// What a backend reports before certification.
struct Attempt {
  Outcome outcome = Outcome::GaveUp;
  std::optional<DirectProof> proof;
  ErrorKind error = ErrorKind::None;
  std::string detail;
};

class Backend {
 public:
  explicit Backend(BackendSpec spec) : spec_(std::move(spec)) {}
  virtual ~Backend() = default;
  const BackendSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  /// Must be safe to call from several threads at once.
  virtual Attempt attempt(const Problem& p) const = 0;

 private:
  BackendSpec spec_;
};

class BuiltinChainBackend : public Backend {
 public:
  using Backend::Backend;
  Attempt attempt(const Problem& p) const override {
    SearchLimits limits{spec().link_bound, spec().node_bound, 40};
    auto r = builtin_chain_search(p, limits);
    Attempt a;
    if (r.proof) {
      a.outcome = Outcome::Proved;
      a.proof = std::move(r.proof);
    } else {
      a.detail = r.hit_limit ? "search limit reached" : "no chain within the link bound";
    }
    return a;
  }
};

class BuiltinSaturationBackend : public Backend {
 public:
  using Backend::Backend;
  Attempt attempt(const Problem& p) const override {
    SaturationLimits limits;
    limits.valley.max_nodes = spec().node_bound;
    auto r = builtin_saturate(p, limits);
    Attempt a;
    if (!r.tstp) {
      a.detail = r.hit_limit ? "saturation limit reached" : "saturated without refutation";
      return a;
    }
    a.outcome = Outcome::Proved;
    a.proof = to_direct(parse_saturation_proof(*r.tstp), p.conjecture.eq);
    return a;
  }
};

namespace detail {

inline std::filesystem::path scratch_file(const std::string& stem) {
  static std::atomic<unsigned> counter{0};
  std::string name = "eqmin-" + std::to_string(getpid()) + "-" + std::to_string(counter++) + "-" + stem + ".p";
  return std::filesystem::temp_directory_path() / name;
}

inline std::string substitute_placeholders(std::string arg, const std::string& file, const std::string& limit) {
  for (auto [key, value] : {std::pair{std::string("{file}"), file}, std::pair{std::string("{limit}"), limit}}) {
    for (std::size_t at; (at = arg.find(key)) != std::string::npos;) arg.replace(at, key.size(), value);
  }
  return arg;
}

}  // namespace detail

/// An external prover reading a TPTP file and printing an SZS status.
class ExternalBackend : public Backend {
 public:
  using Backend::Backend;

  std::vector<std::string> command_line(const std::string& file) const {
    std::vector<std::string> argv{spec().executable};
    std::string limit = std::to_string(static_cast<long>(std::ceil(spec().time_limit)));
    bool has_file = false;
    for (const auto& a : spec().extra_args) {
      has_file = has_file || a.find("{file}") != std::string::npos;
      argv.push_back(detail::substitute_placeholders(a, file, limit));
    }
    if (!has_file) argv.push_back(file);
    return argv;
  }

  Attempt attempt(const Problem& p) const override {
    Attempt a;
    auto file = detail::scratch_file(p.id.empty() ? "problem" : p.id);
    {
      std::ofstream out(file);
      out << write_tptp(p);
    }
    ProcessResult run;
    try {
      run = run_process(command_line(file.string()), spec().time_limit + kKillGrace);
    } catch (const Error& e) {
      std::filesystem::remove(file);
      a.outcome = Outcome::Error;
      a.error = ErrorKind::Process;
      a.detail = e.what();
      return a;
    }
    std::filesystem::remove(file);
    if (run.killed) {
      a.outcome = Outcome::Timeout;
      return a;
    }
    auto status = szs_status(run.output);
    if (!status) {
      a.outcome = run.exit_code == 0 ? Outcome::GaveUp : Outcome::Error;
      if (a.outcome == Outcome::Error) a.error = ErrorKind::Process;
      a.detail = "no SZS status (exit code " + std::to_string(run.exit_code) + ")";
      return a;
    }
    if (*status == "Timeout" || *status == "ResourceOut") {
      a.outcome = Outcome::Timeout;
      return a;
    }
    if (!szs_proved(*status)) {
      a.detail = *status;
      return a;
    }
    try {
      ParsedDerivation d = spec().kind == BackendKind::Completion ? parse_chain_proof(run.output)
                                                                  : parse_saturation_proof(run.output);
      a.proof = to_direct(d, p.conjecture.eq);
      a.outcome = Outcome::Proved;
    } catch (const Error& e) {
      a.outcome = Outcome::Error;
      a.error = ErrorKind::Parse;
      a.detail = e.what();
    }
    return a;
  }
};

inline std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
  if (spec.kind != BackendKind::Builtin) return std::make_unique<ExternalBackend>(spec);
  if (spec.name == "builtin-chain") return std::make_unique<BuiltinChainBackend>(spec);
  if (spec.name == "builtin-sat") return std::make_unique<BuiltinSaturationBackend>(spec);
  throw Error("unknown builtin backend " + spec.name);
}

inline std::vector<BackendSpec> builtin_backends() {
  BackendSpec sat;
  sat.name = "builtin-sat";
  BackendSpec chain;
  chain.name = "builtin-chain";
  return {sat, chain};
}

struct RunResult {
  Outcome outcome = Outcome::GaveUp;
  std::optional<DirectProof> proof;
  std::size_t length = 0;
  bool certified = false;  // every step reconstructed, no opaque steps
  ErrorKind error = ErrorKind::None;
  std::string detail;
  double seconds = 0;
};

/// Axiom steps name the problem axiom they restate; provers rename them.
inline void name_axiom_steps(DirectProof& proof, const Problem& p) {
  for (auto& s : proof.steps) {
    if (!s.is_axiom() || !s.statement) continue;
    for (const auto& a : p.axioms)
      if (alpha_equal(a.eq, *s.statement)) {
        s.name = a.name;
        break;
      }
  }
}

/// Runs one backend on one problem and certifies the proof it returns.
inline RunResult run_backend(const Backend& b, const Problem& p) {
  RunResult r;
  auto start = std::chrono::steady_clock::now();
  Attempt a;
  try {
    // a conjecture that is one of the axioms needs no prover
    auto same = std::find_if(p.axioms.begin(), p.axioms.end(),
                             [&](const NamedEquation& ax) { return alpha_equal(ax.eq, p.conjecture.eq); });
    if (same != p.axioms.end()) {
      a.outcome = Outcome::Proved;
      a.proof = DirectProof{{detail::axiom_step("A1", *same)}, Origin::Builtin};
    } else {
      a = b.attempt(p);
    }
  } catch (const Error& e) {
    a.outcome = Outcome::Error;
    a.error = ErrorKind::Parse;
    a.detail = e.what();
  }
  r.outcome = a.outcome;
  r.error = a.error;
  r.detail = a.detail;
  if (a.outcome == Outcome::Proved) {
    if (!a.proof) throw Error("backend " + b.name() + " reported a proof without steps");
    name_axiom_steps(*a.proof, p);
    CheckReport report = check_proof(*a.proof, p);
    if (!report.accepted()) {
      r.outcome = Outcome::Error;
      r.error = ErrorKind::Certification;
      r.detail = report.summary();
    } else {
      r.certified = report.certified();
      r.length = a.proof->length();
      r.proof = std::move(a.proof);
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// ---------------------------------------------------------------------------
// Merging proofs

/// Concatenates proofs into one, giving every step a unique id. Equations
/// proved twice are kept once; contrapositive steps are never shared since
/// their checks depend on the exact variable names of their neighbours.
class ProofMerger {
 public:
  /// Appends `p`. Axiom steps whose name is a key of `provided` are not
  /// copied; references to them go to the given merged step instead.
  /// Returns the merged id of `p`'s last step.
  std::string append(const DirectProof& p, const std::map<std::string, std::string>& provided = {}) {
    if (p.steps.empty()) throw Error("cannot merge an empty proof");
    std::map<std::string, std::string> local;
    auto map = [&](std::string& id) {
      auto it = local.find(id);
      if (it != local.end()) id = it->second;
    };
    for (const auto& s : p.steps) {
      if (s.is_axiom()) {
        auto it = provided.find(s.name);
        if (it != provided.end()) {
          local[s.id] = it->second;
          continue;
        }
      }
      ProofStep c = s;
      for (auto& pr : c.premises) map(pr);
      for (auto& l : c.chain) map(l.by);
      std::optional<std::string> key;
      if (c.statement && !c.contrapositive) key = canonical_key(*c.statement);
      if (key) {
        auto it = by_key_.find(*key);
        if (it != by_key_.end()) {
          local[s.id] = it->second;
          continue;
        }
      }
      c.id = fresh_id(s.id);
      local[s.id] = c.id;
      if (key) by_key_[*key] = c.id;
      steps_.push_back(std::move(c));
    }
    return local.at(p.steps.back().id);
  }

  /// Id of a merged non-contrapositive step proving `q`, if any.
  std::optional<std::string> find(const QuantifiedEquation& q) const {
    auto it = by_key_.find(canonical_key(q));
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<ProofStep>& steps() const { return steps_; }

  DirectProof proof(Origin origin = Origin::Segment) const {
    DirectProof p;
    p.steps = steps_;
    p.origin = origin;
    return p;
  }

 private:
  std::string fresh_id(const std::string& want) {
    std::string id = want;
    for (std::size_t n = 2; ids_.count(id); ++n) id = want + "_" + std::to_string(n);
    ids_.insert(id);
    return id;
  }

  std::vector<ProofStep> steps_;
  std::map<std::string, std::string> by_key_;
  std::set<std::string> ids_;
};

/// The stored proof a lemma provides for `stub`: the best one when it proves
/// exactly that statement, else the best proof of the lemma itself.
inline const StoredProof* proof_for(const LemmaRecord& r, const QuantifiedEquation& stub) {
  for (const auto* sp : {&r.best, &r.exact})
    if (*sp && !sp->value().expanded.steps.empty()) {
      const auto& st = sp->value().expanded.steps.back().statement;
      if (st && alpha_equal(*st, stub)) return &sp->value();
    }
  return nullptr;
}

inline bool is_original_axiom(const LemmaTable& t, const ProofStep& s) {
  for (const auto& a : t.problem.axioms)
    if (s.statement && alpha_equal(a.eq, *s.statement)) return true;
  return false;
}

/// Replaces every lemma used as an axiom by the stored proof of that lemma.
/// Stored proofs are already self-contained, so one level suffices.
inline DirectProof expand_small_step(const DirectProof& proof, const LemmaTable& t) {
  ProofMerger m;
  std::map<std::string, std::string> provided;
  for (const auto& s : proof.steps) {
    if (!s.is_axiom() || is_original_axiom(t, s) || provided.count(s.name)) continue;
    const LemmaRecord* r = t.find(s.name);
    if (!r) throw MissingLemmaProof("axiom " + s.name + " is neither an original axiom nor a lemma");
    const StoredProof* sp = proof_for(*r, *s.statement);
    if (!sp) throw MissingLemmaProof("no stored proof of lemma " + s.name);
    provided[s.name] = m.append(sp->expanded, {});
  }
  m.append(proof, provided);
  return m.proof(proof.origin);
}

// ---------------------------------------------------------------------------
// Run log

struct RunRecord {
  std::string problem;
  std::string lemma;
  VariantKind variant = VariantKind::BigStep;
  std::string backend;
  Outcome outcome = Outcome::GaveUp;
  ErrorKind error = ErrorKind::None;
  double seconds = 0;
  std::size_t length = 0;
  std::string detail;
};

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j{{"problem", r.problem}, {"variant", to_string(r.variant)},
                   {"backend", r.backend}, {"outcome", to_string(r.outcome)},
                   {"seconds", r.seconds}, {"length", nullptr}};
  if (r.outcome == Outcome::Proved) j["length"] = r.length;
  if (r.error != ErrorKind::None) j["error"] = to_string(r.error);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

class RunLog {
 public:
  void add(RunRecord r) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(r));
  }
  std::vector<RunRecord> records() const {
    std::lock_guard lock(mutex_);
    return records_;
  }
  std::string jsonl() const {
    std::string out;
    for (const auto& r : records()) out += to_json(r).dump() + "\n";
    return out;
  }

 private:
  mutable std::mutex mutex_;
  std::vector<RunRecord> records_;
};

inline RunRecord log_entry(const Problem& p, const Backend& b, const RunResult& r) {
  return {p.id, p.lemma_id, p.variant, b.name(), r.outcome, r.error, r.seconds, r.length, r.detail};
}

/// Runs every (problem, backend) pair on the pool. Pairs started after the
/// deadline are reported as timeouts without running.
inline std::vector<RunResult> run_all(const std::vector<const Problem*>& problems,
                                      const std::vector<const Backend*>& backends, const Deadline& deadline,
                                      std::size_t threads, RunLog* log) {
  std::vector<RunResult> results(problems.size() * backends.size());
  parallel_for(results.size(), threads, [&](std::size_t i) {
    const Problem& p = *problems[i / backends.size()];
    const Backend& b = *backends[i % backends.size()];
    if (deadline.passed()) {
      results[i].outcome = Outcome::Timeout;
      results[i].detail = "overall budget exhausted";
      return;
    }
    results[i] = run_backend(b, p);
  });
  if (log)
    for (std::size_t i = 0; i < results.size(); ++i)
      log->add(log_entry(*problems[i / backends.size()], *backends[i % backends.size()], results[i]));
  return results;
}

// ---------------------------------------------------------------------------
// Lemma table population

/// Stores each lemma's baseline derivation: its baseline step over stubs for
/// the lemmas it uses, expanded.
inline void seed_baseline(LemmaTable& t) {
  const auto& steps = t.baseline.steps;
  for (auto& r : t.records) {
    const ProofStep& s = steps[r.baseline_index];
    DirectProof raw;
    raw.origin = Origin::Baseline;
    std::set<std::string> seen;
    auto stub = [&](const std::string& id) {
      if (!seen.insert(id).second) return;
      const ProofStep* p = t.baseline.find(id);
      if (!p) throw DanglingReference("baseline step " + s.id + " cites unknown " + id);
      ProofStep a;
      a.id = id;
      a.rule = RuleKind::Axiom;
      a.rule_name = "axiom";
      a.statement = p->statement;
      a.name = p->is_axiom() ? p->name : id;
      raw.steps.push_back(std::move(a));
    };
    // contrapositive premises only check next to their own derivation, so
    // those are copied rather than stubbed
    std::function<void(const ProofStep&)> include = [&](const ProofStep& step) {
      for (const auto& p : step.premises) {
        const ProofStep* q = t.baseline.find(p);
        if (step.contrapositive && q && q->contrapositive) {
          if (seen.insert(p).second) include(*q);
        } else {
          stub(p);
        }
      }
      for (const auto& l : step.chain) stub(l.by);
      raw.steps.push_back(step);
    };
    include(s);
    StoredProof sp;
    sp.expanded = expand_small_step(raw, t);
    sp.raw = std::move(raw);
    sp.length = sp.expanded.length();
    sp.variant = VariantKind::Baseline;
    sp.backend = "baseline";
    t.offer(r.id, std::move(sp));
  }
}

struct ProveOptions {
  Deadline deadline;
  std::size_t threads = 0;
  RunLog* log = nullptr;
};

namespace detail {

struct PendingResult {
  const Problem* problem;
  const Backend* backend;
  RunResult result;
  bool strict = false;  // a re-proof after generalization
};

// Expands, certifies against the original axioms, and offers a proved result.
inline void apply_result(LemmaTable& t, const LemmaRecord& rec, const PendingResult& pr, RunLog* log) {
  if (pr.result.outcome != Outcome::Proved) return;
  StoredProof sp;
  sp.raw = *pr.result.proof;
  try {
    sp.expanded = expand_small_step(sp.raw, t);
  } catch (const MissingLemmaProof& e) {
    if (log) log->add({pr.problem->id, rec.id, pr.problem->variant, pr.backend->name(), Outcome::Error,
                       ErrorKind::Certification, 0, 0, e.what()});
    return;
  }
  Problem original{t.problem.id, t.problem.axioms, pr.problem->conjecture, pr.problem->variant, rec.id, {}};
  CheckReport report = check_proof(sp.expanded, original);
  if (!report.accepted()) {
    if (log) log->add({pr.problem->id, rec.id, pr.problem->variant, pr.backend->name(), Outcome::Error,
                       ErrorKind::Certification, 0, 0, "expanded proof: " + report.summary()});
    return;
  }
  sp.length = sp.expanded.length();
  sp.variant = pr.problem->variant;
  sp.backend = pr.backend->name();
  t.offer(rec.id, std::move(sp), pr.strict);
}

}  // namespace detail

/// Proves every generated problem with every backend and keeps the best
/// proof per lemma. Results are applied lemma by lemma in baseline order;
/// when an abstracted proof wins, later small-step problems assume the
/// generalization and are proved again.
inline void prove_all_variants(LemmaTable& t, const std::vector<const Backend*>& backends, const ProveOptions& opt) {
  if (t.backend_order.empty())
    for (const auto* b : backends) t.backend_order.push_back(b->name());
  std::vector<const Problem*> problems;
  std::vector<std::size_t> owner;
  for (std::size_t k = 0; k < t.records.size(); ++k)
    for (const auto& p : t.records[k].problems) {
      problems.push_back(&p);
      owner.push_back(k);
    }
  auto results = run_all(problems, backends, opt.deadline, opt.threads, opt.log);
  std::vector<std::vector<detail::PendingResult>> pending(t.records.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::size_t j = i / backends.size();
    pending[owner[j]].push_back({problems[j], backends[i % backends.size()], std::move(results[i]), false});
  }

  for (std::size_t k = 0; k < t.records.size(); ++k) {
    for (const auto& pr : pending[k]) detail::apply_result(t, t.records[k], pr, opt.log);
    const LemmaRecord& rec = t.records[k];
    if (!rec.best || rec.best->variant != VariantKind::Abstracted) continue;
    std::vector<std::size_t> affected = propagate_generalization(t, rec.id);
    std::vector<const Problem*> again;
    std::vector<std::size_t> again_owner;
    for (std::size_t j : affected)
      for (const auto& p : t.records[j].problems)
        if (p.variant == VariantKind::SmallStep) {
          again.push_back(&p);
          again_owner.push_back(j);
        }
    auto redo = run_all(again, backends, opt.deadline, opt.threads, opt.log);
    for (std::size_t i = 0; i < redo.size(); ++i) {
      std::size_t j = i / backends.size();
      pending[again_owner[j]].push_back({again[j], backends[i % backends.size()], std::move(redo[i]), true});
    }
  }
}

}  // namespace eqmin
