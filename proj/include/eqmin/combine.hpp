#pragma once

// Recombining stored lemma proofs into a shorter proof of the conjecture.
// For a landing lemma near the end of the baseline and a kickoff lemma it
// depends on, the result is three segments: axioms to kickoff, kickoff to
// landing, landing to conjecture. The shortest certified combination wins.

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "eqmin/calculus.hpp"
#include "eqmin/errors.hpp"
#include "eqmin/lemma_gen.hpp"
#include "eqmin/orchestrator.hpp"
#include "eqmin/proof.hpp"

namespace eqmin {

/// Ids of the last `k` non-axiom steps of the baseline, latest first.
inline std::vector<std::string> candidate_landings(const DirectProof& baseline, std::size_t k) {
  std::vector<std::string> out;
  for (auto it = baseline.steps.rbegin(); it != baseline.steps.rend() && out.size() < k; ++it)
    if (!it->is_axiom() && !it->bottom()) out.push_back(it->id);
  return out;
}

// ---------------------------------------------------------------------------
// Dependency graph

struct DagNode {
  std::string id;
  QuantifiedEquation statement;
  bool axiom = false;
  std::vector<std::string> deps;  // direct dependencies, by node id
  // Axiom stubs for the dependencies (id and name are the node id), then
  // the steps deriving `statement`. For an original axiom, one axiom step.
  DirectProof derivation;
};

struct DependencyGraph {
  std::string landing;
  std::vector<DagNode> nodes;  // dependencies before dependents; landing last

  const DagNode* find(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
  const DagNode& at(const std::string& id) const {
    if (const DagNode* n = find(id)) return *n;
    throw Error("no node " + id + " in the dependency graph");
  }

  /// The node and everything it depends on, dependencies first.
  std::vector<std::string> closure(const std::string& id) const {
    std::set<std::string> want{id};
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it)
      if (want.count(it->id))
        for (const auto& d : it->deps) want.insert(d);
    std::vector<std::string> out;
    for (const auto& n : nodes)
      if (want.count(n.id)) out.push_back(n.id);
    return out;
  }

  /// Self-contained proof of a node.
  DirectProof proof_of(const std::string& id) const {
    ProofMerger m;
    std::map<std::string, std::string> provided;
    for (const auto& n : closure(id)) provided[n] = m.append(at(n).derivation, provided);
    return prune_unreachable(m.proof(Origin::Segment));
  }

  std::size_t length_of(const std::string& id) const { return proof_of(id).length(); }
};

namespace detail {

inline ProofStep stub_step(const std::string& id, const QuantifiedEquation& statement) {
  ProofStep s;
  s.id = id;
  s.name = id;
  s.rule = RuleKind::Axiom;
  s.rule_name = "axiom";
  s.statement = statement;
  return s;
}

inline bool usable_lemma(const ProofStep& s) {
  return !s.is_axiom() && s.statement && s.statement->universal() && s.statement->body.positive() &&
         !s.contrapositive;
}

class DagBuilder {
 public:
  explicit DagBuilder(const LemmaTable& t) : t_(t) {}

  DependencyGraph build(const std::string& landing) {
    const LemmaRecord* r = t_.find(landing);
    if (!r) throw Error("unknown landing lemma " + landing);
    g_.landing = visit(*r, r->axiom_form);
    merge_alpha_equal();
    return std::move(g_);
  }

 private:
  // Node of the original axiom `s` restates, named after that axiom.
  std::string axiom_node(const ProofStep& s) {
    const NamedEquation* ax = nullptr;
    for (const auto& a : t_.problem.axioms)
      if (alpha_equal(a.eq, *s.statement)) {
        ax = &a;
        break;
      }
    std::string id = "ax:" + ax->name;
    if (!g_.find(id)) {
      DagNode n;
      n.id = id;
      n.axiom = true;
      n.statement = ax->eq;
      ProofStep a = s;
      a.id = id;
      a.name = ax->name;
      a.statement = ax->eq;
      n.derivation.steps.push_back(std::move(a));
      g_.nodes.push_back(std::move(n));
    }
    return id;
  }

  // Node for a lemma used with the given statement (the lemma itself or the
  // generalization that replaced it).
  std::string visit(const LemmaRecord& r, const QuantifiedEquation& as) {
    const StoredProof* sp = proof_for(r, as);
    if (!sp) throw MissingLemmaProof("no stored proof of lemma " + r.id);
    std::string id = sp == &*r.best ? r.id : r.id + "#exact";
    if (g_.find(id)) return id;
    if (!active_.insert(id).second) throw CycleDetected("lemma " + r.id + " depends on itself");

    const DirectProof& raw = sp->raw;
    // where each step of the raw proof lives in the graph
    std::map<std::string, std::string> node_of;
    for (const auto& s : raw.steps) {
      if (!s.is_axiom()) continue;
      if (is_original_axiom(t_, s)) {
        node_of[s.id] = axiom_node(s);
        continue;
      }
      const LemmaRecord* dep = t_.find(s.name);
      if (!dep) throw MissingLemmaProof("axiom " + s.name + " is neither an original axiom nor a lemma");
      node_of[s.id] = visit(*dep, *s.statement);
    }
    // a lemma restating an axiom or another lemma is that node
    if (raw.steps.empty()) throw MissingLemmaProof("empty stored proof of lemma " + r.id);
    if (raw.steps.back().is_axiom()) {
      active_.erase(id);
      return node_of.at(raw.steps.back().id);
    }
    // every intermediate lemma of a small-step proof is a node of its own
    bool split = sp->variant == VariantKind::SmallStep || sp->variant == VariantKind::Segment;
    for (std::size_t i = 0; i + 1 < raw.steps.size(); ++i) {
      const ProofStep& s = raw.steps[i];
      if (!split || !usable_lemma(s)) continue;
      std::string sub = id + "/" + s.id;
      g_.nodes.push_back(make_node(sub, {s}, node_of));
      node_of[s.id] = sub;
    }
    std::vector<ProofStep> own;
    for (const auto& s : raw.steps)
      if (!node_of.count(s.id)) own.push_back(s);
    g_.nodes.push_back(make_node(id, own, node_of));
    active_.erase(id);
    return id;
  }

  DagNode make_node(const std::string& id, const std::vector<ProofStep>& steps,
                    const std::map<std::string, std::string>& node_of) {
    DagNode n;
    n.id = id;
    n.statement = *steps.back().statement;
    // local steps get ids that cannot clash with node ids
    std::map<std::string, std::string> local;
    for (std::size_t i = 0; i < steps.size(); ++i)
      local[steps[i].id] = i + 1 == steps.size() ? id : id + "~" + steps[i].id;
    std::vector<ProofStep> body;
    for (ProofStep s : steps) {
      auto use = [&](std::string& ref) {
        if (auto it = node_of.find(ref); it != node_of.end()) {
          ref = it->second;
          if (std::find(n.deps.begin(), n.deps.end(), ref) == n.deps.end()) n.deps.push_back(ref);
        } else if (auto jt = local.find(ref); jt != local.end()) {
          ref = jt->second;
        }
      };
      for (auto& p : s.premises) use(p);
      for (auto& l : s.chain) use(l.by);
      s.id = local.at(s.id);
      body.push_back(std::move(s));
    }
    for (const auto& d : n.deps) n.derivation.steps.push_back(stub_step(d, g_.at(d).statement));
    for (auto& s : body) n.derivation.steps.push_back(std::move(s));
    return n;
  }

  // Lemmas equal up to variable names become one node, the one with the
  // shortest proof. A merge that would create a cycle is skipped.
  void merge_alpha_equal() {
    std::map<std::string, std::vector<std::string>> groups;
    for (const auto& n : g_.nodes)
      if (n.statement.universal() && n.statement.body.positive())
        groups[canonical_key(n.statement)].push_back(n.id);
    std::map<std::string, std::string> to;
    for (const auto& [key, ids] : groups) {
      if (ids.size() < 2) continue;
      std::string rep = ids.front();
      auto rank = [&](const std::string& id) {
        const DagNode& n = g_.at(id);
        return std::pair{n.axiom ? 0 : 1, g_.length_of(id)};
      };
      for (const auto& id : ids)
        if (rank(id) < rank(rep)) rep = id;
      auto rep_closure = g_.closure(rep);
      for (const auto& id : ids) {
        if (id == rep || std::find(rep_closure.begin(), rep_closure.end(), id) != rep_closure.end()) continue;
        to[id] = rep;
      }
    }
    if (to.empty()) return;
    for (auto& n : g_.nodes) {
      for (auto& d : n.deps)
        if (to.count(d)) d = to.at(d);
      std::vector<std::string> unique;
      for (const auto& d : n.deps)
        if (std::find(unique.begin(), unique.end(), d) == unique.end()) unique.push_back(d);
      n.deps = unique;
      std::vector<ProofStep> steps;
      std::set<std::string> stubs;
      for (auto s : n.derivation.steps) {
        if (s.is_axiom() && !n.axiom) {
          if (to.count(s.id)) s = stub_step(to.at(s.id), g_.at(to.at(s.id)).statement);
          if (!stubs.insert(s.id).second) continue;
        } else {
          for (auto& p : s.premises)
            if (to.count(p)) p = to.at(p);
          for (auto& l : s.chain)
            if (to.count(l.by)) l.by = to.at(l.by);
        }
        steps.push_back(std::move(s));
      }
      n.derivation.steps = std::move(steps);
    }
    // keep what the landing still reaches, in dependency order
    if (to.count(g_.landing)) g_.landing = to.at(g_.landing);
    std::vector<std::string> order;
    std::set<std::string> done, active;
    std::function<void(const std::string&)> dfs = [&](const std::string& id) {
      if (done.count(id)) return;
      if (!active.insert(id).second) throw CycleDetected("cycle through " + id + " after merging");
      for (const auto& d : g_.at(id).deps) dfs(d);
      active.erase(id);
      done.insert(id);
      order.push_back(id);
    };
    dfs(g_.landing);
    std::vector<DagNode> kept;
    for (const auto& id : order) kept.push_back(g_.at(id));
    g_.nodes = std::move(kept);
  }

  const LemmaTable& t_;
  DependencyGraph g_;
  std::set<std::string> active_;
};

}  // namespace detail

/// Dependency graph of a lemma: edges follow the stored shortest proofs.
inline DependencyGraph build_dag(const std::string& landing, const LemmaTable& t) {
  return detail::DagBuilder(t).build(landing);
}

/// Kickoff candidates: the lemmas of the graph other than the landing, in
/// dependency order; the landing itself when there are none.
inline std::vector<std::string> kickoff_candidates(const DependencyGraph& g, std::size_t cap = 0) {
  std::vector<std::string> out;
  for (const auto& n : g.nodes)
    if (!n.axiom && n.id != g.landing && n.statement.universal() && n.statement.body.positive()) out.push_back(n.id);
  if (out.empty()) out.push_back(g.landing);
  if (cap && out.size() > cap) out.resize(cap);
  return out;
}

// ---------------------------------------------------------------------------
// Segments

/// Results of backend runs keyed by problem, shared by all plans.
class ResultCache {
 public:
  std::vector<RunResult> run(const Problem& p, const std::vector<const Backend*>& backends, const Deadline& deadline,
                             RunLog* log) {
    std::string key = problem_key(p);
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    std::vector<RunResult> out;
    for (const auto* b : backends) {
      RunResult r;
      if (deadline.passed()) {
        r.outcome = Outcome::Timeout;
        r.detail = "overall budget exhausted";
      } else {
        r = run_backend(*b, p);
      }
      if (log) log->add(log_entry(p, *b, r));
      out.push_back(std::move(r));
    }
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(out)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::vector<RunResult>> cache_;
};

struct SegmentPlan {
  std::string landing;
  std::string kickoff;
  std::optional<DirectProof> segment1;  // proves the kickoff; self-contained
  std::optional<DirectProof> segment2;  // proves the landing; may cite segment 1 statements
  std::optional<DirectProof> segment3;  // proves the conjecture; may cite earlier statements
  bool fresh2 = false;                  // segment 2 came from a backend, not the table
};

struct SegmentContext {
  const LemmaTable& table;
  const DependencyGraph& dag;
  const std::vector<const Backend*>& backends;
  ResultCache& cache;
  Deadline deadline;
  RunLog* log = nullptr;
};

namespace detail {

// The shortest proof among the backends' results after `complete` turns each
// into the proof that counts; ties go to backend order.
inline std::optional<DirectProof> shortest(const std::vector<RunResult>& results,
                                           const std::function<DirectProof(const DirectProof&)>& complete) {
  std::optional<DirectProof> best;
  for (const auto& r : results) {
    if (r.outcome != Outcome::Proved) continue;
    DirectProof c = complete(*r.proof);
    if (!best || c.length() < best->length()) best = std::move(c);
  }
  return best;
}

// Axioms of a segment problem: the original axioms and every lemma proved so
// far, named by its step id in `sofar`.
inline std::vector<NamedEquation> segment_axioms(const LemmaTable& t, const std::vector<ProofStep>& sofar) {
  std::vector<NamedEquation> axioms = t.problem.axioms;
  std::set<std::string> keys;
  for (const auto& a : axioms) keys.insert(canonical_key(a.eq));
  for (const auto& s : sofar)
    if (usable_lemma(s) && keys.insert(canonical_key(*s.statement)).second) axioms.push_back({s.id, *s.statement});
  return axioms;
}

inline Problem segment_problem(const LemmaTable& t, const std::string& id, std::vector<NamedEquation> axioms,
                               const NamedEquation& conjecture) {
  Problem p;
  p.id = t.problem.id + "_" + id;
  p.axioms = std::move(axioms);
  p.conjecture = conjecture;
  p.variant = VariantKind::Segment;
  p.lemma_id = conjecture.name;
  return p;
}

}  // namespace detail

/// Proof of the kickoff from the axioms. A kickoff that uses lemmas is proved
/// again from its dependencies; the stored proof wins if it is shorter.
inline DirectProof build_segment1(const SegmentContext& c, const std::string& kickoff) {
  const DagNode& k = c.dag.at(kickoff);
  DirectProof stored = c.dag.proof_of(kickoff);
  bool axioms_only = std::all_of(k.deps.begin(), k.deps.end(), [&](const auto& d) { return c.dag.at(d).axiom; });
  if (axioms_only) return stored;
  std::vector<NamedEquation> axioms = c.table.problem.axioms;
  for (const auto& id : c.dag.closure(kickoff)) {
    const DagNode& n = c.dag.at(id);
    if (id != kickoff && !n.axiom && n.statement.universal() && n.statement.body.positive())
      axioms.push_back({id, n.statement});
  }
  Problem p = detail::segment_problem(c.table, "seg1_" + kickoff, axioms, {kickoff, k.statement});
  auto fresh = detail::shortest(c.cache.run(p, c.backends, c.deadline, c.log), [&](const DirectProof& raw) {
    ProofMerger m;
    std::map<std::string, std::string> provided;
    for (const auto& s : raw.steps)
      if (s.is_axiom() && c.dag.find(s.name) && !provided.count(s.name))
        provided[s.name] = m.append(c.dag.proof_of(s.name));
    m.append(raw, provided);
    return prune_unreachable(m.proof(Origin::Segment));
  });
  if (fresh && fresh->length() <= stored.length()) return *fresh;
  return stored;
}

/// Merges the segments in order. Stubs naming a lemma of an earlier segment
/// resolve to it. Returns the merged id of each segment's last step.
inline DirectProof concatenate(const std::vector<const DirectProof*>& segments,
                               std::vector<std::string>* finals = nullptr) {
  ProofMerger m;
  std::map<std::string, std::string> provided;
  for (const DirectProof* s : segments) {
    if (!s) {
      if (finals) finals->push_back("");
      continue;
    }
    std::string last = m.append(*s, provided);
    if (finals) finals->push_back(last);
    for (const auto& st : m.steps())
      if (!st.is_axiom()) provided[st.id] = st.id;
  }
  return m.proof(Origin::Segment);
}

/// Proof of the landing given segment 1. Returns the segment and whether it
/// is fresh; a stored proof of the landing wins if it is shorter overall.
inline std::pair<DirectProof, bool> build_segment2(const SegmentContext& c, const DirectProof& seg1,
                                                   const std::string& landing) {
  const DagNode& l = c.dag.at(landing);
  DirectProof stored = c.dag.proof_of(landing);
  if (seg1.steps.back().statement && alpha_equal(*seg1.steps.back().statement, l.statement)) return {seg1, false};
  DirectProof prefix = concatenate({&seg1});
  Problem p = detail::segment_problem(c.table, "seg2_" + landing, detail::segment_axioms(c.table, prefix.steps),
                                      {landing, l.statement});
  std::optional<DirectProof> best_raw;
  std::size_t best_len = 0;
  for (const auto& r : c.cache.run(p, c.backends, c.deadline, c.log)) {
    if (r.outcome != Outcome::Proved) continue;
    std::size_t len = prune_unreachable(concatenate({&prefix, &*r.proof})).length();
    if (!best_raw || len < best_len) {
      best_raw = r.proof;
      best_len = len;
    }
  }
  if (best_raw && best_len <= stored.length()) return {*best_raw, true};
  return {stored, false};
}

/// Proof of the conjecture given the earlier segments, or nothing when no
/// backend finds one.
inline std::optional<DirectProof> build_segment3(const SegmentContext& c, const DirectProof& sofar) {
  const NamedEquation& conj = c.table.problem.conjecture;
  for (const auto& s : sofar.steps)
    if (s.statement && s.statement->universal() &&
        (alpha_equal(*s.statement, conj.eq) ||
         (s.statement->body.positive() && is_instance_of(conj.eq.body, s.statement->body))))
      return DirectProof{{detail::stub_step(s.id, *s.statement)}, Origin::Segment};
  Problem p =
      detail::segment_problem(c.table, "seg3", detail::segment_axioms(c.table, sofar.steps), {conj.name, conj.eq});
  std::optional<DirectProof> best;
  std::size_t best_len = 0;
  for (const auto& r : c.cache.run(p, c.backends, c.deadline, c.log)) {
    if (r.outcome != Outcome::Proved) continue;
    std::size_t len = prune_unreachable(concatenate({&sofar, &*r.proof})).length();
    if (!best || len < best_len) {
      best = r.proof;
      best_len = len;
    }
  }
  return best;
}

struct Assembled {
  DirectProof proof;
  bool segment2_used = false;
};

/// Concatenates the segments, drops unreferenced lemmas, relabels, and
/// certifies the result against the original problem.
inline Assembled assemble(const SegmentPlan& plan, const Problem& problem) {
  if (!plan.segment1 || !plan.segment3) throw CertificationFailed("plan is missing a segment");
  std::vector<std::string> finals;
  DirectProof all = concatenate(
      {&*plan.segment1, plan.segment2 ? &*plan.segment2 : nullptr, &*plan.segment3}, &finals);
  DirectProof pruned = prune_unreachable(all);
  Assembled out;
  // segment 2 counts when its conclusion is a step of its own that survives
  out.segment2_used = plan.segment2 && finals[1] != finals[0] && pruned.find(finals[1]);
  out.proof = relabel(pruned, "C");
  out.proof.origin = Origin::Segment;
  CheckReport report = check_proof(out.proof, problem);
  if (!report.accepted()) throw CertificationFailed(report.summary());
  return out;
}

/// Runs one plan end to end.
inline Assembled run_plan(const SegmentContext& c, SegmentPlan& plan) {
  plan.segment1 = build_segment1(c, plan.kickoff);
  if (plan.landing != plan.kickoff) {
    auto [seg2, fresh] = build_segment2(c, *plan.segment1, plan.landing);
    plan.segment2 = std::move(seg2);
    plan.fresh2 = fresh;
  }
  DirectProof sofar = concatenate({&*plan.segment1, plan.segment2 ? &*plan.segment2 : nullptr});
  plan.segment3 = build_segment3(c, sofar);
  if (!plan.segment3) throw SegmentUnprovable("no proof of the conjecture from landing " + plan.landing);
  return assemble(plan, c.table.problem);
}

// ---------------------------------------------------------------------------
// Pipeline

struct MinimizeConfig {
  std::set<VariantKind> variants{VariantKind::SmallStep, VariantKind::Abstracted};
  std::size_t landing_candidates = 6;
  std::size_t kickoff_cap = 0;  // 0: every lemma of the graph
  RunBudget budget;
  std::optional<DirectProof> baseline;  // supplied instead of running a backend
};

struct RunStats {
  std::size_t baseline_len = 0;
  std::size_t final_len = 0;
  double reduction_pct = 0;
  std::map<std::string, std::size_t> per_variant_counts;  // lemmas whose best proof came from each variant
  std::map<std::string, std::size_t> per_backend_wins;    // lemmas whose best proof came from each backend
  double wall_seconds = 0;
  std::size_t plans = 0;        // plans assembled and certified
  std::size_t plans_failed = 0;
  std::string source = "baseline";  // "plan", "lemma-table" or "baseline"
  std::string landing;
  std::string kickoff;
  bool segment2_used = false;
  bool certified = false;  // no opaque steps in the final proof
};

inline nlohmann::json to_json(const RunStats& s) {
  return {{"baseline_len", s.baseline_len},
          {"final_len", s.final_len},
          {"reduction_pct", s.reduction_pct},
          {"per_variant_counts", s.per_variant_counts},
          {"per_backend_wins", s.per_backend_wins},
          {"wall_seconds", s.wall_seconds},
          {"plans", s.plans},
          {"plans_failed", s.plans_failed},
          {"source", s.source},
          {"landing", s.landing},
          {"kickoff", s.kickoff},
          {"segment2_used", s.segment2_used},
          {"certified", s.certified}};
}

struct MinimizeResult {
  DirectProof proof;
  DirectProof baseline;
  RunStats stats;
  LemmaTable table;
};

/// A baseline direct proof from the first backend that proves the problem,
/// saturation backends first.
inline DirectProof obtain_baseline(const Problem& problem, const std::vector<const Backend*>& backends,
                                   const Deadline& deadline, RunLog* log) {
  std::vector<const Backend*> order;
  auto saturating = [](const Backend* b) {
    return b->spec().kind == BackendKind::Saturation || b->name() == "builtin-sat";
  };
  for (const auto* b : backends)
    if (saturating(b)) order.push_back(b);
  for (const auto* b : backends)
    if (!saturating(b)) order.push_back(b);
  Problem p = problem;
  p.variant = VariantKind::Baseline;
  std::string failures;
  for (const auto* b : order) {
    if (deadline.passed()) break;
    RunResult r = run_backend(*b, p);
    if (log) log->add(log_entry(p, *b, r));
    if (r.outcome == Outcome::Proved) {
      r.proof->origin = Origin::Baseline;
      return *r.proof;
    }
    failures += (failures.empty() ? "" : "; ") + b->name() + ": " + to_string(r.outcome);
    if (!r.detail.empty()) failures += " (" + r.detail + ")";
  }
  throw NoBaseline(failures.empty() ? "no backend ran" : failures);
}

/// The whole pipeline: baseline, lemma problems, recombination. Returns the
/// shortest certified proof found, never longer than the baseline.
inline MinimizeResult minimize(const Problem& problem, const std::vector<const Backend*>& backends,
                               const MinimizeConfig& config, RunLog* log = nullptr) {
  auto start = std::chrono::steady_clock::now();
  Deadline deadline = Deadline::after(config.budget.overall_limit);
  DirectProof baseline = config.baseline ? *config.baseline : obtain_baseline(problem, backends, deadline, log);
  CheckReport base_report = check_proof(baseline, problem);
  if (!base_report.accepted()) throw CertificationFailed("baseline: " + base_report.summary());
  baseline = relabel(prune_unreachable(baseline), "C");
  baseline.origin = Origin::Baseline;

  MinimizeResult out{baseline, baseline, {}, make_table(problem, baseline, config.variants)};
  LemmaTable& t = out.table;
  seed_baseline(t);
  prove_all_variants(t, backends, {deadline, config.budget.parallel, log});

  // each landing is handled on its own; plans are compared at the end
  struct Candidate {
    Assembled result;
    std::string landing, kickoff;
  };
  auto landings = candidate_landings(t.baseline, config.landing_candidates);
  std::vector<std::vector<Candidate>> found(landings.size());
  std::vector<std::size_t> failed(landings.size(), 0);
  ResultCache cache;
  parallel_for(landings.size(), config.budget.parallel, [&](std::size_t i) {
    const LemmaRecord* r = t.find(landings[i]);
    if (!r || !r->axiom_form.universal() || !r->axiom_form.body.positive()) return;
    DependencyGraph dag;
    try {
      dag = build_dag(landings[i], t);
    } catch (const Error&) {
      ++failed[i];
      return;
    }
    SegmentContext c{t, dag, backends, cache, deadline, log};
    for (const auto& k : kickoff_candidates(dag, config.kickoff_cap)) {
      if (deadline.passed()) break;
      SegmentPlan plan{dag.landing, k, {}, {}, {}, false};
      try {
        found[i].push_back({run_plan(c, plan), dag.landing, k});
      } catch (const Error&) {
        ++failed[i];
      }
    }
  });

  auto better = [](const DirectProof& a, const DirectProof& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.chain_links() < b.chain_links();
  };
  RunStats& st = out.stats;
  const Candidate* best = nullptr;
  for (std::size_t i = 0; i < found.size(); ++i) {
    st.plans += found[i].size();
    st.plans_failed += failed[i];
    for (const auto& cand : found[i])
      if (!best || better(cand.result.proof, best->result.proof)) best = &cand;
  }
  if (best && better(best->result.proof, baseline)) {
    out.proof = best->result.proof;
    st.source = "plan";
    st.landing = best->landing;
    st.kickoff = best->kickoff;
    st.segment2_used = best->result.segment2_used;
  }
  // the conjecture's own stored proof may still be shorter
  if (!t.records.empty() && t.records.back().best) {
    DirectProof stored = relabel(prune_unreachable(t.records.back().best->expanded), "C");
    stored.origin = origin_of(t.records.back().best->variant);
    if (better(stored, out.proof) && check_proof(stored, problem).accepted()) {
      out.proof = stored;
      st.source = "lemma-table";
      st.landing.clear();
      st.kickoff.clear();
      st.segment2_used = false;
    }
  }

  for (const auto& r : t.records) {
    if (!r.best) continue;
    ++st.per_variant_counts[to_string(r.best->variant)];
    ++st.per_backend_wins[r.best->backend];
  }
  st.baseline_len = baseline.length();
  st.final_len = out.proof.length();
  st.reduction_pct = st.baseline_len ? 100.0 * static_cast<double>(st.baseline_len - st.final_len) /
                                           static_cast<double>(st.baseline_len)
                                     : 0.0;
  st.certified = check_proof(out.proof, problem).certified();
  st.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace eqmin
