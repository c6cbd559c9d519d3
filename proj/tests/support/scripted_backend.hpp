#pragma once

// A backend that answers from a table of canned proofs, for driving the
// orchestrator and the recombination without real provers.

#include <atomic>
#include <map>
#include <optional>
#include <string>

#include "eqmin/orchestrator.hpp"

namespace eqmin::testkit {

class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::string name, BackendKind kind = BackendKind::Saturation)
      : Backend(BackendSpec{std::move(name), kind, "", 10, {}, 0, 0}) {}

  /// Answers `proof` for the problem {axioms} ⊢ conjecture; with a variant,
  /// only for problems of that variant.
  void add(const std::vector<QuantifiedEquation>& axioms, const QuantifiedEquation& conjecture, DirectProof proof,
           std::optional<VariantKind> variant = std::nullopt) {
    std::vector<NamedEquation> named;
    for (const auto& a : axioms) named.push_back({"", a});
    script_[key(variant, problem_key(named, conjecture))] = std::move(proof);
  }

  /// What unscripted problems get.
  void otherwise(Outcome o) { fallback_ = o; }

  std::size_t calls() const { return calls_; }

  Attempt attempt(const Problem& p) const override {
    ++calls_;
    Attempt a;
    auto it = script_.find(key(p.variant, problem_key(p)));
    if (it == script_.end()) it = script_.find(key(std::nullopt, problem_key(p)));
    if (it == script_.end()) {
      a.outcome = fallback_;
      return a;
    }
    a.outcome = Outcome::Proved;
    a.proof = it->second;
    return a;
  }

 private:
  static std::string key(std::optional<VariantKind> v, const std::string& k) {
    return (v ? std::string(to_string(*v)) : std::string("*")) + "|" + k;
  }

  std::map<std::string, DirectProof> script_;
  Outcome fallback_ = Outcome::GaveUp;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace eqmin::testkit
