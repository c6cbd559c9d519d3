#pragma once

// Rendering a final proof: the native JSON document and two Lean-style
// texts, one with a calc block per chain and one with a single automation
// call per lemma. The Lean text is not elaborated here.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqmin/calculus.hpp"
#include "eqmin/errors.hpp"
#include "eqmin/proof.hpp"
#include "eqmin/proof_io.hpp"
#include "eqmin/syntax.hpp"

namespace eqmin {

enum class RenderStyle { Native, LeanCalc, LeanCompact };

inline const char* to_string(RenderStyle s) {
  switch (s) {
    case RenderStyle::Native: return "native";
    case RenderStyle::LeanCalc: return "lean_calc";
    case RenderStyle::LeanCompact: return "lean_compact";
  }
  return "native";
}

struct EmitOptions {
  std::string theorem = "main";
  std::string tactic = "duper";
  // what the theorem states; the final step's statement when absent
  std::optional<QuantifiedEquation> conjecture;
};

namespace detail {

inline void lean_term(const Term& t, std::string& out, bool top) {
  if (!t.is_app()) {
    out += t.name();
    return;
  }
  if (!top) out += "(";
  if (t.is_magma()) {
    lean_term(t.arg(0), out, false);
    out += "◇";
    lean_term(t.arg(1), out, false);
  } else {
    out += t.name();
    for (const auto& a : t.args()) {
      out += " ";
      lean_term(a, out, false);
    }
  }
  if (!top) out += ")";
}

inline std::string lean_term(const Term& t) {
  std::string s;
  lean_term(t, s, true);
  return s;
}

inline std::string lean_equation(const Equation& e) {
  return lean_term(e.lhs) + (e.positive() ? " = " : " ≠ ") + lean_term(e.rhs);
}

// The statement as a proposition over G.
inline std::string lean_prop(const QuantifiedEquation& q) {
  QuantifiedEquation n = normalize_prefix(q);
  std::string s;
  for (std::size_t i = 0; i < n.prefix.size();) {
    Quantifier quant = n.prefix[i].quantifier;
    s += quant == Quantifier::Forall ? "∀" : "∃";
    while (i < n.prefix.size() && n.prefix[i].quantifier == quant) s += " " + n.prefix[i++].var;
    s += " : G, ";
  }
  return s + lean_equation(n.body);
}

inline std::vector<std::string> universal_vars(const QuantifiedEquation& q) {
  std::vector<std::string> out;
  for (const auto& b : normalize_prefix(q).prefix) out.push_back(b.var);
  return out;
}

inline std::string lean_identifier(const std::string& raw, const std::string& fallback) {
  std::string s;
  for (char c : raw)
    s += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_';
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return fallback;
  return s;
}

inline void collect_symbols(const Term& t, std::map<std::string, std::size_t>& symbols) {
  if (t.is_var()) return;
  if (!t.is_magma()) symbols.emplace(t.name(), t.arity());
  for (const auto& a : t.args()) collect_symbols(a, symbols);
}

struct LeanNames {
  std::map<std::string, std::string> of;  // step id -> Lean name
  std::vector<std::string> lemma_ids;      // non-axiom steps before the last
};

inline LeanNames lean_names(const DirectProof& p) {
  LeanNames n;
  std::set<std::string> taken;
  std::size_t axioms = 0, lemmas = 0;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const ProofStep& s = p.steps[i];
    std::string name;
    if (s.is_axiom()) {
      name = lean_identifier(s.name, "hyp" + std::to_string(++axioms));
      if (name.rfind("lemma", 0) == 0 || name == "goal") name = "hyp_" + name;
      for (std::size_t k = 2; taken.count(name); ++k) name = lean_identifier(s.name, "hyp") + "_" + std::to_string(k);
    } else if (i + 1 == p.steps.size()) {
      name = "goal";
    } else {
      name = "lemma" + std::to_string(++lemmas);
      n.lemma_ids.push_back(s.id);
    }
    taken.insert(name);
    n.of[s.id] = name;
  }
  return n;
}

inline std::string premise_list(const ProofStep& s, const LeanNames& names, const std::vector<std::string>& ids) {
  std::string out = "[";
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) continue;
    if (out.size() > 1) out += ", ";
    auto it = names.of.find(id);
    if (it == names.of.end()) throw DanglingReference("step " + s.id + " cites unknown " + id);
    out += it->second;
  }
  return out + "]";
}

// Links read from the statement's left side to its right side.
inline std::vector<ChainLink> oriented_links(const ProofStep& s) {
  if (s.chain.empty() || s.chain.front().from == s.statement->body.lhs) return s.chain;
  std::vector<ChainLink> out;
  for (auto it = s.chain.rbegin(); it != s.chain.rend(); ++it)
    out.push_back({it->to, it->by, it->dir == Direction::LeftToRight ? Direction::RightToLeft : Direction::LeftToRight,
                   it->pos, it->from});
  return out;
}

// Proof body of one step, each line prefixed by `indent`.
inline std::string lean_body(const ProofStep& s, const LeanNames& names, const std::string& tactic, bool calc,
                             const std::string& indent) {
  if (s.rule == RuleKind::Chain && s.chain.empty()) return indent + "rfl\n";
  if (!calc || s.rule != RuleKind::Chain)
    return indent + tactic + " " + premise_list(s, names, s.premises) + "\n";
  std::string out = indent + "calc\n";
  auto links = oriented_links(s);
  for (std::size_t i = 0; i < links.size(); ++i) {
    out += indent + "  " + (i ? std::string("_") : lean_term(links[i].from)) + " = " + lean_term(links[i].to) +
           " := by " + tactic + " " + premise_list(s, names, {links[i].by}) + "\n";
  }
  return out;
}

inline std::string render_lean(const DirectProof& p, const EmitOptions& opt, bool calc) {
  LeanNames names = lean_names(p);
  const ProofStep& last = p.steps.back();
  QuantifiedEquation goal = opt.conjecture ? *opt.conjecture : *last.statement;

  // every lemma is used later
  std::set<std::string> cited;
  for (const auto& s : p.steps) {
    for (const auto& pr : s.premises) cited.insert(pr);
    for (const auto& l : s.chain) cited.insert(l.by);
  }
  for (const auto& id : names.lemma_ids)
    if (!cited.count(id)) throw Error("lemma " + id + " is never used; prune the proof first");

  std::map<std::string, std::size_t> symbols;
  for (const auto& s : p.steps)
    if (s.statement) {
      collect_symbols(s.statement->body.lhs, symbols);
      collect_symbols(s.statement->body.rhs, symbols);
    }
  collect_symbols(goal.body.lhs, symbols);
  collect_symbols(goal.body.rhs, symbols);

  std::string out = "theorem " + lean_identifier(opt.theorem, "main") + " (G : Type _) [Magma G]";
  for (const auto& [name, arity] : symbols) {
    out += " (" + name + " : ";
    for (std::size_t i = 0; i < arity; ++i) out += "G → ";
    out += "G)";
  }
  out += "\n";
  for (const auto& s : p.steps)
    if (s.is_axiom()) out += "      (" + names.of.at(s.id) + " : " + lean_prop(*s.statement) + ")\n";
  out += "    : " + lean_prop(goal) + " :=\n";

  for (const auto& s : p.steps) {
    if (s.is_axiom() || &s == &last) continue;
    out += "  have " + names.of.at(s.id);
    if (s.statement->universal()) {
      auto vars = universal_vars(*s.statement);
      if (!vars.empty()) {
        out += " (";
        for (std::size_t i = 0; i < vars.size(); ++i) out += (i ? " " : "") + vars[i];
        out += " : G)";
      }
      out += " :\n      " + lean_equation(s.statement->body) + " := by\n";
    } else {
      out += " :\n      " + lean_prop(*s.statement) + " := by\n";
    }
    out += lean_body(s, names, opt.tactic, calc, "    ");
    out += "\n";
  }

  if (last.is_axiom()) {
    out += "  " + names.of.at(last.id) + "\n";
    return out;
  }
  out += "  show _ by\n";
  auto vars = universal_vars(goal);
  if (goal.universal() && !vars.empty()) {
    out += "    intros";
    for (const auto& v : vars) out += " " + v;
    out += "\n";
  }
  out += lean_body(last, names, opt.tactic, calc, "    ");
  return out;
}

}  // namespace detail

/// Renders `proof`. The Lean styles need every step reconstructed; native
/// output also accepts opaque steps. Throws UncertifiedProof otherwise.
inline std::string emit(const DirectProof& proof, RenderStyle style, const EmitOptions& opt = {}) {
  if (proof.steps.empty()) throw UncertifiedProof("empty proof");
  std::vector<NamedEquation> axioms;
  for (const auto& s : proof.steps)
    if (s.is_axiom() && s.statement) axioms.push_back({s.name, *s.statement});
  if (proof.steps.back().bottom()) throw UncertifiedProof("a refutation is not a direct proof");
  QuantifiedEquation goal = opt.conjecture ? *opt.conjecture : *proof.steps.back().statement;
  CheckReport report = check_proof(proof.steps, axioms, goal);
  bool ok = style == RenderStyle::Native ? report.accepted() : report.certified();
  if (!ok) throw UncertifiedProof(report.summary());
  switch (style) {
    case RenderStyle::Native: return write_native(proof);
    case RenderStyle::LeanCalc: return detail::render_lean(proof, opt, true);
    case RenderStyle::LeanCompact: return detail::render_lean(proof, opt, false);
  }
  return {};
}

inline std::string output_file_name(const std::string& theorem, RenderStyle style) {
  switch (style) {
    case RenderStyle::Native: return theorem + ".native.json";
    case RenderStyle::LeanCalc: return theorem + ".calc.lean.txt";
    case RenderStyle::LeanCompact: return theorem + ".compact.lean.txt";
  }
  return theorem;
}

/// Writes every style that applies to `dir`; returns the paths written.
/// The Lean files are skipped for proofs with opaque steps.
inline std::vector<std::filesystem::path> write_outputs(const DirectProof& proof, const std::filesystem::path& dir,
                                                        const EmitOptions& opt) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (RenderStyle style : {RenderStyle::Native, RenderStyle::LeanCalc, RenderStyle::LeanCompact}) {
    std::string text;
    try {
      text = emit(proof, style, opt);
    } catch (const UncertifiedProof&) {
      if (style == RenderStyle::Native) throw;
      continue;
    }
    auto path = dir / output_file_name(opt.theorem, style);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    written.push_back(path);
  }
  return written;
}

}  // namespace eqmin
