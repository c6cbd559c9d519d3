#pragma once

// Reading and writing proofs: TSTP derivations from saturation provers,
// equational chain proofs from completion provers, and the native JSON form.

#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "eqmin/proof.hpp"
#include "eqmin/syntax.hpp"
#include "eqmin/tptp.hpp"

namespace eqmin {

/// The status word of an `SZS status <word>` line, if present.
inline std::optional<std::string> szs_status(std::string_view text) {
  static const std::regex re(R"(SZS status\s+([A-Za-z]+))");
  std::string s(text);
  std::smatch m;
  if (std::regex_search(s, m, re)) return m[1].str();
  // completion provers may print only their own result line
  static const std::regex result(R"(^RESULT:\s+([A-Za-z]+))", std::regex::multiline);
  if (std::regex_search(s, m, result)) return m[1].str();
  return std::nullopt;
}

inline bool szs_proved(const std::string& status) {
  return status == "Theorem" || status == "Unsatisfiable" || status == "ContradictoryAxioms";
}

// ---------------------------------------------------------------------------
// Saturation derivations (TSTP)

inline bool is_preprocessing_rule(const std::string& rule) {
  static const std::set<std::string> rules{
      "negated_conjecture", "flattening",      "ennf_transformation",        "nnf_transformation",
      "skolemisation",      "skolemization",   "cnf_transformation",         "rectify",
      "choice_axiom",       "pure_predicate_removal", "true_and_false_elimination", "fool_elimination",
      "definition_unfolding", "definition_folding", "variable_renaming",     "clausify",
      "assume_negation",    "input"};
  return rules.count(rule) != 0;
}

/// Maps a prover's inference name onto the calculus. Unknown names are opaque.
inline RuleKind inference_rule_kind(const std::string& rule) {
  static const std::set<std::string> sup{"superposition",   "forward_demodulation", "backward_demodulation",
                                         "demodulation",    "rewriting",            "paramodulation",
                                         "pm"};
  static const std::set<std::string> er{"equality_resolution", "trivial_inequality_removal", "er", "cn"};
  if (sup.count(rule)) return RuleKind::Superposition;
  if (rule == "parallel_superposition") return RuleKind::ParallelSuperposition;
  if (er.count(rule)) return RuleKind::EqualityResolution;
  return RuleKind::Opaque;
}

namespace detail {

inline void collect_parents(const tptp::GTerm& g, std::vector<std::string>& out) {
  if (g.list) {
    for (const auto& a : g.args) collect_parents(a, out);
    return;
  }
  if (g.functor == "inference" && g.args.size() >= 3) {
    collect_parents(g.args[2], out);
    return;
  }
  if (g.functor == ":" || g.functor == "theory" || g.functor == "file") return;
  if (g.args.empty()) out.push_back(g.functor);
}

inline std::string_view restrict_to_output(std::string_view text) {
  auto start = text.find("SZS output start");
  if (start == std::string_view::npos) return text;
  auto line_end = text.find('\n', start);
  if (line_end == std::string_view::npos) return {};
  auto end = text.find("SZS output end", line_end);
  std::string_view body = text.substr(line_end + 1, end == std::string_view::npos ? std::string_view::npos
                                                                                  : end - line_end - 1);
  // drop the comment marker that precedes "SZS output end"
  auto cut = body.rfind('\n');
  if (end != std::string_view::npos && cut != std::string_view::npos) body = body.substr(0, cut + 1);
  return body;
}

}  // namespace detail

/// Parses a TSTP refutation in the unit-equality fragment. Clausification
/// steps are set aside in `preprocessing_ids`; those used by real inferences
/// become axiom or negated-conjecture steps.
inline ParsedDerivation parse_saturation_proof(std::string_view text) {
  auto formulas = tptp::parse_formulas(detail::restrict_to_output(text), true);
  if (formulas.empty()) throw ParseError("no derivation found", 1, 1);

  struct Info {
    const tptp::Formula* f;
    std::string rule;  // empty for input formulas
    std::vector<std::string> parents;
    bool preprocessing;
  };
  std::map<std::string, Info> info;
  std::vector<std::string> order;
  for (const auto& f : formulas) {
    Info in{&f, "", {}, true};
    if (f.source && f.source->functor == "inference" && !f.source->args.empty()) {
      in.rule = f.source->args[0].functor;
      if (f.source->args.size() >= 3) detail::collect_parents(f.source->args[2], in.parents);
      in.preprocessing = is_preprocessing_rule(in.rule);
    }
    if (!info.emplace(f.name, in).second) throw ParseError("duplicate formula name '" + f.name + "'", f.line, 1);
    order.push_back(f.name);
  }

  std::set<std::string> materialize;
  for (const auto& id : order) {
    const Info& in = info.at(id);
    if (in.preprocessing) continue;
    for (const auto& p : in.parents) {
      auto it = info.find(p);
      if (it == info.end()) throw DanglingReference("formula " + id + " cites unknown parent " + p);
      if (it->second.preprocessing) materialize.insert(p);
    }
  }

  // name of the input formula a preprocessing step descends from
  auto input_name = [&](std::string id) {
    for (int guard = 0; guard < 1000; ++guard) {
      const Info& in = info.at(id);
      if (in.rule.empty()) {
        const auto& src = in.f->source;
        if (src && src->functor == "file" && src->args.size() >= 2) return src->args[1].functor;
        return id;
      }
      if (in.parents.empty() || !info.count(in.parents.front())) return id;
      id = in.parents.front();
    }
    return id;
  };

  ParsedDerivation d;
  d.source = DerivationSource::Saturation;
  for (const auto& id : order) {
    const Info& in = info.at(id);
    bool real = !in.preprocessing;
    if (!real && !materialize.count(id)) {
      d.preprocessing_ids.insert(id);
      continue;
    }
    if (!in.f->unsupported.empty()) throw UnsupportedLogic("formula " + id + ": " + in.f->unsupported);
    ProofStep s;
    s.id = id;
    s.statement = in.f->statement;
    if (real) {
      s.rule = inference_rule_kind(in.rule);
      s.rule_name = in.rule;
      s.premises = in.parents;
      if (s.rule == RuleKind::EqualityResolution && !s.bottom()) s.rule = RuleKind::Opaque;
    } else {
      if (s.bottom()) throw UnsupportedLogic("$false produced during preprocessing");
      s.rule = s.statement->body.positive() ? RuleKind::Axiom : RuleKind::NegatedConjecture;
      s.rule_name = in.rule.empty() ? "input" : in.rule;
      if (s.rule == RuleKind::Axiom) s.name = input_name(id);
    }
    d.steps.push_back(std::move(s));
  }
  if (d.steps.empty()) throw ParseError("derivation has no inferences", 1, 1);
  return d;
}

namespace detail {

inline std::string tptp_id(const std::string& id) {
  static const std::regex ok("[a-z][A-Za-z0-9_]*");
  if (std::regex_match(id, ok)) return id;
  return tptp::formula_name("f" + id);
}

}  // namespace detail

/// Writes a refutation as TSTP text that `parse_saturation_proof` reads back:
/// the problem's formulas, the negated conjecture, one clausification step per
/// input clause and one inference line per remaining step.
inline std::string write_tstp(const std::vector<ProofStep>& refutation, const Problem& problem) {
  std::map<std::string, std::string> ids;
  std::set<std::string> used;
  auto reserve = [&](std::string n) {
    std::string base = n;
    for (int k = 2; !used.insert(n).second; ++k) n = base + "_" + std::to_string(k);
    return n;
  };
  std::map<std::string, std::string> axiom_ids;
  for (const auto& a : problem.axioms) axiom_ids[a.name] = reserve(tptp::formula_name(a.name));
  std::string goal = reserve(tptp::formula_name(problem.conjecture.name.empty() ? "goal" : problem.conjecture.name));
  std::string negated = reserve("negated_goal");
  for (const auto& s : refutation) ids[s.id] = reserve(detail::tptp_id(s.id));

  std::string file = "file('" + problem.id + ".p',";
  std::ostringstream out;
  out << "% SZS status Theorem for " << problem.id << "\n";
  out << "% SZS output start Proof for " << problem.id << "\n";
  for (const auto& a : problem.axioms)
    out << "fof(" << axiom_ids[a.name] << ",axiom," << tptp::formula_text(a.eq) << "," << file << axiom_ids[a.name]
        << ")).\n";
  out << "fof(" << goal << ",conjecture," << tptp::formula_text(problem.conjecture.eq) << "," << file << goal
      << ")).\n";
  out << "fof(" << negated << ",negated_conjecture,~" << tptp::formula_text(problem.conjecture.eq)
      << ",inference(negated_conjecture,[status(cth)],[" << goal << "])).\n";
  for (const auto& s : refutation) {
    std::string rule;
    std::vector<std::string> parents;
    switch (s.rule) {
      case RuleKind::Axiom: {
        rule = "cnf_transformation";
        auto it = axiom_ids.find(s.name);
        if (it == axiom_ids.end()) {
          for (const auto& a : problem.axioms)
            if (s.statement && alpha_equal(a.eq, *s.statement)) it = axiom_ids.find(a.name);
        }
        if (it == axiom_ids.end()) throw Error("axiom step " + s.id + " matches no axiom of the problem");
        parents = {it->second};
        break;
      }
      case RuleKind::NegatedConjecture:
        rule = "skolemisation";
        parents = {negated};
        break;
      case RuleKind::EqualityResolution: {
        rule = "equality_resolution";
        for (const auto& p : refutation)
          if (!s.premises.empty() && p.id == s.premises[0] && p.statement && p.statement->body.trivial())
            rule = "trivial_inequality_removal";
        break;
      }
      case RuleKind::Opaque:
        rule = s.rule_name.empty() ? "unknown" : s.rule_name;
        break;
      default:
        rule = to_string(s.rule);
    }
    if (parents.empty())
      for (const auto& p : s.premises) parents.push_back(ids.count(p) ? ids[p] : detail::tptp_id(p));
    out << "cnf(" << ids[s.id] << ","
        << (s.rule == RuleKind::Axiom ? "axiom" : s.rule == RuleKind::NegatedConjecture ? "negated_conjecture"
                                                                                        : "plain")
        << "," << tptp::clause_text(s.statement) << ",inference(" << rule << ",[],[";
    for (std::size_t i = 0; i < parents.size(); ++i) out << (i ? "," : "") << parents[i];
    out << "])).\n";
  }
  out << "% SZS output end Proof for " << problem.id << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Completion proofs (equational chains)

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline VarStyle detect_style(const std::vector<std::string>& texts) {
  static const std::regex upper(R"((^|[^A-Za-z0-9_'])[A-Z])");
  for (const auto& t : texts)
    if (std::regex_search(t, upper)) return VarStyle::Tptp;
  return VarStyle::Math;
}

}  // namespace detail

/// Parses a completion prover's proof: declarations `Axiom n (name): eq.`,
/// then `Lemma n: eq.` / `Goal n (name): eq.` each followed by `Proof:` and a
/// chain of terms separated by `= { by axiom|lemma n (name) [R->L] }`.
/// Rewrite positions are reconstructed; a link without one keeps the deepest
/// candidate and is reported by the checker.
inline ParsedDerivation parse_chain_proof(std::string_view text) {
  static const std::regex header(R"(^(Axiom|Lemma|Goal)\s+(\d+)\s*(\(([^)]*)\))?\s*:\s*(.*?)\s*\.?$)");
  static const std::regex by(
      R"(^=\s*\{\s*by\s+(axiom|lemma|goal)\s+(\d+)\s*(\(([^)]*)\))?\s*(R->L|right-to-left|L->R|left-to-right)?\s*\}$)");

  struct Raw {
    std::string kind, number, name, statement;
    std::size_t line;
    std::vector<std::pair<std::string, std::size_t>> terms;  // term text, line
    std::vector<std::tuple<std::string, Direction, std::size_t>> links;  // cited id, direction, line
    bool has_proof = false;
  };
  std::vector<Raw> raws;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool in_proof = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty()) {
      in_proof = false;
      continue;
    }
    if (t[0] == '%' || t.rfind("RESULT", 0) == 0 || t.rfind("The conjecture", 0) == 0) continue;
    std::smatch m;
    if (std::regex_match(t, m, header)) {
      raws.push_back({m[1].str(), m[2].str(), m[4].str(), m[5].str(), lineno, {}, {}, false});
      in_proof = false;
      continue;
    }
    if (t == "Proof:") {
      if (raws.empty() || raws.back().kind == "Axiom") throw ParseError("'Proof:' without a lemma or goal", lineno, 1);
      raws.back().has_proof = true;
      in_proof = true;
      continue;
    }
    if (!in_proof) throw ParseError("unexpected line '" + t + "'", lineno, 1);
    Raw& r = raws.back();
    if (t[0] == '=') {
      if (!std::regex_match(t, m, by)) throw ParseError("malformed justification '" + t + "'", lineno, 1);
      if (r.terms.size() != r.links.size() + 1) throw ParseError("justification without a preceding term", lineno, 1);
      std::string kind = m[1].str();
      std::string id = (kind == "axiom" ? "a" : kind == "lemma" ? "l" : "g") + m[2].str();
      std::string d = m[5].str();
      r.links.emplace_back(id, d == "R->L" || d == "right-to-left" ? Direction::RightToLeft : Direction::LeftToRight,
                           lineno);
      continue;
    }
    if (r.terms.size() != r.links.size()) throw ParseError("two terms without a justification", lineno, 1);
    r.terms.emplace_back(t, lineno);
  }
  if (raws.empty()) throw ParseError("no proof found", 1, 1);

  std::vector<std::string> texts;
  for (const auto& r : raws) {
    texts.push_back(r.statement);
    for (const auto& [t, l] : r.terms) texts.push_back(t);
  }
  VarStyle style = detail::detect_style(texts);

  ParsedDerivation d;
  d.source = DerivationSource::Completion;
  std::map<std::string, Equation> declared;
  for (const auto& r : raws) {
    ProofStep s;
    s.id = (r.kind == "Axiom" ? "a" : r.kind == "Lemma" ? "l" : "g") + r.number;
    Equation eq;
    try {
      eq = parse_equation(r.statement, style);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), r.line, e.column());
    }
    s.statement = universal_closure(eq);
    s.name = r.name;
    if (r.kind == "Axiom") {
      s.rule = RuleKind::Axiom;
      s.rule_name = "axiom";
    } else {
      if (!r.has_proof) throw ParseError(r.kind + " " + r.number + " has no proof", r.line, 1);
      if (r.terms.empty() || r.terms.size() != r.links.size() + 1)
        throw ParseError(r.kind + " " + r.number + " has an incomplete chain", r.line, 1);
      s.rule = RuleKind::Chain;
      s.rule_name = "chain";
      std::set<std::string> bound = vars_of(eq);
      std::vector<Term> terms;
      for (const auto& [t, l] : r.terms) {
        try {
          terms.push_back(parse_term(t, style, bound));
        } catch (const ParseError& e) {
          throw ParseError(e.what(), l, e.column());
        }
      }
      for (std::size_t i = 0; i < r.links.size(); ++i) {
        const auto& [id, dir, l] = r.links[i];
        auto it = declared.find(id);
        if (it == declared.end()) throw DanglingReference("line " + std::to_string(l) + " cites undeclared " + id);
        if (std::find(s.premises.begin(), s.premises.end(), id) == s.premises.end()) s.premises.push_back(id);
        auto pos = find_rewrite_position(terms[i], terms[i + 1], it->second, dir);
        if (!pos) pos = candidate_rewrite_positions(terms[i], terms[i + 1]).front();
        s.chain.push_back({terms[i], id, dir, *pos, terms[i + 1]});
      }
    }
    declared[s.id] = eq;
    d.steps.push_back(std::move(s));
  }
  return d;
}

/// Writes a direct proof made of axiom and chain steps in the format read by
/// `parse_chain_proof`.
inline std::string write_chain_proof(const DirectProof& p) {
  std::map<std::string, std::string> refs;
  std::size_t axioms = 0, lemmas = 0;
  std::ostringstream out;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const ProofStep& s = p.steps[i];
    if (s.bottom() || !s.statement->universal()) throw Error("step " + s.id + " is not a universal equation");
    if (s.rule != RuleKind::Axiom && s.rule != RuleKind::Chain)
      throw Error("step " + s.id + " is neither an axiom nor a chain");
    std::string eq = to_string(s.statement->body);
    std::string label = s.name.empty() ? "" : " (" + s.name + ")";
    if (s.rule == RuleKind::Axiom) {
      std::string n = std::to_string(++axioms);
      refs[s.id] = "axiom " + n + label;
      out << "Axiom " << n << label << ": " << eq << ".\n";
      continue;
    }
    bool last = i + 1 == p.steps.size();
    std::string n = std::to_string(last ? 1 : ++lemmas + 100);
    if (!last) refs[s.id] = "lemma " + n;
    out << "\n" << (last ? "Goal " : "Lemma ") << n << (last ? label : "") << ": " << eq << ".\nProof:\n";
    out << "  " << to_string(s.chain.empty() ? s.statement->body.lhs : s.chain.front().from) << "\n";
    for (const auto& l : s.chain) {
      auto it = refs.find(l.by);
      if (it == refs.end()) throw DanglingReference("step " + s.id + " cites " + l.by);
      out << "= { by " << it->second << (l.dir == Direction::RightToLeft ? " R->L" : "") << " }\n";
      out << "  " << to_string(l.to) << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Native JSON

inline const std::string kNativeFormat = "eqmin-proof/1";

namespace detail {

inline std::set<std::string> statement_vars(const ProofStep& s) {
  std::set<std::string> out;
  if (s.statement)
    for (const auto& b : s.statement->prefix) out.insert(b.var);
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const ProofStep& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["statement"] = s.statement ? to_string(*s.statement) : "⊥";
  j["rule"] = to_string(s.rule);
  if (!s.rule_name.empty() && s.rule_name != to_string(s.rule)) j["rule_name"] = s.rule_name;
  j["premises"] = s.premises;
  if (!s.name.empty()) j["name"] = s.name;
  if (s.rule == RuleKind::Chain) {
    j["chain"] = nlohmann::json::array();
    for (const auto& l : s.chain)
      j["chain"].push_back({{"from", to_string(l.from)},
                            {"by", l.by},
                            {"dir", l.dir == Direction::LeftToRight ? "l2r" : "r2l"},
                            {"pos", l.pos.path},
                            {"to", to_string(l.to)}});
  }
  if (s.contrapositive) j["contrapositive"] = true;
  if (s.tautology) j["tautology"] = to_string(*s.tautology);
  return j;
}

inline nlohmann::json to_json(const DirectProof& p) {
  nlohmann::json j;
  j["format"] = kNativeFormat;
  j["origin"] = to_string(p.origin);
  j["length"] = p.length();
  j["steps"] = nlohmann::json::array();
  for (const auto& s : p.steps) j["steps"].push_back(to_json(s));
  return j;
}

/// Statements carry explicit prefixes, so only bound names are variables.
inline ProofStep step_from_json(const nlohmann::json& j) {
  ProofStep s;
  s.id = j.at("id").get<std::string>();
  s.statement = parse_statement(j.at("statement").get<std::string>(), VarStyle::Bound);
  auto rule = rule_kind_from_string(j.at("rule").get<std::string>());
  if (!rule) throw ParseError("unknown rule '" + j.at("rule").get<std::string>() + "' in step " + s.id, 1, 1);
  s.rule = *rule;
  s.rule_name = j.value("rule_name", std::string(to_string(s.rule)));
  s.premises = j.value("premises", std::vector<std::string>{});
  s.name = j.value("name", std::string());
  s.contrapositive = j.value("contrapositive", false);
  auto bound = detail::statement_vars(s);
  if (j.contains("tautology")) {
    std::string t = j.at("tautology").get<std::string>();
    auto eq = t.find(" = ");
    if (eq == std::string::npos) throw ParseError("malformed tautology in step " + s.id, 1, 1);
    s.tautology = Equation{parse_term(t.substr(0, eq), VarStyle::Bound, bound),
                           parse_term(t.substr(eq + 3), VarStyle::Bound, bound), Polarity::Equal};
  }
  if (j.contains("chain")) {
    for (const auto& l : j.at("chain")) {
      std::string dir = l.at("dir").get<std::string>();
      if (dir != "l2r" && dir != "r2l") throw ParseError("bad direction '" + dir + "' in step " + s.id, 1, 1);
      s.chain.push_back({parse_term(l.at("from").get<std::string>(), VarStyle::Bound, bound),
                         l.at("by").get<std::string>(),
                         dir == "l2r" ? Direction::LeftToRight : Direction::RightToLeft,
                         Position(l.at("pos").get<std::vector<std::size_t>>()),
                         parse_term(l.at("to").get<std::string>(), VarStyle::Bound, bound)});
    }
  }
  return s;
}

inline DirectProof proof_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != kNativeFormat)
    throw ParseError("not an " + kNativeFormat + " document", 1, 1);
  DirectProof p;
  auto origin = origin_from_string(j.value("origin", std::string("baseline")));
  if (!origin) throw ParseError("unknown origin", 1, 1);
  p.origin = *origin;
  for (const auto& s : j.at("steps")) p.steps.push_back(step_from_json(s));
  return p;
}

inline std::string write_native(const DirectProof& p) { return to_json(p).dump(2) + "\n"; }

inline DirectProof read_native(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), 1, e.byte);
  }
  try {
    return proof_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what(), 1, 1);
  }
}

}  // namespace eqmin
