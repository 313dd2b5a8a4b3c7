#pragma once

// Bounded check of the syntactic conditions for definitional equivalence
// between two theories given direct translations t0, t1 in both directions:
//   (1) T_i |- phi        implies  T_{1-i} |- t_i(phi)
//   (2) T_i |- forall xs (phi <-> t_{1-i}(t_i(phi)))
// where t_i translates the language of T_i into that of T_{1-i}. A pass means
// no violation was found at the given bounds, nothing more.

#include <string>
#include <vector>

#include "biprism/interpretation.hpp"
#include "biprism/prover.hpp"
#include "biprism/report.hpp"

namespace biprism {

inline constexpr std::size_t kDefaultSchemaBound = 5;

/// Probe sentences for clause 1; ones outside a side's language are skipped there.
inline std::vector<std::string> default_probes() {
  return {"forall x. x = x", "exists x. x = x", "exists>=2 x. x = x", "exists>=3 x. x = x",
          "forall x. exists y. !(x = y)"};
}

/// Pool formulas for clause 2.
inline std::vector<std::string> default_pool() { return {"x = y", "!(x = y)", "exists y. !(x = y)", "x = c"}; }

/// Text form of a countermodel: domain size, constants, nonempty relations, assignment.
inline std::string countermodel_text(const Countermodel& cm) {
  const auto& A = cm.structure;
  std::string s = "size " + std::to_string(A.size());
  for (const auto& [c, e] : A.constants()) s += ", " + c + "=" + std::to_string(e);
  for (const auto& [r, ts] : A.relations()) {
    s += ", " + r + "={";
    bool first = true;
    for (const auto& t : ts) {
      s += first ? "(" : ", (";
      first = false;
      for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
      s += ")";
    }
    s += "}";
  }
  if (!cm.assignment.empty()) {
    s += "; ";
    bool first = true;
    for (const auto& [v, e] : cm.assignment) {
      s += (first ? "" : ", ") + v + "=" + std::to_string(e);
      first = false;
    }
  }
  return s;
}

struct DefEqEntry {
  int clause = 1;
  std::string theory;  // the theory the goal is posed over
  std::string input;   // probe or pool formula as given
  Formula goal;
  Verdict verdict;
};

struct DefEqReport {
  std::vector<DefEqEntry> entries;
  std::vector<std::string> skipped;  // probes not proved in their own theory, unparsable inputs

  /// PASS only if every entry is proved, FAIL if any is refuted, else UNKNOWN.
  Status overall() const {
    bool all = true;
    for (const auto& e : entries) {
      if (e.verdict.refuted()) return Status::Fail;
      all = all && e.verdict.proved();
    }
    return all ? Status::Pass : Status::Unknown;
  }

  Report to_report() const {
    Report r;
    r.title = "definitional equivalence (bounded)";
    for (const auto& e : entries) {
      Status s = e.verdict.proved() ? Status::Pass : e.verdict.refuted() ? Status::Fail : Status::Unknown;
      std::string detail = std::string(to_string(e.verdict.kind)) + " " + render_formula(e.goal);
      if (!e.verdict.reason.empty()) detail += " [" + e.verdict.reason + "]";
      r.add("clause " + std::to_string(e.clause) + " over " + e.theory + ": " + e.input, s, detail,
            e.verdict.countermodel ? countermodel_text(*e.verdict.countermodel) : std::string());
    }
    for (const auto& sk : skipped) r.add("skipped: " + sk, Status::Skip);
    return r;
  }
};

namespace detail {

inline std::optional<Formula> try_parse(const std::string& text, const Signature& sig) {
  try {
    return parse_formula(text, sig);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// t0 translates the language of T0 into that of T1, t1 the other way. Both
/// must be direct. Schemas are instantiated for parameters 1..schema_bound.
/// Probes and pool entries are parsed over each side's signature; those that
/// do not parse for a side are skipped there.
inline DefEqReport check_direct_defeq(const TranslationScheme& t0, const TranslationScheme& t1, const SchemaTheory& T0,
                                      const SchemaTheory& T1, const std::vector<std::string>& probes,
                                      const std::vector<std::string>& pool, const ProverBounds& b = {},
                                      std::size_t schema_bound = kDefaultSchemaBound) {
  for (const auto* t : {&t0, &t1}) {
    if (!classify(*t).direct) throw SchemeError("scheme '" + t->name + "' is not direct");
    t->check_shape();
  }
  if (!t0.source.same_symbols(T0.signature) || !t0.target.same_symbols(T1.signature))
    throw SignatureError("t0 must translate the language of " + T0.name + " into that of " + T1.name);
  if (!t1.source.same_symbols(T1.signature) || !t1.target.same_symbols(T0.signature))
    throw SignatureError("t1 must translate the language of " + T1.name + " into that of " + T0.name);

  const SchemaTheory* th[2] = {&T0, &T1};
  const TranslationScheme* tr[2] = {&t0, &t1};
  std::vector<Formula> ax[2] = {T0.instantiate(schema_bound), T1.instantiate(schema_bound)};

  DefEqReport rep;
  for (int i = 0; i < 2; ++i) {
    const int o = 1 - i;
    const Signature& sig = th[i]->signature;
    for (const auto& p : probes) {
      auto phi = detail::try_parse(p, sig);
      if (!phi || !is_sentence(*phi)) {
        rep.skipped.push_back("probe '" + p + "' over " + th[i]->name + ": not a sentence of its language");
        continue;
      }
      Verdict own = tableau_prove(ax[i], *phi, sig, b);
      if (!own.proved()) {
        rep.skipped.push_back("probe '" + p + "' not proved over " + th[i]->name);
        continue;
      }
      Formula goal = translate_formula(*tr[i], *phi);
      rep.entries.push_back({1, th[o]->name, p, goal, tableau_prove(ax[o], goal, th[o]->signature, b)});
    }
    for (const auto& q : pool) {
      auto phi = detail::try_parse(q, sig);
      if (!phi) {
        rep.skipped.push_back("pool '" + q + "' over " + th[i]->name + ": not a formula of its language");
        continue;
      }
      auto fv = free_vars(*phi);
      VarTuples keep;
      for (const auto& v : fv) keep[v] = {v};
      Formula there = translate(*tr[i], *phi, keep).formula;
      Formula back = translate(*tr[o], there, keep).formula;
      Formula goal = forall_block(std::vector<std::string>(fv.begin(), fv.end()), iff(*phi, back));
      rep.entries.push_back({2, th[i]->name, q, goal, tableau_prove(ax[i], goal, sig, b)});
    }
  }
  return rep;
}

}  // namespace biprism
