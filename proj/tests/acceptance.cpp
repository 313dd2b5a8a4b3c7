// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]...   (default: all)

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biprism.hpp"
#include "formula_gen.hpp"
#include "oracles.hpp"

using namespace biprism;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void fail(std::string why) {
    pass = false;
    notes.push_back(std::move(why));
  }
  void note(std::string s) { notes.push_back(std::move(s)); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string first_problem(const Report& r) {
  const ReportEntry* e = r.first_failure();
  if (!e) return {};
  return e->check + (e->witness.empty() ? "" : " (" + e->witness + ")");
}

// Library check and oracle must both confirm the isomorphism.
std::string iso_problem(const FiniteStructure& A, const TranslationScheme& rt, const Formula& iso) {
  InterpretedStructure img;
  try {
    img = apply_scheme(rt, A);
  } catch (const ValidationFailure& e) {
    return "round-trip image undefined: " + first_problem(e.report);
  }
  Report lib = check_defined_isomorphism(A, rt, iso);
  if (!lib.passed()) return "library: " + first_problem(lib);
  std::string o = oracle::iso_failure(A, img, iso, rt.dim);
  if (!o.empty()) return "oracle: " + o;
  return {};
}

Outcome criterion1() {
  Outcome out;
  auto t0 = std::chrono::steady_clock::now();
  TranslationScheme rt = toy::roundtrip_T();
  for (std::size_t n = 1; n <= 6; ++n) {
    std::string p = iso_problem(toy::structure_T(n), rt, toy::eta());
    if (!p.empty()) out.fail("n=" + std::to_string(n) + ": " + p);
  }
  double s = seconds_since(t0);
  if (s >= 1.0) out.fail("took " + std::to_string(s) + " s");
  out.note("sizes 1..6");
  return out;
}

Outcome criterion2() {
  Outcome out;
  TranslationScheme rt = toy::roundtrip_S();
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 6; ++n)
    for (Element c = 0; c < n; ++c) {
      ++checked;
      std::string p = iso_problem(toy::structure_S(n, c), rt, toy::nu());
      if (!p.empty()) out.fail("n=" + std::to_string(n) + " c=" + std::to_string(c) + ": " + p);
    }
  out.note(std::to_string(checked) + " structures");
  return out;
}

Outcome criterion3() {
  Outcome out;
  TranslationScheme t = toy::scheme_t();
  for (std::size_t n = 1; n <= 6; ++n) {
    std::size_t uf = oracle::toy_class_count(n);
    std::string tag = "n=" + std::to_string(n) + ": ";
    if (uf != n + 1) out.fail(tag + "union-find finds " + std::to_string(uf) + " classes, expected " + std::to_string(n + 1));
    try {
      std::size_t got = apply_scheme(t, toy::structure_T(n)).result.size();
      if (got != uf) out.fail(tag + "apply_scheme gives " + std::to_string(got) + ", union-find " + std::to_string(uf));
    } catch (const ValidationFailure& e) {
      out.fail(tag + "t(A) undefined: " + first_problem(e.report));
    }
  }
  return out;
}

Outcome criterion4() {
  Outcome out;
  std::vector<TranslationScheme> schemes{identity_scheme(toy::lang_T(), "id_T"), identity_scheme(toy::lang_S(), "id_S"),
                                         toy::scheme_t(), toy::scheme_s(), toy::roundtrip_T(), toy::roundtrip_S()};
  std::size_t checks = 0, counterexamples = 0;
  for (const auto& s : schemes) {
    auto fs = gen::formulas(s.source, 3);
    std::vector<Translated> tfs;
    for (const auto& f : fs) tfs.push_back(translate(s, f));
    std::size_t used = 0, skipped = 0;
    for (std::size_t n = 0; n <= 3; ++n)
      for (const auto& A : all_structures(s.target, n)) {
        if (!validate_scheme_on(s, A).passed()) {
          ++skipped;
          continue;
        }
        ++used;
        CommutationChecker cc(s, A);
        for (std::size_t i = 0; i < fs.size(); ++i) {
          ++checks;
          if (auto bad = cc.counterexample(fs[i], tfs[i], 1 << 20)) {
            if (counterexamples++ < 3)
              out.fail(s.name + " size " + std::to_string(n) + ": " + render_formula(fs[i]) + " at " + assignment_text(*bad));
          }
        }
      }
    if (used == 0) out.fail(s.name + ": no structure of size <= 3 admits the scheme");
    out.note(s.name + ": " + std::to_string(fs.size()) + " formulas on " + std::to_string(used) + " structures, " +
             std::to_string(skipped) + " skipped");
  }
  if (counterexamples) out.fail(std::to_string(counterexamples) + " counterexamples");
  out.note(std::to_string(checks) + " formula/structure pairs");
  return out;
}

std::string set_text(const std::set<Element>& s) {
  std::string out;
  for (Element e : s) out += (out.empty() ? "" : ",") + std::to_string(e);
  return "{" + out + "}";
}

Outcome criterion5() {
  Outcome out;
  for (std::size_t n = 2; n <= 8; ++n) {
    auto A = toy::structure_T(n);
    auto lib = definable_singletons(A, 8);
    auto orc = oracle::fixed_points(A);
    if (!lib.empty() || !orc.empty()) out.fail("pure set n=" + std::to_string(n) + " has definable elements");
    for (Element c = 0; c < n; ++c) {
      auto B = toy::structure_S(n, c);
      std::set<Element> want{c};
      auto lib_s = definable_singletons(B, 8), orc_s = oracle::fixed_points(B);
      if (lib_s != want || orc_s != want)
        out.fail("S n=" + std::to_string(n) + " c=" + std::to_string(c) + ": definable " + set_text(lib_s) +
                 " (oracle " + set_text(orc_s) + "), expected " + set_text(want));
    }
  }
  return out;
}

Outcome criterion6() {
  Outcome out;
  for (std::size_t n = 2; n <= 5; ++n) {
    if (auto S = exists_connected_asymmetric_invariant(pure_set(n)))
      out.fail("library finds one on size " + std::to_string(n));
    if (oracle::invariant_tournament_exists(n)) out.fail("oracle finds one on size " + std::to_string(n));
  }
  return out;
}

// Compares the library's action with the hand-written permutation.
void check_against_oracle(Outcome& out, std::size_t k, const std::vector<forcing::Condition>& samples) {
  forcing::IndexPerm pi = forcing::BlockPi{k};
  for (std::size_t i = 0; i < 3 * k; ++i)
    for (int e = 0; e < 2; ++e) {
      auto [e2, i2] = oracle::block_pi(k, e, i);
      auto [e3, i3] = oracle::block_pi(k, e2, i2);
      if (e3 != e || i3 != i) out.fail("oracle permutation is not an involution");
      auto c = forcing::image(pi, {e, i});
      if (c.e != e2 || c.i != i2) out.fail("k=" + std::to_string(k) + ": image of column differs from oracle");
    }
  for (const auto& p : samples) {
    forcing::Condition want;
    for (const auto& [key, v] : p) {
      auto [e2, i2] = oracle::block_pi(k, key.e, key.i);
      want[forcing::Key{e2, i2, key.j}] = v;
    }
    auto got = forcing::act_condition(pi, p);
    if (got != want) {
      out.fail("k=" + std::to_string(k) + ": act_condition differs from oracle on " + forcing::to_string(p));
      return;
    }
    if (forcing::act_condition(pi, got) != p) out.fail("k=" + std::to_string(k) + ": not an involution on " + forcing::to_string(p));
    for (const auto& [key, v] : p)
      if (got.count(key)) {
        out.fail("k=" + std::to_string(k) + ": key sets overlap on " + forcing::to_string(p));
        return;
      }
  }
}

constexpr std::uint64_t kRandomSeed = 20240607;

Outcome criterion7() {
  Outcome out;
  std::size_t total = 0;
  for (std::size_t k = 1; k <= 4; ++k) {
    auto samples = forcing::all_conditions(3, k, 3);
    total += samples.size();
    Report r = forcing::check_pi_properties(k, samples);
    if (!r.passed()) out.fail("k=" + std::to_string(k) + ": " + first_problem(r));
    check_against_oracle(out, k, samples);
  }
  auto rnd = forcing::random_conditions(10000, 6, 4, 6, kRandomSeed);
  Report r = forcing::check_pi_properties(6, rnd);
  if (!r.passed()) out.fail("k=6 random: " + first_problem(r));
  check_against_oracle(out, 6, rnd);
  out.note(std::to_string(total) + " exhaustive conditions, 10000 random at k=6 with seed " + std::to_string(kRandomSeed));
  return out;
}

Outcome criterion8() {
  Outcome out;
  auto conds = forcing::all_conditions(4, 3, 3);
  std::vector<forcing::Column> cols;
  for (int e = 0; e < 2; ++e)
    for (std::size_t i = 0; i < 3; ++i) cols.push_back({e, i});
  std::size_t calls = 0;
  for (const auto& p : conds)
    for (const auto& a : cols)
      for (const auto& b : cols) {
        if (a == b) continue;
        ++calls;
        auto q = forcing::extend_to_separate(p, a, b);
        bool ext = std::all_of(p.begin(), p.end(), [&](const auto& kv) {
          auto it = q.find(kv.first);
          return it != q.end() && it->second == kv.second;
        });
        bool witness = false;
        for (const auto& [key, v] : q)
          if (key.e == a.e && key.i == a.i) {
            auto it = q.find(forcing::Key{b.e, b.i, key.j});
            if (it != q.end() && it->second != v) witness = true;
          }
        if (!ext || !witness) {
          out.fail(forcing::to_string(p) + " does not separate");
          return out;
        }
      }
  out.note(std::to_string(conds.size()) + " conditions, " + std::to_string(calls) + " column pairs");
  return out;
}

TranslationScheme inclusion_T_S() {
  TranslationScheme s;
  s.name = "inclusion";
  s.source = toy::lang_T();
  s.target = toy::lang_S();
  return s;
}

TranslationScheme c_to_xx() {
  TranslationScheme s;
  s.name = "c_to_xx";
  s.source = toy::lang_S();
  s.target = toy::lang_T();
  s.constants["c"] = parse_formula("x1 = x1");
  return s;
}

// Every verdict in the report must be backed: traces replay, countermodels falsify.
void audit(Outcome& out, const DefEqReport& rep, const std::map<std::string, SchemaTheory>& theories, std::size_t bound) {
  for (const auto& e : rep.entries) {
    const SchemaTheory& th = theories.at(e.theory);
    auto axioms = th.instantiate(bound);
    if (e.verdict.proved()) {
      std::string err = replay_error(e.verdict.trace, axioms, e.goal, th.signature);
      if (!err.empty()) out.fail("trace for " + render_formula(e.goal) + " does not replay: " + err);
    }
    if (e.verdict.refuted()) {
      const auto& cm = *e.verdict.countermodel;
      for (const auto& a : axioms)
        if (!evaluate(cm.structure, a)) out.fail("countermodel violates an axiom of " + e.theory);
      if (evaluate(cm.structure, e.goal, cm.assignment)) out.fail("countermodel satisfies " + render_formula(e.goal));
    }
  }
}

Outcome criterion9() {
  Outcome out;
  SchemaTheory T = toy::make_T(), S = toy::make_S();
  std::map<std::string, SchemaTheory> theories{{T.name, T}, {S.name, S}};

  auto id = identity_scheme(T.signature, "id_T");
  auto same = check_direct_defeq(id, id, T, T, default_probes(), default_pool());
  if (same.overall() != Status::Pass) out.fail("identity pair on T: " + std::string(to_string(same.overall())));
  audit(out, same, theories, kDefaultSchemaBound);

  const std::size_t bound = 2;
  auto toy = check_direct_defeq(inclusion_T_S(), c_to_xx(), T, S, default_probes(), {"x = c"}, {}, bound);
  audit(out, toy, theories, bound);
  bool refuted = false;
  for (const auto& e : toy.entries)
    if (e.clause == 2 && e.input == "x = c" && e.verdict.refuted() && e.verdict.countermodel->structure.size() <= 2) {
      refuted = true;
      out.note("toy pair refuted by " + countermodel_text(*e.verdict.countermodel));
    }
  if (!refuted) out.fail("toy pair: clause 2 on x = c not refuted with a countermodel of size <= 2");
  out.note(std::to_string(same.entries.size() + toy.entries.size()) + " verdicts audited");
  return out;
}

Signature corpus_signature() {
  Signature sig;
  sig.constants = {"c"};
  sig.relations = {{"R", 1}, {"E", 2}};
  return sig;
}

Outcome criterion10(const std::string& corpus_path) {
  Outcome out;
  ProverBounds b;
  Verdict v = tableau_prove({toy::at_least(3)}, toy::at_least(2), toy::lang_T(), b);
  if (!v.proved()) out.fail("at least 3 does not prove at least 2: " + std::string(to_string(v.kind)) + " " + v.reason);
  else if (!replays(v.trace, {toy::at_least(3)}, toy::at_least(2), toy::lang_T())) out.fail("trace does not replay");

  std::ifstream in(corpus_path);
  if (!in) {
    out.fail("cannot open " + corpus_path);
    return out;
  }
  Signature sig = corpus_signature();
  std::string line;
  std::size_t goals = 0, refuted = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++goals;
    std::vector<Formula> premises;
    std::string goal_text = line;
    if (auto at = line.find("|-"); at != std::string::npos) {
      goal_text = line.substr(at + 2);
      std::stringstream ps(line.substr(0, at));
      std::string p;
      while (std::getline(ps, p, ';')) premises.push_back(parse_formula(p, sig));
    }
    Formula goal = parse_formula(goal_text, sig);
    Verdict gv = tableau_prove(premises, goal, sig, b);
    if (gv.proved()) out.fail("proved a non-consequence: " + line);
    if (gv.refuted()) ++refuted;
    auto cm = find_countermodel(premises, goal, sig, 4);
    bool ok = cm.has_value();
    if (ok) {
      for (const auto& p : premises) ok = ok && evaluate(cm->structure, p);
      ok = ok && !evaluate(cm->structure, goal, cm->assignment);
    }
    if (!ok) out.fail("no verified countermodel of size <= 4: " + line);
  }
  if (goals != 50) out.fail("corpus has " + std::to_string(goals) + " goals, expected 50");
  out.note(std::to_string(goals) + " goals, " + std::to_string(refuted) + " refuted by the prover");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> which;
  std::string corpus = BIPRISM_DATA_DIR "/nonconsequences.txt";
  app.add_option("--criterion", which, "criterion number 1-10")->check(CLI::Range(1, 10));
  app.add_option("--corpus", corpus, "non-consequence corpus");
  CLI11_PARSE(app, argc, argv);
  if (which.empty())
    for (int i = 1; i <= 10; ++i) which.push_back(i);

  std::vector<std::function<Outcome()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                            criterion6, criterion7, criterion8, criterion9,
                                            [&] { return criterion10(corpus); }};
  bool ok = true;
  for (int c : which) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[c - 1]();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::ostringstream time;
    time.precision(2);
    time << std::fixed << seconds_since(t0);
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << " [" << time.str() << " s]";
    for (const auto& n : o.notes) std::cout << "; " << n;
    std::cout << "\n";
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
