// Command-line front end. Exit status: 0 success, 1 a check failed, 2 bad usage or input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biprism.hpp"

using namespace biprism;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string format = "text";
  std::vector<std::string> schemes;
  std::vector<std::string> theories;
  std::string structure;
  std::string formula;
  std::string signature;
  std::string condition;
  std::string col_a, col_b;
  std::string export_dir;
  std::vector<std::string> probes, pool;
  std::size_t n = 0, k = 0, max_size = 0, depth = 0, arity = 1, max_entries = 2, samples = 0;
  std::size_t schema_bound = kDefaultSchemaBound;
  std::uint64_t seed = 1;
  bool exhaustive = false, roundtrip = false, nondef = false;
};

bool structured(const Options& o) { return o.format == "structured"; }

int emit(const Options& o, const Report& r) {
  if (structured(o)) std::cout << io::report_to_json(r).dump(2) << "\n";
  else std::cout << r.to_text();
  return r.overall() == Status::Fail ? 1 : 0;
}

void emit_value(const Options& o, const std::string& key, const std::string& text) {
  if (structured(o)) std::cout << json{{key, text}}.dump(2) << "\n";
  else std::cout << text << "\n";
}

TranslationScheme scheme_arg(const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) {
    std::string b = spec.substr(8);
    if (b == "t") return toy::scheme_t();
    if (b == "s") return toy::scheme_s();
    if (b == "id-T") return identity_scheme(toy::lang_T(), "id_T");
    if (b == "id-S") return identity_scheme(toy::lang_S(), "id_S");
    if (b == "rt-T") return toy::roundtrip_T();
    if (b == "rt-S") return toy::roundtrip_S();
    throw io::InputError("unknown builtin scheme '" + b + "'");
  }
  return io::load_scheme(spec);
}

TranslationScheme one_scheme(const Options& o) {
  if (o.schemes.size() != 1) throw io::InputError("expected exactly one --scheme");
  return scheme_arg(o.schemes[0]);
}

Signature signature_arg(const Options& o) {
  if (o.signature.empty()) return {};
  return io::signature_from_json(json(o.signature));
}

forcing::Column column_arg(const std::string& s) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw io::InputError("column must be written e,i");
  try {
    return {std::stoi(s.substr(0, comma)), std::stoul(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw io::InputError("column must be written e,i");
  }
}

std::string tuple_list(const std::vector<Tuple>& ts) {
  std::string s;
  for (const auto& t : ts) {
    s += s.empty() ? "(" : " (";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
    s += ")";
  }
  return s;
}

int cmd_parse(const Options& o) {
  Formula f = parse_formula(o.formula, signature_arg(o));
  if (structured(o)) {
    const auto free = free_vars(f);
    std::vector<std::string> fv(free.begin(), free.end());
    std::cout << json{{"formula", render_formula(f)}, {"free", fv}, {"depth", quantifier_depth(f)}}.dump(2) << "\n";
  } else {
    std::cout << render_formula(f) << "\n";
  }
  return 0;
}

int cmd_translate(const Options& o) {
  auto s = one_scheme(o);
  Formula f = parse_formula(o.formula, s.source);
  emit_value(o, "translation", render_formula(translate_formula(s, f)));
  return 0;
}

int cmd_apply(const Options& o) {
  auto s = one_scheme(o);
  auto A = io::load_structure(o.structure);
  Report r = validate_scheme_on(s, A);
  if (!r.passed()) return emit(o, r);
  auto img = apply_scheme(s, A);
  if (structured(o)) {
    json j = io::structure_to_json(img.result);
    j["representatives"] = img.rep;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "size " << img.result.size() << "\n";
    for (std::size_t i = 0; i < img.classes.size(); ++i)
      std::cout << "  class " << i << ": " << tuple_list(img.classes[i]) << "\n";
    for (const auto& [c, e] : img.result.constants()) std::cout << "  " << c << " = class " << e << "\n";
    for (const auto& [r2, ts] : img.result.relations())
      std::cout << "  " << r2 << " = {" << tuple_list({ts.begin(), ts.end()}) << "}\n";
  }
  return 0;
}

int cmd_compose(const Options& o) {
  if (o.schemes.size() != 2) throw io::InputError("compose needs --scheme OUTER --scheme INNER");
  auto c = compose(scheme_arg(o.schemes[0]), scheme_arg(o.schemes[1]));
  std::cout << io::scheme_to_json(c).dump(2) << "\n";
  return 0;
}

int cmd_validate(const Options& o) {
  return emit(o, validate_scheme_on(one_scheme(o), io::load_structure(o.structure)));
}

int cmd_roundtrip(const Options& o) {
  auto s = one_scheme(o);
  auto A = io::load_structure(o.structure);
  return emit(o, check_defined_isomorphism(A, s, parse_formula(o.formula, A.signature())));
}

FiniteStructure structure_or_pure(const Options& o) {
  if (!o.structure.empty()) return io::load_structure(o.structure);
  if (o.n == 0) throw io::InputError("give --structure or --n");
  return pure_set(o.n);
}

int cmd_orbits(const Options& o) {
  auto A = structure_or_pure(o);
  std::size_t cap = automorphism_cap_from_env();
  auto orbs = orbits(A, o.arity, cap);
  auto ds = definable_singletons(A, cap);
  if (structured(o)) {
    json j;
    j["orbits"] = orbs;
    j["definable"] = std::vector<Element>(ds.begin(), ds.end());
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << orbs.size() << " orbit" << (orbs.size() == 1 ? "" : "s") << " of arity " << o.arity << "\n";
  for (const auto& orb : orbs) std::cout << "  size " << orb.size() << ": " << tuple_list(orb) << "\n";
  std::string d;
  for (Element e : ds) d += (d.empty() ? "" : " ") + std::to_string(e);
  std::cout << "definable singletons: " << (d.empty() ? "none" : d) << "\n";
  return 0;
}

int cmd_invariant_scan(const Options& o) {
  auto A = structure_or_pure(o);
  auto S = exists_connected_asymmetric_invariant(A, automorphism_cap_from_env());
  Report r;
  r.title = "invariant connected asymmetric relation on a structure of size " + std::to_string(A.size());
  std::string w;
  if (S)
    for (const auto& [x, y] : *S) w += (w.empty() ? "" : " ") + std::to_string(x) + "<" + std::to_string(y);
  r.add("no invariant connected asymmetric relation", !S.has_value(), "", w);
  return emit(o, r);
}

ProverBounds bounds_of(const Options& o) {
  ProverBounds b;
  if (o.depth) b.tableau_depth = o.depth;
  if (o.max_size) b.countermodel_max_size = o.max_size;
  return b;
}

int cmd_defeq(const Options& o) {
  if (o.schemes.size() != 2 || o.theories.size() != 2)
    throw io::InputError("defeq check needs --scheme t0 --scheme t1 --theory T0 --theory T1");
  std::vector<std::string> probes = o.probes, pool = o.pool;
  if (probes.empty()) probes = default_probes();
  if (pool.empty()) pool = default_pool();
  auto rep = check_direct_defeq(scheme_arg(o.schemes[0]), scheme_arg(o.schemes[1]), io::load_theory(o.theories[0]),
                                io::load_theory(o.theories[1]), probes, pool, bounds_of(o), o.schema_bound);
  return emit(o, rep.to_report());
}

int cmd_pi_check(const Options& o) {
  if (o.k == 0) throw io::InputError("--k must be positive");
  std::vector<forcing::Condition> samples;
  if (o.exhaustive || o.samples == 0) samples = forcing::all_conditions(o.max_entries, o.k, 3);
  if (o.samples) {
    auto more = forcing::random_conditions(o.samples, o.k, 4, o.max_entries, o.seed);
    samples.insert(samples.end(), more.begin(), more.end());
  }
  return emit(o, forcing::check_pi_properties(o.k, samples));
}

int cmd_separate(const Options& o) {
  auto p = forcing::parse_condition(o.condition);
  auto q = forcing::extend_to_separate(p, column_arg(o.col_a), column_arg(o.col_b));
  emit_value(o, "condition", forcing::to_string(q));
  return 0;
}

int cmd_demo(const Options& o) {
  Report r;
  r.title = "prop1";
  bool any = o.roundtrip || o.nondef || !o.export_dir.empty();
  std::vector<std::size_t> sizes;
  if (o.n) sizes = {o.n};
  else
    for (std::size_t n = 1; n <= 6; ++n) sizes.push_back(n);
  if (o.roundtrip || !any)
    for (std::size_t n : sizes) r.append(toy::roundtrip_check(n), "n=" + std::to_string(n) + " ");
  if (o.nondef || !any)
    for (std::size_t n : sizes)
      if (n >= 2) r.append(toy::nondefinability_check(n, automorphism_cap_from_env()), "n=" + std::to_string(n) + " ");
  if (!o.export_dir.empty()) {
    fs::create_directories(o.export_dir);
    for (const auto& s : {toy::scheme_t(), toy::scheme_s()}) {
      fs::path p = fs::path(o.export_dir) / ("prop1_" + s.name + ".scm");
      std::ofstream(p) << io::scheme_to_json(s).dump(2) << "\n";
      r.add("exported " + p.string(), Status::Pass);
    }
  }
  return emit(o, r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biprism: interpretations between finite first-order structures"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--format", o.format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

  auto scheme_opt = [&](CLI::App* c, bool required, const std::string& help = "scheme file or builtin:NAME") {
    auto* opt = c->add_option("--scheme", o.schemes, help);
    if (required) opt->required();
  };
  int rc = 0;
  auto run = [&](CLI::App* c, int (*fn)(const Options&)) { c->callback([&rc, &o, fn] { rc = fn(o); }); };

  auto* parse = app.add_subcommand("parse", "parse and print a formula");
  parse->add_option("--formula", o.formula)->required();
  parse->add_option("--signature", o.signature, "signature file");
  run(parse, cmd_parse);

  auto* tr = app.add_subcommand("translate", "translate a source formula");
  scheme_opt(tr, true);
  tr->add_option("--formula", o.formula)->required();
  run(tr, cmd_translate);

  auto* ap = app.add_subcommand("apply", "interpret a structure");
  scheme_opt(ap, true);
  ap->add_option("--structure", o.structure)->required();
  run(ap, cmd_apply);

  auto* co = app.add_subcommand("compose", "compose --scheme OUTER --scheme INNER");
  scheme_opt(co, true);
  run(co, cmd_compose);

  auto* va = app.add_subcommand("validate", "check a scheme's side conditions on a structure");
  scheme_opt(va, true);
  va->add_option("--structure", o.structure)->required();
  run(va, cmd_validate);

  auto* rt = app.add_subcommand("roundtrip", "check that a formula defines an isomorphism onto a round-trip image");
  scheme_opt(rt, true, "round-trip scheme");
  rt->add_option("--structure", o.structure)->required();
  rt->add_option("--formula", o.formula, "eta(x, y1..yd)")->required();
  run(rt, cmd_roundtrip);

  auto* ob = app.add_subcommand("orbits", "automorphism orbits and definable elements");
  ob->add_option("--structure", o.structure);
  ob->add_option("--n", o.n, "pure set of this size");
  ob->add_option("--k", o.arity, "tuple arity");
  run(ob, cmd_orbits);

  auto* iv = app.add_subcommand("invariant-scan", "search for an invariant connected asymmetric relation");
  iv->add_option("--structure", o.structure);
  iv->add_option("--n", o.n, "pure set of this size");
  run(iv, cmd_invariant_scan);

  auto* de = app.add_subcommand("defeq", "definitional equivalence checks");
  de->require_subcommand(1);
  auto* dc = de->add_subcommand("check", "bounded check with direct schemes t0, t1");
  scheme_opt(dc, true, "t0 then t1");
  dc->add_option("--theory", o.theories, "T0 then T1")->required();
  dc->add_option("--probe", o.probes);
  dc->add_option("--pool", o.pool);
  dc->add_option("--depth", o.depth, "tableau depth");
  dc->add_option("--max-size", o.max_size, "countermodel size bound");
  dc->add_option("--n", o.schema_bound, "schema instances 1..n");
  run(dc, cmd_defeq);

  auto* fo = app.add_subcommand("forcing", "condition combinatorics");
  fo->require_subcommand(1);
  auto* pc = fo->add_subcommand("pi-check", "properties of the block permutation");
  pc->add_option("--k", o.k)->required();
  pc->add_flag("--exhaustive", o.exhaustive);
  pc->add_option("--max-entries", o.max_entries);
  pc->add_option("--samples", o.samples, "random samples");
  pc->add_option("--seed", o.seed);
  run(pc, cmd_pi_check);
  auto* se = fo->add_subcommand("separate", "extend a condition to separate two columns");
  se->add_option("--condition", o.condition, "entries e,i,j=v")->required();
  se->add_option("--a", o.col_a, "column e,i")->required();
  se->add_option("--b", o.col_b, "column e,i")->required();
  run(se, cmd_separate);

  auto* dm = app.add_subcommand("demo", "built-in examples");
  dm->require_subcommand(1);
  auto* p1 = dm->add_subcommand("prop1", "the toy pair T and S");
  p1->add_flag("--roundtrip", o.roundtrip);
  p1->add_flag("--nondef", o.nondef);
  p1->add_option("--n", o.n);
  p1->add_option("--export", o.export_dir, "write the schemes here");
  run(p1, cmd_demo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
