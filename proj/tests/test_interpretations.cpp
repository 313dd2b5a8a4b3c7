#include <gtest/gtest.h>

#include "biprism.hpp"
#include "formula_gen.hpp"
#include "oracles.hpp"

using namespace biprism;

namespace {

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

TranslationScheme squares() {
  TranslationScheme s;
  s.name = "squares";
  s.source = toy::lang_T();
  s.target = toy::lang_T();
  s.dim = 2;
  return s;
}

// Edge relation interpreted as its converse; a second nontrivial scheme over a relational language.
TranslationScheme converse() {
  Signature g;
  g.name = "G";
  g.relations = {{"E", 2}};
  TranslationScheme s;
  s.name = "converse";
  s.source = g;
  s.target = g;
  s.relations["E"] = parse_formula("E(x2_1, x1_1)", g);
  return s;
}

std::set<Tuple> as_set(const std::vector<Tuple>& v) { return {v.begin(), v.end()}; }

// Maps each class of compose(u, v)(A) to the class of v(u(A)) named by its
// representative, and checks that the map is an isomorphism.
::testing::AssertionResult functorial(const TranslationScheme& u, const TranslationScheme& v, const FiniteStructure& A) {
  TranslationScheme uv = compose(u, v);
  InterpretedStructure whole = apply_scheme(uv, A);
  InterpretedStructure first = apply_scheme(u, A);
  InterpretedStructure second = apply_scheme(v, first.result);
  if (whole.result.size() != second.result.size())
    return ::testing::AssertionFailure() << "sizes " << whole.result.size() << " vs " << second.result.size();
  const std::size_t du = u.dim, dv = v.dim;
  std::vector<Element> f(whole.result.size());
  for (Element k = 0; k < whole.result.size(); ++k) {
    const Tuple& r = whole.rep[k];
    Tuple outer;
    for (std::size_t b = 0; b < dv; ++b) {
      Tuple block(r.begin() + b * du, r.begin() + (b + 1) * du);
      auto it = first.class_of.find(block);
      if (it == first.class_of.end()) return ::testing::AssertionFailure() << "block outside the domain of u";
      outer.push_back(it->second);
    }
    auto it = second.class_of.find(outer);
    if (it == second.class_of.end()) return ::testing::AssertionFailure() << "tuple outside the domain of v";
    f[k] = it->second;
  }
  if (std::set<Element>(f.begin(), f.end()).size() != f.size()) return ::testing::AssertionFailure() << "not injective";
  for (const auto& [c, e] : whole.result.constants())
    if (f[e] != second.result.constant(c)) return ::testing::AssertionFailure() << "constant " << c;
  for (const auto& [r, ts] : whole.result.relations()) {
    std::set<Tuple> mapped;
    for (const auto& t : ts) {
      Tuple m;
      for (Element e : t) m.push_back(f[e]);
      mapped.insert(m);
    }
    if (mapped != second.result.relations().at(r)) return ::testing::AssertionFailure() << "relation " << r;
  }
  return ::testing::AssertionSuccess();
}

}  // namespace

TEST(Scheme, ShapeErrors) {
  TranslationScheme s = toy::scheme_t();
  s.delta = parse_formula("x4 = x4");
  EXPECT_THROW(s.check_shape(), SchemeError);
  TranslationScheme m = c_to_xx();
  m.constants.clear();
  EXPECT_THROW(m.check_shape(), SchemeError);
  TranslationScheme z = squares();
  z.dim = 0;
  EXPECT_THROW(z.check_shape(), SchemeError);
}

TEST(Classify, Flags) {
  auto ft = classify(toy::scheme_t());
  EXPECT_FALSE(ft.one_dimensional);
  EXPECT_TRUE(ft.unrelativized);
  EXPECT_FALSE(ft.direct);
  auto fs = classify(toy::scheme_s());
  EXPECT_TRUE(fs.one_dimensional);
  EXPECT_TRUE(fs.identity_preserving);
  EXPECT_FALSE(fs.unrelativized);
  EXPECT_FALSE(fs.direct);
  EXPECT_TRUE(classify(identity_scheme(toy::lang_S())).direct);
}

TEST(Classify, CompositeOfDirectIsDirect) {
  std::vector<TranslationScheme> direct{identity_scheme(toy::lang_T()), identity_scheme(toy::lang_S()), inclusion_T_S(),
                                        c_to_xx(), converse()};
  for (const auto& a : direct)
    for (const auto& b : direct)
      if (b.target.same_symbols(a.source)) {
        EXPECT_TRUE(classify(compose(a, b)).direct) << a.name << " " << b.name;
      }
}

TEST(Translate, IdentityIsIdentityUpToRenaming) {
  auto id = identity_scheme(toy::lang_T());
  for (const auto& f : gen::formulas(toy::lang_T(), 3)) EXPECT_TRUE(alpha_equivalent(translate_formula(id, f), f));
}

TEST(Translate, ConstantIsParaphrased) {
  Formula f = parse_formula("x = c", toy::lang_S());
  Translated tr = translate(toy::scheme_t(), f);
  const Formula& g = tr.formula;
  // one free triple for x, and the constant turns into a quantified triple
  EXPECT_EQ(free_vars(g).size(), 3u);
  EXPECT_TRUE(constants_of(g).empty());
  for (std::size_t n = 2; n <= 3; ++n) {
    auto A = toy::structure_T(n);
    auto img = apply_scheme(toy::scheme_t(), A);
    const auto& xs = tr.components.at("x");
    for (Element k = 0; k < img.result.size(); ++k) {
      Assignment a;
      for (std::size_t j = 0; j < 3; ++j) a[xs[j]] = img.rep[k][j];
      EXPECT_EQ(evaluate(A, g, a), k == img.result.constant("c"));
    }
  }
}

TEST(Translate, SourceSignatureEnforced) {
  EXPECT_THROW(translate_formula(toy::scheme_s(), parse_formula("x = c", toy::lang_S())), SignatureError);
}

TEST(Compose, Dimensions) {
  EXPECT_EQ(toy::roundtrip_T().dim, 3u);
  EXPECT_EQ(toy::roundtrip_S().dim, 3u);
  EXPECT_EQ(compose(squares(), squares()).dim, 4u);
  EXPECT_THROW(compose(toy::scheme_t(), toy::scheme_t()), SchemeError);
}

TEST(Compose, FunctorialOnSmallStructures) {
  // pairs (u, v) with v's target equal to u's source; models A |-> v(u(A))
  struct Case {
    TranslationScheme u, v;
  };
  std::vector<Case> cases{{toy::scheme_t(), toy::scheme_s()},
                          {toy::scheme_s(), toy::scheme_t()},
                          {identity_scheme(toy::lang_S()), toy::scheme_s()},
                          {toy::scheme_t(), identity_scheme(toy::lang_S())},
                          {squares(), squares()},
                          {converse(), converse()},
                          {inclusion_T_S(), c_to_xx()}};
  std::size_t checked = 0;
  for (const auto& [u, v] : cases) {
    TranslationScheme uv = compose(u, v);
    for (std::size_t n = 0; n <= 3; ++n)
      for (const auto& A : all_structures(u.target, n)) {
        if (!validate_scheme_on(u, A).passed()) continue;
        auto first = apply_scheme(u, A);
        bool inner_ok = validate_scheme_on(v, first.result).passed();
        EXPECT_EQ(validate_scheme_on(uv, A).passed(), inner_ok) << u.name << " then " << v.name << " size " << n;
        if (!inner_ok) continue;
        ++checked;
        EXPECT_TRUE(functorial(u, v, A)) << u.name << " then " << v.name << " size " << n;
      }
  }
  EXPECT_GT(checked, 20u);
}

TEST(Compose, IdentityLaw) {
  for (const auto& s : {toy::scheme_t(), toy::scheme_s(), c_to_xx()}) {
    auto left = compose(identity_scheme(s.target), s);
    for (std::size_t n = 1; n <= 3; ++n)
      for (const auto& A : all_structures(s.target, n)) {
        if (!validate_scheme_on(s, A).passed()) continue;
        auto a = apply_scheme(s, A), b = apply_scheme(left, A);
        EXPECT_EQ(a.result, b.result) << s.name;
      }
  }
}

TEST(Validate, ToyTPassesOnPureSets) {
  for (std::size_t n = 2; n <= 4; ++n) EXPECT_TRUE(validate_scheme_on(toy::scheme_t(), toy::structure_T(n)).passed());
}

TEST(Validate, ToyTOnOneElementLacksTheConstant) {
  Report r = validate_scheme_on(toy::scheme_t(), toy::structure_T(1));
  ASSERT_NE(r.first_failure(), nullptr);
  EXPECT_EQ(r.first_failure()->check, "constant c defines one class");
  for (const auto& e : r.entries)
    if (e.check.rfind("epsilon", 0) == 0) {
      EXPECT_EQ(e.status, Status::Pass);
    }
}

TEST(Validate, ConstantMeetingSeveralClasses) {
  // c |-> x1 = x1 names every element; with componentwise identity that is two classes
  Report r = validate_scheme_on(c_to_xx(), toy::structure_T(2));
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.first_failure()->check, "constant c defines one class");
  // collapse everything into one class and the same definition is fine
  TranslationScheme one = c_to_xx();
  one.epsilon = parse_formula("x1 = x1");
  EXPECT_TRUE(validate_scheme_on(one, toy::structure_T(2)).passed());
}

TEST(Validate, NonEquivalenceReported) {
  TranslationScheme s = identity_scheme(toy::lang_T());
  s.epsilon = parse_formula("!(x1 = y1)");
  Report r = validate_scheme_on(s, toy::structure_T(2));
  EXPECT_EQ(r.first_failure()->check, "epsilon reflexive");
  TranslationScheme t = identity_scheme(toy::lang_T());
  t.dim = 2;
  t.epsilon = parse_formula("x1 = y2");  // not symmetric
  Report q = validate_scheme_on(t, toy::structure_T(2));
  bool sym_failed = false;
  for (const auto& e : q.entries) sym_failed |= e.check == "epsilon symmetric" && e.status == Status::Fail;
  EXPECT_TRUE(sym_failed);
}

TEST(Validate, RelationMustRespectIdentity) {
  Signature g = converse().source;
  TranslationScheme s = converse();
  s.epsilon = parse_formula("x1 = x1", g);
  FiniteStructure A(g, 2, {{"E", {{0, 1}}}});
  Report r = validate_scheme_on(s, A);
  EXPECT_EQ(r.first_failure()->check, "relation E respects epsilon");
}

TEST(Validate, IdentityAlwaysPasses) {
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& A : all_structures(toy::lang_S(), n))
      EXPECT_TRUE(validate_scheme_on(identity_scheme(toy::lang_S()), A).passed());
}

TEST(Apply, ToyTOnTwoElements) {
  auto img = apply_scheme(toy::scheme_t(), toy::structure_T(2));
  ASSERT_EQ(img.result.size(), 3u);
  std::set<std::set<Tuple>> classes;
  for (const auto& c : img.classes) classes.insert(as_set(c));
  std::set<Tuple> first{{0, 0, 0}, {0, 1, 1}}, second{{1, 0, 0}, {1, 1, 1}}, distinct;
  for (Element a = 0; a < 2; ++a) {
    distinct.insert({a, 0, 1});
    distinct.insert({a, 1, 0});
  }
  EXPECT_EQ(classes, (std::set<std::set<Tuple>>{first, second, distinct}));
  EXPECT_EQ(as_set(img.classes[img.result.constant("c")]), distinct);
}

TEST(Apply, RepresentativesAreLeast) {
  auto img = apply_scheme(toy::scheme_t(), toy::structure_T(3));
  for (std::size_t k = 0; k < img.classes.size(); ++k) {
    EXPECT_EQ(img.rep[k], *std::min_element(img.classes[k].begin(), img.classes[k].end()));
    for (const auto& t : img.classes[k]) EXPECT_EQ(img.class_of.at(t), k);
  }
}

TEST(Apply, ToySDropsTheConstant) {
  auto img = apply_scheme(toy::scheme_s(), toy::structure_S(3, 2));
  EXPECT_EQ(img.result.size(), 2u);
  EXPECT_EQ(img.rep, (std::vector<Tuple>{{0}, {1}}));
}

TEST(Apply, QuotientSizesMatchUnionFind) {
  for (std::size_t n = 2; n <= 6; ++n)
    EXPECT_EQ(apply_scheme(toy::scheme_t(), toy::structure_T(n)).result.size(), oracle::toy_class_count(n));
}

TEST(Apply, ComponentwiseSizeIsPower) {
  for (std::size_t n = 0; n <= 4; ++n) EXPECT_EQ(apply_scheme(squares(), pure_set(n)).result.size(), n * n);
}

TEST(Apply, EmptyDomainAllowed) {
  auto img = apply_scheme(toy::scheme_s(), toy::structure_S(1, 0));
  EXPECT_EQ(img.result.size(), 0u);
}

TEST(Apply, ThrowsWithReport) {
  try {
    apply_scheme(toy::scheme_t(), toy::structure_T(1));
    FAIL() << "no exception";
  } catch (const ValidationFailure& e) {
    EXPECT_FALSE(e.report.passed());
  }
}

TEST(Commutation, CountingExamples) {
  auto A = toy::structure_T(2);
  CommutationChecker cc(toy::scheme_t(), A);
  for (std::size_t k = 3; k <= 4; ++k) {
    Formula f = toy::at_least(k);
    EXPECT_FALSE(cc.counterexample(f).has_value());
    EXPECT_EQ(evaluate(cc.image().result, f), k == 3);
    EXPECT_EQ(evaluate(A, translate_formula(toy::scheme_t(), f)), k == 3);
  }
  EXPECT_TRUE(check_commutation(toy::scheme_s(), toy::structure_S(3, 0), top()).passed());
}

TEST(Commutation, RelationalScheme) {
  Signature g = converse().source;
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& A : all_structures(g, n)) {
      CommutationChecker cc(converse(), A);
      for (const auto& f : gen::formulas(g, 2)) ASSERT_FALSE(cc.counterexample(f).has_value()) << render_formula(f);
    }
}

TEST(Commutation, DetectsAWrongTranslation) {
  // a broken checker would pass anything; compare against an unrelated image
  auto A = toy::structure_T(3);
  InterpretedStructure img = apply_scheme(toy::scheme_t(), A);
  Formula f = toy::at_least(4);
  EXPECT_TRUE(evaluate(img.result, f));
  EXPECT_FALSE(evaluate(A, f));
}

TEST(DefinedIsomorphism, ToyEta) {
  EXPECT_TRUE(check_defined_isomorphism(toy::structure_T(3), toy::roundtrip_T(), toy::eta()).passed());
  EXPECT_TRUE(check_defined_isomorphism(toy::structure_T(1), toy::roundtrip_T(), toy::eta()).passed());
}

TEST(DefinedIsomorphism, BadEtaFails) {
  Report r = check_defined_isomorphism(toy::structure_T(3), toy::roundtrip_T(), parse_formula("y1 = y2"));
  EXPECT_FALSE(r.passed());
  std::set<std::string> failed;
  for (const auto& e : r.entries)
    if (e.status == Status::Fail) failed.insert(e.check);
  EXPECT_TRUE(failed.count("functional") || failed.count("injective"));
}

TEST(DefinedIsomorphism, AgreesWithOracle) {
  std::vector<Formula> etas{toy::eta(), parse_formula("x = y1"), parse_formula("x = y2 & x = y3"),
                            parse_formula("y1 = y2"), parse_formula("!(x = y1)")};
  for (std::size_t n = 1; n <= 4; ++n) {
    auto A = toy::structure_T(n);
    auto img = apply_scheme(toy::roundtrip_T(), A);
    for (const auto& eta : etas)
      EXPECT_EQ(check_defined_isomorphism(A, toy::roundtrip_T(), eta).passed(),
                oracle::iso_failure(A, img, eta, 3).empty())
          << render_formula(eta) << " n=" << n;
  }
}

TEST(DefinedIsomorphism, SignatureMismatch) {
  EXPECT_THROW(check_defined_isomorphism(toy::structure_T(2), toy::scheme_t(), toy::eta()), SchemeError);
}
