#include <gtest/gtest.h>

#include "biprism.hpp"
#include "oracles.hpp"

using namespace biprism;

TEST(Toy, Theories) {
  auto T = toy::make_T();
  auto S = toy::make_S();
  EXPECT_TRUE(T.signature.relations.empty());
  EXPECT_TRUE(T.signature.constants.empty());
  EXPECT_EQ(S.signature.constants, (std::set<std::string>{"c"}));
  EXPECT_TRUE(S.signature.relations.empty());
  auto a = T.instantiate(6), b = S.instantiate(6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  auto B = toy::structure_S(3, 0);
  for (std::size_t n = 0; n < 3; ++n) EXPECT_TRUE(evaluate(B, b[n]));
  EXPECT_FALSE(evaluate(B, b[3]));
}

TEST(Toy, BundleShape) {
  auto p = toy::prop1_bundle();
  EXPECT_EQ(p.scheme_t.dim, 3u);
  EXPECT_EQ(p.scheme_t.delta, top());
  EXPECT_TRUE(p.scheme_t.source.same_symbols(toy::lang_S()));
  EXPECT_TRUE(p.scheme_t.target.same_symbols(toy::lang_T()));
  EXPECT_EQ(p.scheme_s.dim, 1u);
  EXPECT_EQ(p.scheme_s.delta, parse_formula("!(x1 = c)", toy::lang_S()));
  EXPECT_TRUE(classify(p.scheme_s).identity_preserving);
  EXPECT_EQ(p.eta, parse_formula("x = y1 & x = y2 & x = y3"));
  EXPECT_EQ(free_vars(p.nu), (std::set<std::string>{"x", "y1", "y2", "y3"}));
}

TEST(Toy, ImageSizes) {
  for (std::size_t n = 2; n <= 6; ++n) {
    EXPECT_EQ(apply_scheme(toy::scheme_t(), toy::structure_T(n)).result.size(), n + 1);
    EXPECT_EQ(oracle::toy_class_count(n), n + 1);
  }
  for (std::size_t n = 1; n <= 6; ++n)
    for (Element c = 0; c < n; ++c) EXPECT_EQ(apply_scheme(toy::scheme_s(), toy::structure_S(n, c)).result.size(), n - 1);
}

TEST(Toy, OneElementHasNoImageUnderT) {
  // A^3 is a single triple with x2 = x3, so nothing is left for c
  EXPECT_EQ(oracle::toy_class_count(1), 1u);
  EXPECT_THROW(apply_scheme(toy::scheme_t(), toy::structure_T(1)), ValidationFailure);
}

TEST(Toy, RoundtripPassesFromThree) {
  for (std::size_t n = 3; n <= 6; ++n) {
    Report r = toy::roundtrip_check(n);
    EXPECT_TRUE(r.passed()) << r.to_text();
    EXPECT_EQ(r.entries.size(), n + 1);
  }
}

TEST(Toy, EtaSideHoldsEverywhere) {
  for (std::size_t n = 1; n <= 6; ++n) EXPECT_EQ(toy::roundtrip_check(n).entries.front().status, Status::Pass) << n;
}

TEST(Toy, NuSideUndefinedBelowThree) {
  // s(B) has n-1 elements and t needs at least two to name c
  for (std::size_t n = 1; n <= 2; ++n) {
    Report r = toy::roundtrip_check(n);
    for (std::size_t i = 1; i < r.entries.size(); ++i) {
      EXPECT_EQ(r.entries[i].status, Status::Fail);
      EXPECT_EQ(r.entries[i].detail, "round-trip image undefined");
    }
  }
}

TEST(Toy, RoundtripRespectsCap) {
  EXPECT_THROW(toy::roundtrip_check(0), CapExceeded);
  EXPECT_THROW(toy::roundtrip_check(7, 6), CapExceeded);
}

TEST(Toy, NonDefinability) {
  for (std::size_t n = 3; n <= 8; ++n) EXPECT_TRUE(toy::nondefinability_check(n).passed()) << n;
  EXPECT_THROW(toy::nondefinability_check(1), CapExceeded);
  EXPECT_THROW(toy::nondefinability_check(9), CapExceeded);
}

TEST(Toy, NonDefinabilityAtTwo) {
  Report r = toy::nondefinability_check(2);
  EXPECT_EQ(r.entries[0].status, Status::Pass);  // pure set: nothing definable
  for (std::size_t i = 1; i < r.entries.size(); ++i) EXPECT_EQ(r.entries[i].status, Status::Fail);
}
