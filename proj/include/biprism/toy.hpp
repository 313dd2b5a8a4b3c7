#pragma once

// The toy pair: T (infinitely many objects, empty language) and S (the same
// sentences in a language with one constant c). They are bi-interpretable via
// a 3-dimensional quotient t and a relativization s, but not definitionally
// equivalent.

#include <string>

#include "biprism/interpretation.hpp"
#include "biprism/symmetry.hpp"
#include "biprism/syntax.hpp"

namespace biprism::toy {

inline constexpr std::size_t kStructureCap = 8;

inline Signature lang_T() {
  Signature s;
  s.name = "L_T";
  return s;
}

inline Signature lang_S() {
  Signature s;
  s.name = "L_S";
  s.constants.insert("c");
  return s;
}

inline Formula at_least(std::size_t n) { return expand_counting(n, "x", eq("x", "x")); }

inline SchemaTheory make_T() {
  SchemaTheory t;
  t.name = "T";
  t.signature = lang_T();
  t.schemas.push_back({"exists>=n x. x = x", [](std::size_t n) { return at_least(n); }});
  return t;
}

inline SchemaTheory make_S() {
  SchemaTheory t = make_T();
  t.name = "S";
  t.signature = lang_S();
  return t;
}

/// t: L_S -> L_T. Triples, with all triples (a, b, b) for fixed a identified and
/// every triple with distinct last components identified to a new point c.
inline TranslationScheme scheme_t() {
  TranslationScheme s;
  s.name = "t";
  s.source = lang_S();
  s.target = lang_T();
  s.dim = 3;
  s.delta = top();
  s.epsilon = parse_formula("(x2 = x3 & y2 = y3 & x1 = y1) | (!(x2 = x3) & !(y2 = y3))");
  s.constants["c"] = parse_formula("!(x2 = x3)");
  return s;
}

/// s: L_T -> L_S. Drop the point named by c.
inline TranslationScheme scheme_s() {
  TranslationScheme s;
  s.name = "s";
  s.source = lang_T();
  s.target = lang_S();
  s.dim = 1;
  s.delta = parse_formula("!(x1 = c)", lang_S());
  return s;
}

/// eta(x, y1, y2, y3): A -> s(t(A)).
inline Formula eta() { return parse_formula("x = y1 & x = y2 & x = y3"); }

/// nu(x, y1, y2, y3): B -> t(s(B)). Non-c points go to their diagonal class,
/// c goes to the class of triples with distinct last components.
inline Formula nu() {
  return parse_formula("(!(x = c) & x = y1 & x = y2 & x = y3) | (x = c & !(y2 = y3))", lang_S());
}

struct Prop1Bundle {
  SchemaTheory theory_T, theory_S;
  TranslationScheme scheme_t, scheme_s;
  Formula eta, nu;
};

inline Prop1Bundle prop1_bundle() { return {make_T(), make_S(), scheme_t(), scheme_s(), eta(), nu()}; }

/// L_T -> L_T, models A |-> s(t(A)).
inline TranslationScheme roundtrip_T() { return compose(scheme_t(), scheme_s()); }

/// L_S -> L_S, models B |-> t(s(B)).
inline TranslationScheme roundtrip_S() { return compose(scheme_s(), scheme_t()); }

inline FiniteStructure structure_T(std::size_t n) { return FiniteStructure(lang_T(), n); }

inline FiniteStructure structure_S(std::size_t n, Element c) { return FiniteStructure(lang_S(), n, {}, {{"c", c}}); }

namespace detail {

inline void add_iso(Report& r, const std::string& name, const FiniteStructure& A, const TranslationScheme& rt,
                    const Formula& iso) {
  try {
    Report sub = check_defined_isomorphism(A, rt, iso);
    const ReportEntry* bad = sub.first_failure();
    r.add(name, sub.passed(), bad ? "fails " + bad->check : "isomorphism", bad ? bad->witness : std::string());
  } catch (const ValidationFailure& e) {
    const ReportEntry* bad = e.report.first_failure();
    r.add(name, false, "round-trip image undefined", bad ? bad->check + ": " + bad->detail : std::string());
  }
}

inline void check_cap(std::size_t n, std::size_t lo, std::size_t cap) {
  if (n < lo || n > cap)
    throw CapExceeded("n = " + std::to_string(n) + " outside [" + std::to_string(lo) + ", " + std::to_string(cap) + "]");
}

}  // namespace detail

/// eta on the size-n T-structure, nu on every size-n S-structure.
inline Report roundtrip_check(std::size_t n, std::size_t cap = kStructureCap) {
  detail::check_cap(n, 1, cap);
  Report r;
  r.title = "prop1 roundtrip n=" + std::to_string(n);
  detail::add_iso(r, "eta: A_" + std::to_string(n) + " ~ s(t(A))", structure_T(n), roundtrip_T(), eta());
  TranslationScheme rs = roundtrip_S();
  for (Element k = 0; k < n; ++k)
    detail::add_iso(r, "nu: B_" + std::to_string(n) + "[c=" + std::to_string(k) + "] ~ t(s(B))", structure_S(n, k), rs,
                    nu());
  return r;
}

/// No element of a pure set is definable; in an S-structure only c is.
inline Report nondefinability_check(std::size_t n, std::size_t cap = kDefaultAutomorphismCap) {
  detail::check_cap(n, 2, cap);
  Report r;
  r.title = "prop1 non-definability n=" + std::to_string(n);
  auto none = definable_singletons(structure_T(n), cap);
  r.add("pure set of size " + std::to_string(n) + ": no definable element", none.empty(),
        std::to_string(none.size()) + " definable");
  for (Element k = 0; k < n; ++k) {
    auto ds = definable_singletons(structure_S(n, k), cap);
    r.add("S-structure c=" + std::to_string(k) + ": only c definable", ds == std::set<Element>{k},
          std::to_string(ds.size()) + " definable");
  }
  return r;
}

}  // namespace biprism::toy
