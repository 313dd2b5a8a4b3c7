#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "biprism/structure.hpp"

namespace biprism {

using Permutation = std::vector<Element>;

inline constexpr std::size_t kDefaultAutomorphismCap = 8;
inline constexpr std::size_t kDefaultOrbitUnionCap = std::size_t(1) << 20;

/// Automorphism size cap, overridable through BIPRISM_CAP.
inline std::size_t automorphism_cap_from_env(std::size_t fallback = kDefaultAutomorphismCap) {
  if (const char* s = std::getenv("BIPRISM_CAP")) {
    char* end = nullptr;
    unsigned long v = std::strtoul(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return v;
  }
  return fallback;
}

inline bool preserves(const FiniteStructure& A, const Permutation& p) {
  for (const auto& [c, e] : A.constants())
    if (p[e] != e) return false;
  for (const auto& [r, tuples] : A.relations()) {
    Tuple img;
    for (const auto& t : tuples) {
      img.resize(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) img[i] = p[t[i]];
      if (!A.holds(r, img)) return false;
    }
  }
  return true;
}

/// All automorphisms, by filtering every permutation of the domain. Identity first.
inline std::vector<Permutation> automorphisms(const FiniteStructure& A, std::size_t cap = kDefaultAutomorphismCap) {
  if (A.size() > cap)
    throw CapExceeded("structure size " + std::to_string(A.size()) + " exceeds automorphism cap " + std::to_string(cap));
  Permutation p(A.size());
  std::iota(p.begin(), p.end(), Element{0});
  std::vector<Permutation> out;
  do {
    if (preserves(A, p)) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// Orbit partition of domain^arity under the diagonal action. Orbits are
/// sorted internally and listed by least member.
inline std::vector<std::vector<Tuple>> orbits(const FiniteStructure& A, std::size_t arity,
                                              std::size_t cap = kDefaultAutomorphismCap) {
  auto group = automorphisms(A, cap);
  std::size_t n = tuple_count(A.size(), arity);
  std::vector<long> orbit_of(n, -1);
  std::vector<std::vector<Tuple>> out;
  for_each_tuple(A.size(), arity, [&](const Tuple& t) {
    if (orbit_of[A.index(t)] >= 0) return;
    std::set<Tuple> members;
    Tuple img(arity);
    for (const auto& g : group) {
      for (std::size_t i = 0; i < arity; ++i) img[i] = g[t[i]];
      members.insert(img);
    }
    for (const auto& m : members) orbit_of[A.index(m)] = static_cast<long>(out.size());
    out.emplace_back(members.begin(), members.end());
  });
  return out;
}

/// Elements with a singleton orbit. On a finite structure these are exactly the
/// elements definable without parameters; this does not carry over to infinite structures.
inline std::set<Element> definable_singletons(const FiniteStructure& A, std::size_t cap = kDefaultAutomorphismCap) {
  std::set<Element> out;
  for (const auto& o : orbits(A, 1, cap))
    if (o.size() == 1) out.insert(o.front()[0]);
  return out;
}

using BinaryRelation = std::set<std::pair<Element, Element>>;

/// Connected: distinct elements are related one way or the other.
/// Asymmetric: never both ways (hence irreflexive).
inline bool connected_asymmetric(std::size_t size, const BinaryRelation& S) {
  for (Element x = 0; x < size; ++x)
    for (Element y = 0; y < size; ++y) {
      bool xy = S.count({x, y}) != 0, yx = S.count({y, x}) != 0;
      if (xy && yx) return false;
      if (x != y && !xy && !yx) return false;
    }
  return true;
}

inline bool invariant_under(const std::vector<Permutation>& group, const BinaryRelation& S) {
  for (const auto& g : group)
    for (const auto& [x, y] : S)
      if (!S.count({g[x], g[y]})) return false;
  return true;
}

/// Some automorphism-invariant connected asymmetric binary relation, or none.
/// Binary relations of the signature are tried first; then every union of
/// pair-orbits is scanned, up to `union_cap` candidates.
inline std::optional<BinaryRelation> exists_connected_asymmetric_invariant(
    const FiniteStructure& A, std::size_t cap = kDefaultAutomorphismCap, std::size_t union_cap = kDefaultOrbitUnionCap) {
  auto group = automorphisms(A, cap);
  for (const auto& [r, k] : A.signature().relations) {
    if (k != 2) continue;
    BinaryRelation S;
    for (const auto& t : A.relations().at(r)) S.insert({t[0], t[1]});
    if (connected_asymmetric(A.size(), S) && invariant_under(group, S)) return S;
  }
  auto pair_orbits = orbits(A, 2, cap);
  std::size_t m = pair_orbits.size();
  if (m >= 63 || (std::uint64_t(1) << m) > union_cap)
    throw CapExceeded("orbit-union enumeration exceeds cap (" + std::to_string(m) + " orbits)");
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
    BinaryRelation S;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1)
        for (const auto& t : pair_orbits[i]) S.insert({t[0], t[1]});
    if (connected_asymmetric(A.size(), S)) return S;
  }
  return std::nullopt;
}

}  // namespace biprism
