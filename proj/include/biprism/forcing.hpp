#pragma once

// Finite combinatorics of Cohen-pair conditions: finite partial functions
// from (e, i, j), e in {0,1}, to {0,1}, ordered by reverse inclusion, with
// re-indexing by permutations of {0,1} x N and symbolic names.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "biprism/logic.hpp"
#include "biprism/report.hpp"

namespace biprism::forcing {

class ForcingError : public Error {
 public:
  using Error::Error;
};

struct Key {
  int e = 0;
  std::size_t i = 0, j = 0;
  friend auto operator<=>(const Key&, const Key&) = default;
};

/// A column (e, i) of the poset: the bits of one generic real.
struct Column {
  int e = 0;
  std::size_t i = 0;
  friend auto operator<=>(const Column&, const Column&) = default;
};

using Condition = std::map<Key, int>;

inline void check_key(const Key& k, int v) {
  if (k.e != 0 && k.e != 1) throw ForcingError("first key component must be 0 or 1");
  if (v != 0 && v != 1) throw ForcingError("condition values must be 0 or 1");
}

/// Builds a condition from (e, i, j, v) entries; conflicting duplicates throw.
inline Condition make_condition(const std::vector<std::tuple<int, std::size_t, std::size_t, int>>& entries) {
  Condition p;
  for (const auto& [e, i, j, v] : entries) {
    Key k{e, i, j};
    check_key(k, v);
    auto [it, fresh] = p.emplace(k, v);
    if (!fresh && it->second != v) throw ForcingError("conflicting entries for one key");
  }
  return p;
}

/// Sorted `e,i,j=v` entries separated by spaces.
inline std::string to_string(const Condition& p) {
  std::string s;
  for (const auto& [k, v] : p) {
    if (!s.empty()) s += ' ';
    s += std::to_string(k.e) + "," + std::to_string(k.i) + "," + std::to_string(k.j) + "=" + std::to_string(v);
  }
  return s;
}

inline Condition parse_condition(const std::string& text) {
  std::istringstream in(text);
  std::string item;
  std::vector<std::tuple<int, std::size_t, std::size_t, int>> entries;
  while (in >> item) {
    int e, v;
    std::size_t i, j;
    char c1, c2, c3;
    std::istringstream is(item);
    if (!(is >> e >> c1 >> i >> c2 >> j >> c3 >> v) || c1 != ',' || c2 != ',' || c3 != '=' || !is.eof())
      throw ForcingError("malformed condition entry '" + item + "'");
    entries.emplace_back(e, i, j, v);
  }
  return make_condition(entries);
}

/// q extends p: every entry of p is in q.
inline bool extends(const Condition& q, const Condition& p) {
  for (const auto& [k, v] : p) {
    auto it = q.find(k);
    if (it == q.end() || it->second != v) return false;
  }
  return true;
}

inline bool compatible(const Condition& p, const Condition& q) {
  const Condition& small = p.size() <= q.size() ? p : q;
  const Condition& large = p.size() <= q.size() ? q : p;
  for (const auto& [k, v] : small) {
    auto it = large.find(k);
    if (it != large.end() && it->second != v) return false;
  }
  return true;
}

inline Condition merge(const Condition& p, const Condition& q) {
  if (!compatible(p, q)) throw ForcingError("cannot merge incompatible conditions");
  Condition r = p;
  r.insert(q.begin(), q.end());
  return r;
}

/// Least k with every entry's i below k.
inline std::size_t support_bound(const Condition& p) {
  std::size_t k = 0;
  for (const auto& [key, v] : p) k = std::max(k, key.i + 1);
  return k;
}

// ---------------------------------------------------------------------------
// Index permutations
// ---------------------------------------------------------------------------

/// Swaps the blocks [0,k) and [k,2k) while exchanging the two sides; fixes
/// the index of every column from 2k on but still exchanges its side.
struct BlockPi {
  std::size_t k = 1;
};

/// Finite-support permutation: listed columns move, all others are fixed.
struct Explicit {
  std::map<Column, Column> map;
};

using IndexPerm = std::variant<BlockPi, Explicit>;

inline void validate(const IndexPerm& pi) {
  if (auto* b = std::get_if<BlockPi>(&pi)) {
    if (b->k == 0) throw ForcingError("BlockPi needs k >= 1");
    return;
  }
  const auto& m = std::get<Explicit>(pi).map;
  std::set<Column> dom, img;
  for (const auto& [a, b] : m) {
    if ((a.e != 0 && a.e != 1) || (b.e != 0 && b.e != 1)) throw ForcingError("column side must be 0 or 1");
    dom.insert(a);
    img.insert(b);
  }
  if (img.size() != m.size() || img != dom) throw ForcingError("explicit map is not a bijection of its support");
}

inline Column image(const IndexPerm& pi, const Column& c) {
  if (auto* b = std::get_if<BlockPi>(&pi)) {
    std::size_t k = b->k;
    int e = 1 - c.e;
    if (c.i < k) return {e, c.i + k};
    if (c.i < 2 * k) return {e, c.i - k};
    return {e, c.i};
  }
  const auto& m = std::get<Explicit>(pi).map;
  auto it = m.find(c);
  return it == m.end() ? c : it->second;
}

inline Condition act_condition(const IndexPerm& pi, const Condition& p) {
  validate(pi);
  Condition out;
  for (const auto& [k, v] : p) {
    Column c = image(pi, {k.e, k.i});
    out.emplace(Key{c.e, c.i, k.j}, v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

/// The name of the real in column (e, i).
struct XdotLower {
  int e = 0;
  std::size_t i = 0;
  friend bool operator==(const XdotLower&, const XdotLower&) = default;
};
/// The name of the family of reals on side e.
struct Xdot {
  int e = 0;
  friend bool operator==(const Xdot&, const Xdot&) = default;
};
/// The name of the unordered pair of the two families.
struct Pdot {
  friend bool operator==(const Pdot&, const Pdot&) = default;
};

using NameExpr = std::variant<XdotLower, Xdot, Pdot>;

inline std::string to_string(const NameExpr& n) {
  if (auto* x = std::get_if<XdotLower>(&n)) return "x(" + std::to_string(x->e) + "," + std::to_string(x->i) + ")";
  if (auto* x = std::get_if<Xdot>(&n)) return "X(" + std::to_string(x->e) + ")";
  return "P";
}

/// Image of a name. For the family name X(e), the permutation must send all of
/// side e to a single side.
inline NameExpr act_name(const IndexPerm& pi, const NameExpr& n) {
  validate(pi);
  if (auto* x = std::get_if<XdotLower>(&n)) {
    Column c = image(pi, {x->e, x->i});
    return XdotLower{c.e, c.i};
  }
  if (auto* x = std::get_if<Xdot>(&n)) {
    if (std::holds_alternative<BlockPi>(pi)) return Xdot{1 - x->e};
    // Off the support every column is fixed, so the side is kept; the support must agree.
    for (const auto& [a, b] : std::get<Explicit>(pi).map)
      if (a.e == x->e && b.e != x->e)
        throw ForcingError("permutation does not map side " + std::to_string(x->e) + " onto a single side");
    return Xdot{x->e};
  }
  return Pdot{};
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

struct Separate {
  Column a, b;
};
struct DecideBit {
  Key key;
};
using DenseSpec = std::variant<Separate, DecideBit>;

/// Whether p already lies in the dense set.
inline bool meets(const Condition& p, const DenseSpec& d) {
  if (auto* s = std::get_if<DecideBit>(&d)) return p.count(s->key) != 0;
  const auto& s = std::get<Separate>(d);
  for (const auto& [k, v] : p) {
    if (k.e != s.a.e || k.i != s.a.i) continue;
    auto it = p.find(Key{s.b.e, s.b.i, k.j});
    if (it != p.end() && it->second != v) return true;
  }
  return false;
}

/// Extension of p whose columns a and b disagree at some bit. p itself if it
/// already separates them; otherwise the least j undetermined in at least one
/// column gets the missing values (a takes 0 when both are open).
inline Condition extend_to_separate(const Condition& p, const Column& a, const Column& b) {
  if (a == b) throw ForcingError("cannot separate a column from itself");
  for (const auto& c : {a, b})
    if (c.e != 0 && c.e != 1) throw ForcingError("column side must be 0 or 1");
  if (meets(p, Separate{a, b})) return p;
  for (std::size_t j = 0;; ++j) {
    auto ia = p.find(Key{a.e, a.i, j});
    auto ib = p.find(Key{b.e, b.i, j});
    bool da = ia != p.end(), db = ib != p.end();
    if (da && db) continue;
    Condition q = p;
    if (!da && !db) {
      q[Key{a.e, a.i, j}] = 0;
      q[Key{b.e, b.i, j}] = 1;
    } else if (da) {
      q[Key{b.e, b.i, j}] = 1 - ia->second;
    } else {
      q[Key{a.e, a.i, j}] = 1 - ib->second;
    }
    return q;
  }
}

/// Extension of p meeting the dense set.
inline Condition extend_into(const Condition& p, const DenseSpec& d) {
  if (auto* s = std::get_if<Separate>(&d)) return extend_to_separate(p, s->a, s->b);
  const auto& s = std::get<DecideBit>(d);
  check_key(s.key, 0);
  Condition q = p;
  q.emplace(s.key, 0);
  return q;
}

// ---------------------------------------------------------------------------
// Enumeration and the block permutation's properties
// ---------------------------------------------------------------------------

/// Every condition with at most `max_entries` entries, keys e in {0,1}, i < imax, j < jmax.
inline std::vector<Condition> all_conditions(std::size_t max_entries, std::size_t imax, std::size_t jmax) {
  std::vector<Key> keys;
  for (int e = 0; e < 2; ++e)
    for (std::size_t i = 0; i < imax; ++i)
      for (std::size_t j = 0; j < jmax; ++j) keys.push_back({e, i, j});
  std::vector<Condition> out;
  Condition cur;
  std::function<void(std::size_t)> go = [&](std::size_t from) {
    out.push_back(cur);
    if (cur.size() == max_entries) return;
    for (std::size_t t = from; t < keys.size(); ++t)
      for (int v = 0; v < 2; ++v) {
        cur[keys[t]] = v;
        go(t + 1);
        cur.erase(keys[t]);
      }
  };
  go(0);
  return out;
}

/// `count` random conditions with keys e in {0,1}, i < imax, j < jmax.
inline std::vector<Condition> random_conditions(std::size_t count, std::size_t imax, std::size_t jmax,
                                                std::size_t max_entries, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bit(0, 1);
  std::uniform_int_distribution<std::size_t> pi(0, imax - 1), pj(0, jmax - 1), pn(0, max_entries);
  std::vector<Condition> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Condition p;
    std::size_t n = pn(rng);
    for (std::size_t t = 0; t < n; ++t) p[Key{bit(rng), pi(rng), pj(rng)}] = bit(rng);
    out.push_back(std::move(p));
  }
  return out;
}

/// For pi = BlockPi(k) over the samples: involution, pi(p) compatible with p
/// (with disjoint key sets), and the action on the names X(0), X(1), P.
inline Report check_pi_properties(std::size_t k, const std::vector<Condition>& samples) {
  if (k == 0) throw ForcingError("k must be positive");
  for (const auto& p : samples)
    if (support_bound(p) > k)
      throw ForcingError("sample " + to_string(p) + " has support bound above " + std::to_string(k));
  IndexPerm pi = BlockPi{k};
  Report r;
  r.title = "block permutation k=" + std::to_string(k) + " on " + std::to_string(samples.size()) + " conditions";

  std::string w;
  for (std::size_t i = 0; i < 3 * k && w.empty(); ++i)
    for (int e = 0; e < 2 && w.empty(); ++e)
      if (image(pi, image(pi, {e, i})) != Column{e, i}) w = "column (" + std::to_string(e) + "," + std::to_string(i) + ")";
  for (const auto& p : samples) {
    if (!w.empty()) break;
    if (act_condition(pi, act_condition(pi, p)) != p) w = to_string(p);
  }
  r.add("involution", w.empty(), "", w);

  w.clear();
  std::string disjoint_w;
  for (const auto& p : samples) {
    Condition q = act_condition(pi, p);
    if (w.empty() && !compatible(p, q)) w = to_string(p);
    if (disjoint_w.empty())
      for (const auto& [key, v] : q)
        if (p.count(key)) {
          disjoint_w = to_string(p);
          break;
        }
  }
  r.add("compatible with its image", w.empty(), "", w);
  r.add("disjoint from its image", disjoint_w.empty(), "", disjoint_w);

  bool names = act_name(pi, Xdot{0}) == NameExpr{Xdot{1}} && act_name(pi, Xdot{1}) == NameExpr{Xdot{0}} &&
               act_name(pi, Pdot{}) == NameExpr{Pdot{}};
  r.add("swaps X(0), X(1) and fixes P", names);
  return r;
}

}  // namespace biprism::forcing
