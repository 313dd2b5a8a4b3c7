#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "biprism/logic.hpp"
#include "biprism/report.hpp"
#include "biprism/structure.hpp"
#include "biprism/syntax.hpp"

namespace biprism {

class SchemeError : public Error {
 public:
  using Error::Error;
};

class ValidationFailure : public Error {
 public:
  explicit ValidationFailure(Report r)
      : Error("scheme validation failed: " + (r.first_failure() ? r.first_failure()->check : std::string("?"))),
        report(std::move(r)) {}
  Report report;
};

// Parameter names used inside scheme formulas.
inline std::string dom_var(std::size_t j) { return "x" + std::to_string(j); }
inline std::string eps_var(std::size_t j) { return "y" + std::to_string(j); }
inline std::string arg_var(std::size_t i, std::size_t j) { return "x" + std::to_string(i) + "_" + std::to_string(j); }

/// A translation from `source` formulas into `target` formulas, read backwards as
/// an interpretation of `source` in models of `target`.
///
/// Each source element is a `dim`-tuple of target elements.
///   delta     free vars x1..xd: the domain.
///   epsilon   free vars x1..xd, y1..yd: the identity; empty means componentwise equality.
///   relations R of arity k: free vars xi_j (argument i, component j).
///   constants c: free vars x1..xd; the defined set must lie inside one epsilon class.
struct TranslationScheme {
  std::string name;
  Signature source;
  Signature target;
  std::size_t dim = 1;
  Formula delta = top();
  std::optional<Formula> epsilon;
  std::map<std::string, Formula> relations;
  std::map<std::string, Formula> constants;

  bool componentwise() const { return !epsilon.has_value(); }

  /// Checks free-variable shapes and that every defining formula is over `target`.
  void check_shape() const {
    if (dim == 0) throw SchemeError("dimension must be at least 1");
    std::set<std::string> xs, xys;
    for (std::size_t j = 1; j <= dim; ++j) {
      xs.insert(dom_var(j));
      xys.insert(dom_var(j));
      xys.insert(eps_var(j));
    }
    auto within = [&](const Formula& f, const std::set<std::string>& allowed, const std::string& what) {
      check_over(target, f);
      for (const auto& v : free_vars(f))
        if (!allowed.count(v)) throw SchemeError(what + " has unexpected free variable '" + v + "'");
    };
    within(delta, xs, "delta");
    if (epsilon) within(*epsilon, xys, "epsilon");
    for (const auto& [r, k] : source.relations) {
      auto it = relations.find(r);
      if (it == relations.end()) throw SchemeError("no defining formula for relation '" + r + "'");
      std::set<std::string> args;
      for (std::size_t i = 1; i <= k; ++i)
        for (std::size_t j = 1; j <= dim; ++j) args.insert(arg_var(i, j));
      within(it->second, args, "definition of " + r);
    }
    for (const auto& c : source.constants) {
      auto it = constants.find(c);
      if (it == constants.end()) throw SchemeError("no defining formula for constant '" + c + "'");
      within(it->second, xs, "definition of " + c);
    }
    for (const auto& [r, f] : relations)
      if (!source.has_relation(r)) throw SchemeError("definition for unknown relation '" + r + "'");
    for (const auto& [c, f] : constants)
      if (!source.has_constant(c)) throw SchemeError("definition for unknown constant '" + c + "'");
  }
};

/// The scheme translating every symbol of `sig` to itself.
inline TranslationScheme identity_scheme(const Signature& sig, std::string name = {}) {
  TranslationScheme s;
  s.name = name.empty() ? "id" + (sig.name.empty() ? std::string() : "_" + sig.name) : std::move(name);
  s.source = sig;
  s.target = sig;
  for (const auto& [r, k] : sig.relations) {
    std::vector<Term> args;
    for (std::size_t i = 1; i <= k; ++i) args.push_back(var(arg_var(i, 1)));
    s.relations[r] = rel(r, args);
  }
  for (const auto& c : sig.constants) s.constants[c] = eq(var(dom_var(1)), cst(c));
  return s;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct SchemeFlags {
  bool one_dimensional = false;
  bool identity_preserving = false;
  bool unrelativized = false;
  bool direct = false;

  friend bool operator==(const SchemeFlags&, const SchemeFlags&) = default;
};

/// Syntactic classification: unrelativized means delta is literally `true`,
/// identity-preserving means componentwise epsilon in dimension 1.
inline SchemeFlags classify(const TranslationScheme& s) {
  SchemeFlags f;
  f.one_dimensional = s.dim == 1;
  f.unrelativized = s.delta.kind() == FK::True;
  f.identity_preserving = s.componentwise() && s.dim == 1;
  f.direct = f.one_dimensional && f.identity_preserving && f.unrelativized;
  return f;
}

// ---------------------------------------------------------------------------
// Formula translation
// ---------------------------------------------------------------------------

using VarTuples = std::map<std::string, std::vector<std::string>>;

struct Translated {
  Formula formula;
  /// Target variables standing for each free source variable.
  VarTuples components;
};

namespace detail {

class Translator {
 public:
  explicit Translator(const TranslationScheme& s) : s_(s) {}

  Translated run(const Formula& f, const VarTuples& fixed) {
    std::set<std::string> free = free_vars(f);
    for (const auto& [v, names] : fixed) {
      if (names.size() != s_.dim) throw SchemeError("wrong number of component names for '" + v + "'");
      if (free.count(v)) env_[v] = names;
    }
    for (const auto& v : free) {
      if (env_.count(v)) continue;
      env_[v] = pick_names(v, v);
    }
    Translated out{translate(f), env_};
    return out;
  }

 private:
  std::set<std::string> visible_except(const std::string& skip) const {
    std::set<std::string> out;
    for (const auto& [v, names] : env_)
      if (v != skip) out.insert(names.begin(), names.end());
    return out;
  }

  std::vector<std::string> pick_names(const std::string& base, const std::string& owner) const {
    std::set<std::string> avoid = visible_except(owner);
    std::vector<std::string> out;
    for (std::size_t j = 1; j <= s_.dim; ++j) {
      std::string cand = s_.dim == 1 ? base : base + "_" + std::to_string(j);
      if (avoid.count(cand)) cand = fresh_variant(cand + "_", avoid);
      avoid.insert(cand);
      out.push_back(cand);
    }
    return out;
  }

  Formula instantiate_dom(const Formula& f, const std::vector<std::string>& xs) const {
    Substitution m;
    for (std::size_t j = 0; j < s_.dim; ++j) m[dom_var(j + 1)] = var(xs[j]);
    return substitute(f, m);
  }

  Formula identity(const std::vector<std::string>& a, const std::vector<std::string>& b) const {
    if (s_.componentwise()) {
      std::vector<Formula> parts;
      for (std::size_t j = 0; j < s_.dim; ++j) parts.push_back(eq(a[j], b[j]));
      return conj_all(parts);
    }
    Substitution m;
    for (std::size_t j = 0; j < s_.dim; ++j) {
      m[dom_var(j + 1)] = var(a[j]);
      m[eps_var(j + 1)] = var(b[j]);
    }
    return substitute(*s_.epsilon, m);
  }

  using Resolved = std::map<std::string, std::vector<std::string>>;

  const std::vector<std::string>& resolve(const Term& t, const Resolved& consts) const {
    if (t.is_const()) return consts.at(t.name);
    auto it = env_.find(t.name);
    if (it == env_.end()) throw SchemeError("internal: unmapped variable '" + t.name + "'");
    return it->second;
  }

  Formula atom(const Formula& f, const Resolved& consts) const {
    if (f.kind() == FK::Equal) return identity(resolve(f.terms()[0], consts), resolve(f.terms()[1], consts));
    auto it = s_.relations.find(f.symbol());
    if (it == s_.relations.end()) throw SchemeError("no defining formula for relation '" + f.symbol() + "'");
    Substitution m;
    for (std::size_t i = 0; i < f.terms().size(); ++i) {
      const auto& names = resolve(f.terms()[i], consts);
      for (std::size_t j = 0; j < s_.dim; ++j) m[arg_var(i + 1, j + 1)] = var(names[j]);
    }
    return substitute(it->second, m);
  }

  // Constants are paraphrased: A(c) becomes exists z (z = c & A(z)), and
  // "z = c" is read through the constant's defining formula.
  Formula translate_atom(const Formula& f) {
    std::vector<std::string> order;
    for (const auto& t : f.terms())
      if (t.is_const() && std::find(order.begin(), order.end(), t.name) == order.end()) order.push_back(t.name);
    if (order.empty()) return atom(f, {});
    Resolved consts;
    std::set<std::string> avoid = visible_except("");
    for (const auto& c : order) {
      if (!s_.constants.count(c)) throw SchemeError("no defining formula for constant '" + c + "'");
      std::vector<std::string> zs;
      for (std::size_t j = 1; j <= s_.dim; ++j) {
        std::string z = fresh_name(s_.dim == 1 ? "z" : "z_" + std::to_string(j), avoid);
        avoid.insert(z);
        zs.push_back(z);
      }
      consts[c] = zs;
    }
    Formula acc = atom(f, consts);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto& zs = consts[*it];
      Formula guard = conj_simp({instantiate_dom(s_.delta, zs), instantiate_dom(s_.constants.at(*it), zs)});
      acc = exists_block(zs, conj(guard, acc));
    }
    return acc;
  }

  Formula translate(const Formula& f) {
    switch (f.kind()) {
      case FK::True:
      case FK::False:
        return f;
      case FK::Equal:
      case FK::Rel:
        return translate_atom(f);
      case FK::Not:
        return neg(translate(f.body()));
      case FK::And:
      case FK::Or:
      case FK::Implies:
      case FK::Iff: {
        Formula a = translate(f.lhs());
        Formula b = translate(f.rhs());
        return Formula::binary(f.kind(), a, b);
      }
      case FK::ForAll:
      case FK::Exists: {
        const std::string& v = f.var();
        std::optional<std::vector<std::string>> saved;
        if (auto it = env_.find(v); it != env_.end()) saved = it->second;
        std::vector<std::string> names = pick_names(v, v);
        env_[v] = names;
        Formula body = translate(f.body());
        if (saved) env_[v] = *saved;
        else env_.erase(v);
        Formula dom = instantiate_dom(s_.delta, names);
        bool all = f.kind() == FK::ForAll;
        if (dom.kind() != FK::True) body = all ? implies(dom, body) : conj(dom, body);
        return all ? forall_block(names, body) : exists_block(names, body);
      }
    }
    return f;
  }

  const TranslationScheme& s_;
  VarTuples env_;
};

}  // namespace detail

/// Translates a source formula into the target language. Free variables are
/// mapped to `fixed` component names when given, otherwise to v (dim 1) or v_1..v_d.
inline Translated translate(const TranslationScheme& s, const Formula& f, const VarTuples& fixed = {}) {
  check_over(s.source, f);
  return detail::Translator(s).run(f, fixed);
}

inline Formula translate_formula(const TranslationScheme& s, const Formula& f) { return translate(s, f).formula; }

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Composite scheme from inner.source into outer.target: inner's defining formulas
/// translated by outer. Models: A |-> inner(outer(A)).
inline TranslationScheme compose(const TranslationScheme& outer, const TranslationScheme& inner) {
  if (!inner.target.same_symbols(outer.source))
    throw SchemeError("cannot compose: inner target signature differs from outer source signature");
  const std::size_t di = inner.dim, dout = outer.dim;
  TranslationScheme c;
  c.name = outer.name + "." + inner.name;
  c.source = inner.source;
  c.target = outer.target;
  c.dim = di * dout;

  auto block = [&](const std::string& prefix, std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t j = 1; j <= dout; ++j) out.push_back(prefix + std::to_string((k - 1) * dout + j));
    return out;
  };

  VarTuples dom_map, eps_map;
  for (std::size_t k = 1; k <= di; ++k) {
    dom_map[dom_var(k)] = block("x", k);
    eps_map[dom_var(k)] = block("x", k);
    eps_map[eps_var(k)] = block("y", k);
  }

  std::vector<Formula> dom_parts;
  for (std::size_t k = 1; k <= di; ++k) {
    Substitution m;
    auto names = block("x", k);
    for (std::size_t j = 0; j < dout; ++j) m[dom_var(j + 1)] = var(names[j]);
    dom_parts.push_back(substitute(outer.delta, m));
  }
  dom_parts.push_back(translate(outer, inner.delta, dom_map).formula);
  c.delta = conj_simp(dom_parts);

  if (!(inner.componentwise() && outer.componentwise())) {
    Formula inner_eps = inner.epsilon.value_or(top());
    if (inner.componentwise()) {
      std::vector<Formula> parts;
      for (std::size_t k = 1; k <= di; ++k) parts.push_back(eq(dom_var(k), eps_var(k)));
      inner_eps = conj_all(parts);
    }
    c.epsilon = translate(outer, inner_eps, eps_map).formula;
  }

  for (const auto& [r, k] : inner.source.relations) {
    VarTuples m;
    for (std::size_t i = 1; i <= k; ++i)
      for (std::size_t kk = 1; kk <= di; ++kk) {
        std::vector<std::string> names;
        for (std::size_t j = 1; j <= dout; ++j) names.push_back(arg_var(i, (kk - 1) * dout + j));
        m[arg_var(i, kk)] = names;
      }
    c.relations[r] = translate(outer, inner.relations.at(r), m).formula;
  }
  for (const auto& cn : inner.source.constants) c.constants[cn] = translate(outer, inner.constants.at(cn), dom_map).formula;
  return c;
}

// ---------------------------------------------------------------------------
// The model functor on finite structures
// ---------------------------------------------------------------------------

/// Result of applying a scheme to a target structure.
struct InterpretedStructure {
  FiniteStructure result;
  /// Epsilon classes, indexed by the element of `result` they become.
  std::vector<std::vector<Tuple>> classes;
  /// Lexicographically least member of each class.
  std::vector<Tuple> rep;
  std::map<Tuple, Element> class_of;
};

namespace detail {

inline constexpr std::size_t kSchemeTupleCap = std::size_t(1) << 22;

struct BitMatrix {
  std::size_t n = 0, words = 0;
  std::vector<std::uint64_t> bits;
  explicit BitMatrix(std::size_t size) : n(size), words((size + 63) / 64), bits(size * ((size + 63) / 64), 0) {}
  void set(std::size_t i, std::size_t j) { bits[i * words + j / 64] |= std::uint64_t(1) << (j % 64); }
  bool get(std::size_t i, std::size_t j) const { return bits[i * words + j / 64] >> (j % 64) & 1; }
  // row j subset of row i
  bool row_subset(std::size_t j, std::size_t i) const {
    for (std::size_t w = 0; w < words; ++w)
      if (bits[j * words + w] & ~bits[i * words + w]) return false;
    return true;
  }
};

inline std::string tuple_text(const Tuple& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

inline std::vector<std::string> dom_vars(std::size_t d, bool with_y = false) {
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= d; ++j) out.push_back(dom_var(j));
  if (with_y)
    for (std::size_t j = 1; j <= d; ++j) out.push_back(eps_var(j));
  return out;
}

struct Analysis {
  Report report;
  std::optional<InterpretedStructure> image;
};

inline Analysis analyze(const TranslationScheme& s, const FiniteStructure& A) {
  Analysis out;
  Report& rep = out.report;
  rep.title = "validate " + (s.name.empty() ? std::string("scheme") : s.name);
  try {
    s.check_shape();
  } catch (const Error& e) {
    rep.add("scheme shape", false, e.what());
    return out;
  }
  if (!A.signature().same_symbols(s.target)) {
    rep.add("structure signature", false, "structure is not over the scheme's target signature");
    return out;
  }
  const std::size_t d = s.dim;
  if (tuple_count(A.size(), d) > kSchemeTupleCap) throw CapExceeded("too many tuples for scheme validation");

  // Domain: delta-set in lexicographic order.
  std::vector<Tuple> dom;
  {
    Evaluator ev(A, s.delta, dom_vars(d));
    for_each_tuple(A.size(), d, [&](const Tuple& t) {
      if (ev(t)) dom.push_back(t);
    });
  }
  const std::size_t N = dom.size();
  BitMatrix E(N);
  if (s.componentwise()) {
    for (std::size_t i = 0; i < N; ++i) E.set(i, i);
  } else {
    Evaluator ev(A, *s.epsilon, dom_vars(d, true));
    Tuple xy(2 * d);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        std::copy(dom[i].begin(), dom[i].end(), xy.begin());
        std::copy(dom[j].begin(), dom[j].end(), xy.begin() + d);
        if (ev(xy)) E.set(i, j);
      }
  }

  bool equivalence = true;
  {
    std::string w;
    for (std::size_t i = 0; i < N && w.empty(); ++i)
      if (!E.get(i, i)) w = tuple_text(dom[i]);
    rep.add("epsilon reflexive", w.empty(), "", w);
    equivalence &= w.empty();
  }
  {
    std::string w;
    for (std::size_t i = 0; i < N && w.empty(); ++i)
      for (std::size_t j = 0; j < N && w.empty(); ++j)
        if (E.get(i, j) && !E.get(j, i)) w = tuple_text(dom[i]) + " ~ " + tuple_text(dom[j]);
    rep.add("epsilon symmetric", w.empty(), "", w);
    equivalence &= w.empty();
  }
  {
    std::string w;
    for (std::size_t i = 0; i < N && w.empty(); ++i)
      for (std::size_t j = 0; j < N && w.empty(); ++j)
        if (E.get(i, j) && !E.row_subset(j, i)) {
          for (std::size_t k = 0; k < N; ++k)
            if (E.get(j, k) && !E.get(i, k)) {
              w = tuple_text(dom[i]) + " ~ " + tuple_text(dom[j]) + " ~ " + tuple_text(dom[k]);
              break;
            }
        }
    rep.add("epsilon transitive", w.empty(), "", w);
    equivalence &= w.empty();
  }

  // Classes ordered by least member.
  std::vector<long> cls(N, -1);
  std::vector<std::vector<Tuple>> classes;
  if (equivalence) {
    for (std::size_t i = 0; i < N; ++i) {
      if (cls[i] >= 0) continue;
      long id = static_cast<long>(classes.size());
      classes.emplace_back();
      for (std::size_t j = i; j < N; ++j)
        if (E.get(i, j)) {
          cls[j] = id;
          classes.back().push_back(dom[j]);
        }
    }
  }

  std::map<std::string, std::set<Tuple>> rels;
  bool relations_ok = true;
  for (const auto& [r, k] : s.source.relations) {
    std::string check = "relation " + r + " respects epsilon";
    if (!equivalence) {
      rep.add(check, Status::Skip, "epsilon is not an equivalence");
      relations_ok = false;
      continue;
    }
    if (tuple_count(N, k) > kSchemeTupleCap) throw CapExceeded("relation invariance check too large");
    std::vector<std::string> vars;
    for (std::size_t i = 1; i <= k; ++i)
      for (std::size_t j = 1; j <= d; ++j) vars.push_back(arg_var(i, j));
    Evaluator ev(A, s.relations.at(r), vars);
    std::map<Tuple, bool> seen;
    std::string w;
    Tuple flat(k * d);
    for_each_tuple(N, k, [&](const Tuple& idx) {
      if (!w.empty()) return;
      Tuple key(k);
      for (std::size_t i = 0; i < k; ++i) {
        std::copy(dom[idx[i]].begin(), dom[idx[i]].end(), flat.begin() + i * d);
        key[i] = static_cast<Element>(cls[idx[i]]);
      }
      bool v = ev(flat);
      auto [it, inserted] = seen.emplace(key, v);
      if (!inserted && it->second != v) w = "classes " + tuple_text(key) + " at " + tuple_text(flat);
    });
    rep.add(check, w.empty(), "", w);
    relations_ok &= w.empty();
    for (const auto& [key, v] : seen)
      if (v) rels[r].insert(key);
  }

  std::map<std::string, Element> consts;
  bool constants_ok = true;
  for (const auto& c : s.source.constants) {
    std::string check = "constant " + c + " defines one class";
    if (!equivalence) {
      rep.add(check, Status::Skip, "epsilon is not an equivalence");
      constants_ok = false;
      continue;
    }
    Evaluator ev(A, s.constants.at(c), dom_vars(d));
    std::set<long> hit;
    for (std::size_t i = 0; i < N; ++i)
      if (ev(dom[i])) hit.insert(cls[i]);
    if (hit.size() == 1) {
      consts[c] = static_cast<Element>(*hit.begin());
      rep.add(check, true);
    } else {
      rep.add(check, false, hit.empty() ? "defines no element" : "meets " + std::to_string(hit.size()) + " classes");
      constants_ok = false;
    }
  }

  if (equivalence && relations_ok && constants_ok) {
    InterpretedStructure img{FiniteStructure(s.source, classes.size(), rels, consts), classes, {}, {}};
    for (std::size_t i = 0; i < classes.size(); ++i) {
      img.rep.push_back(classes[i].front());
      for (const auto& t : classes[i]) img.class_of[t] = i;
    }
    out.image = std::move(img);
  }
  return out;
}

}  // namespace detail

/// Side conditions of the scheme on one structure, one entry per check.
inline Report validate_scheme_on(const TranslationScheme& s, const FiniteStructure& A) {
  return detail::analyze(s, A).report;
}

/// The interpreted structure: epsilon classes of the delta-set. Throws
/// ValidationFailure if any side condition fails. An empty delta-set yields size 0.
inline InterpretedStructure apply_scheme(const TranslationScheme& s, const FiniteStructure& A) {
  auto a = detail::analyze(s, A);
  if (!a.image) throw ValidationFailure(std::move(a.report));
  return std::move(*a.image);
}

// ---------------------------------------------------------------------------
// Interpretation lemma and definable isomorphisms
// ---------------------------------------------------------------------------

/// Compares s(A) |= f[classes] with A |= s(f)[representatives].
class CommutationChecker {
 public:
  CommutationChecker(const TranslationScheme& s, const FiniteStructure& A)
      : s_(s), A_(A), image_(apply_scheme(s, A)) {}

  const InterpretedStructure& image() const { return image_; }

  /// First assignment (over the image's domain) where the two sides differ.
  /// Exhaustive when the assignment space has at most `trials` points, otherwise sampled.
  std::optional<Assignment> counterexample(const Formula& f, const Translated& tf, std::size_t trials = 4096,
                                           std::uint64_t seed = 0) const {
    const auto fv = free_vars(f);
    std::vector<std::string> vars(fv.begin(), fv.end());
    std::vector<std::string> target_vars;
    for (const auto& v : vars)
      for (const auto& n : tf.components.at(v)) target_vars.push_back(n);
    Evaluator lhs(image_.result, f, vars);
    Evaluator rhs(A_, tf.formula, target_vars);
    const std::size_t m = image_.result.size();
    const std::size_t d = s_.dim;
    Tuple flat(vars.size() * d);
    auto differs = [&](const Tuple& a) {
      for (std::size_t i = 0; i < a.size(); ++i)
        std::copy(image_.rep[a[i]].begin(), image_.rep[a[i]].end(), flat.begin() + i * d);
      return lhs(a) != rhs(flat);
    };
    auto as_assignment = [&](const Tuple& a) {
      Assignment out;
      for (std::size_t i = 0; i < vars.size(); ++i) out[vars[i]] = a[i];
      return out;
    };
    std::size_t total = 1;
    bool exhaustive = true;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (m != 0 && total > trials / m) {
        exhaustive = false;
        break;
      }
      total *= m;
    }
    if (exhaustive && total <= trials) {
      std::optional<Assignment> bad;
      for_each_tuple(m, vars.size(), [&](const Tuple& a) {
        if (!bad && differs(a)) bad = as_assignment(a);
      });
      return bad;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    Tuple a(vars.size());
    for (std::size_t t = 0; t < trials; ++t) {
      for (auto& e : a) e = pick(rng);
      if (differs(a)) return as_assignment(a);
    }
    return std::nullopt;
  }

  std::optional<Assignment> counterexample(const Formula& f, std::size_t trials = 4096, std::uint64_t seed = 0) const {
    return counterexample(f, translate(s_, f), trials, seed);
  }

 private:
  TranslationScheme s_;
  FiniteStructure A_;
  InterpretedStructure image_;
};

inline std::string assignment_text(const Assignment& a) {
  std::string s;
  for (const auto& [v, e] : a) s += (s.empty() ? "" : ", ") + v + "=" + std::to_string(e);
  return "{" + s + "}";
}

inline Report check_commutation(const TranslationScheme& s, const FiniteStructure& A, const Formula& f,
                                std::size_t trials = 4096, std::uint64_t seed = 0) {
  Report r;
  r.title = "commutation " + render_formula(f);
  CommutationChecker c(s, A);
  auto tf = translate(s, f);
  auto bad = c.counterexample(f, tf, trials, seed);
  r.add("s(A) |= f iff A |= s(f)", !bad.has_value(), "translated: " + render_formula(tf.formula),
        bad ? assignment_text(*bad) : std::string());
  return r;
}

/// Checks that eta(x, y1..yd) defines an isomorphism from A onto the scheme's image of A.
/// x goes to the class of any related tuple, so eta need not be closed under epsilon.
/// Entries: total, functional, injective, surjective, preserves relations, preserves constants.
inline Report check_defined_isomorphism(const FiniteStructure& A, const TranslationScheme& roundtrip, const Formula& eta) {
  if (!roundtrip.source.same_symbols(A.signature()) || !roundtrip.target.same_symbols(A.signature()))
    throw SchemeError("round-trip scheme must map the structure's signature to itself");
  Report r;
  r.title = "defined isomorphism " + render_formula(eta);
  InterpretedStructure img = apply_scheme(roundtrip, A);
  const std::size_t d = roundtrip.dim;
  std::vector<std::string> vars{"x"};
  for (std::size_t j = 1; j <= d; ++j) vars.push_back(eps_var(j));
  for (const auto& v : free_vars(eta))
    if (std::find(vars.begin(), vars.end(), v) == vars.end())
      throw SchemeError("eta has unexpected free variable '" + v + "'");
  Evaluator ev(A, eta, vars);

  const std::size_t n = A.size(), m = img.result.size();
  // related[a][k]: number of members of class k related to a.
  std::vector<std::vector<std::size_t>> related(n, std::vector<std::size_t>(m, 0));
  Tuple xy(1 + d);
  for (Element a = 0; a < n; ++a)
    for (std::size_t k = 0; k < m; ++k)
      for (const auto& t : img.classes[k]) {
        xy[0] = a;
        std::copy(t.begin(), t.end(), xy.begin() + 1);
        if (ev(xy)) ++related[a][k];
      }

  std::string w;
  for (Element a = 0; a < n && w.empty(); ++a) {
    bool any = false;
    for (std::size_t k = 0; k < m; ++k) any |= related[a][k] > 0;
    if (!any) w = "x=" + std::to_string(a) + " has no image";
  }
  bool total = w.empty();
  r.add("total", total, "", w);

  w.clear();
  for (Element a = 0; a < n && w.empty(); ++a) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < m; ++k) hits += related[a][k] > 0;
    if (hits > 1) w = "x=" + std::to_string(a) + " relates to " + std::to_string(hits) + " classes";
  }
  bool functional = w.empty();
  r.add("functional", functional, "", w);

  if (!(total && functional)) {
    for (const char* c : {"injective", "surjective", "preserves relations", "preserves constants"})
      r.add(c, Status::Skip, "eta does not define a function");
    return r;
  }
  std::vector<Element> h(n);
  for (Element a = 0; a < n; ++a)
    for (std::size_t k = 0; k < m; ++k)
      if (related[a][k]) h[a] = k;

  w.clear();
  for (Element a = 0; a < n && w.empty(); ++a)
    for (Element b = a + 1; b < n && w.empty(); ++b)
      if (h[a] == h[b]) w = std::to_string(a) + ", " + std::to_string(b) + " -> class " + std::to_string(h[a]);
  r.add("injective", w.empty(), "", w);

  w.clear();
  {
    std::vector<bool> hit(m, false);
    for (Element a = 0; a < n; ++a) hit[h[a]] = true;
    for (std::size_t k = 0; k < m && w.empty(); ++k)
      if (!hit[k]) w = "class " + std::to_string(k) + " " + detail::tuple_text(img.rep[k]);
  }
  r.add("surjective", w.empty(), "", w);

  w.clear();
  for (const auto& [rn, k] : A.signature().relations) {
    for_each_tuple(n, k, [&](const Tuple& t) {
      if (!w.empty()) return;
      Tuple ht(k);
      for (std::size_t i = 0; i < k; ++i) ht[i] = h[t[i]];
      if (A.holds(rn, t) != img.result.holds(rn, ht)) w = rn + detail::tuple_text(t);
    });
  }
  r.add("preserves relations", w.empty(), "", w);

  w.clear();
  for (const auto& [c, e] : A.constants())
    if (h[e] != img.result.constant(c) && w.empty()) w = c;
  r.add("preserves constants", w.empty(), "", w);
  return r;
}

}  // namespace biprism
