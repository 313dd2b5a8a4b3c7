#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace biprism {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SignatureError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Signature
// ---------------------------------------------------------------------------

/// A relational signature with constants. No function symbols.
struct Signature {
  std::string name;
  std::map<std::string, std::size_t> relations;
  std::set<std::string> constants;

  bool has_relation(const std::string& r) const { return relations.count(r) != 0; }
  bool has_constant(const std::string& c) const { return constants.count(c) != 0; }

  std::size_t arity(const std::string& r) const {
    auto it = relations.find(r);
    if (it == relations.end()) throw SignatureError("unknown relation symbol '" + r + "'");
    return it->second;
  }

  void validate() const {
    for (const auto& [r, k] : relations) {
      if (k == 0) throw SignatureError("relation '" + r + "' must have arity >= 1");
      if (constants.count(r)) throw SignatureError("symbol '" + r + "' declared as relation and constant");
    }
  }

  /// Same symbols and arities; the name is ignored.
  bool same_symbols(const Signature& o) const {
    return relations == o.relations && constants == o.constants;
  }

  /// Every symbol of `this` occurs in `o` with the same arity.
  bool sub_of(const Signature& o) const {
    for (const auto& [r, k] : relations) {
      auto it = o.relations.find(r);
      if (it == o.relations.end() || it->second != k) return false;
    }
    for (const auto& c : constants)
      if (!o.constants.count(c)) return false;
    return true;
  }

  Signature with_constant(const std::string& c) const {
    Signature s = *this;
    s.constants.insert(c);
    return s;
  }

  friend bool operator==(const Signature& a, const Signature& b) { return a.same_symbols(b); }
};

// ---------------------------------------------------------------------------
// Terms and formulas
// ---------------------------------------------------------------------------

struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Var;
  std::string name;

  static Term var(std::string n) { return {Kind::Var, std::move(n)}; }
  static Term constant(std::string n) { return {Kind::Const, std::move(n)}; }
  bool is_var() const { return kind == Kind::Var; }
  bool is_const() const { return kind == Kind::Const; }

  friend bool operator==(const Term& a, const Term& b) { return a.kind == b.kind && a.name == b.name; }
  friend bool operator<(const Term& a, const Term& b) {
    return std::pair(a.kind, a.name) < std::pair(b.kind, b.name);
  }
};

using Substitution = std::map<std::string, Term>;

/// Immutable first-order formula. Copies share structure.
class Formula {
 public:
  enum class Kind { True, False, Equal, Rel, Not, And, Or, Implies, Iff, ForAll, Exists };

  Formula() : Formula(Kind::True, {}, {}, {}) {}

  static Formula top() { return Formula(Kind::True, {}, {}, {}); }
  static Formula bottom() { return Formula(Kind::False, {}, {}, {}); }
  static Formula equal(Term a, Term b) { return Formula(Kind::Equal, {}, {std::move(a), std::move(b)}, {}); }
  static Formula rel(std::string r, std::vector<Term> args) {
    return Formula(Kind::Rel, std::move(r), std::move(args), {});
  }
  static Formula negation(Formula f) { return Formula(Kind::Not, {}, {}, {std::move(f)}); }
  static Formula binary(Kind k, Formula a, Formula b) {
    return Formula(k, {}, {}, {std::move(a), std::move(b)});
  }
  static Formula quantifier(Kind k, std::string v, Formula body) {
    return Formula(k, std::move(v), {}, {std::move(body)});
  }

  Kind kind() const { return node_->kind; }
  /// Relation name for Rel, bound variable for quantifiers.
  const std::string& symbol() const { return node_->symbol; }
  const std::vector<Term>& terms() const { return node_->terms; }
  const Formula& child(std::size_t i) const { return node_->children[i]; }
  const Formula& lhs() const { return node_->children[0]; }
  const Formula& rhs() const { return node_->children[1]; }
  const Formula& body() const { return node_->children[0]; }
  const std::string& var() const { return node_->symbol; }

  bool is_atom() const {
    auto k = kind();
    return k == Kind::True || k == Kind::False || k == Kind::Equal || k == Kind::Rel;
  }
  bool is_binary() const {
    auto k = kind();
    return k == Kind::And || k == Kind::Or || k == Kind::Implies || k == Kind::Iff;
  }
  bool is_quantifier() const { return kind() == Kind::ForAll || kind() == Kind::Exists; }
  bool same_node(const Formula& o) const { return node_ == o.node_; }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.symbol() != b.symbol() || a.terms() != b.terms()) return false;
    const auto& ca = a.node_->children;
    const auto& cb = b.node_->children;
    if (ca.size() != cb.size()) return false;
    for (std::size_t i = 0; i < ca.size(); ++i)
      if (!(ca[i] == cb[i])) return false;
    return true;
  }
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  struct Node {
    Kind kind;
    std::string symbol;
    std::vector<Term> terms;
    std::vector<Formula> children;
  };

  Formula(Kind k, std::string sym, std::vector<Term> terms, std::vector<Formula> children)
      : node_(std::make_shared<const Node>(Node{k, std::move(sym), std::move(terms), std::move(children)})) {}

  std::shared_ptr<const Node> node_;
};

using FK = Formula::Kind;

// Builders.
inline Term var(std::string n) { return Term::var(std::move(n)); }
inline Term cst(std::string n) { return Term::constant(std::move(n)); }
inline Formula top() { return Formula::top(); }
inline Formula bottom() { return Formula::bottom(); }
inline Formula eq(Term a, Term b) { return Formula::equal(std::move(a), std::move(b)); }
inline Formula eq(const std::string& a, const std::string& b) { return eq(var(a), var(b)); }
inline Formula rel(std::string r, std::vector<Term> args) { return Formula::rel(std::move(r), std::move(args)); }
inline Formula neg(Formula f) { return Formula::negation(std::move(f)); }
inline Formula conj(Formula a, Formula b) { return Formula::binary(FK::And, std::move(a), std::move(b)); }
inline Formula disj(Formula a, Formula b) { return Formula::binary(FK::Or, std::move(a), std::move(b)); }
inline Formula implies(Formula a, Formula b) { return Formula::binary(FK::Implies, std::move(a), std::move(b)); }
inline Formula iff(Formula a, Formula b) { return Formula::binary(FK::Iff, std::move(a), std::move(b)); }
inline Formula forall(std::string v, Formula b) { return Formula::quantifier(FK::ForAll, std::move(v), std::move(b)); }
inline Formula exists(std::string v, Formula b) { return Formula::quantifier(FK::Exists, std::move(v), std::move(b)); }

/// Left-folded conjunction; `true` when empty.
inline Formula conj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return top();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = conj(acc, fs[i]);
  return acc;
}

/// Left-folded disjunction; `false` when empty.
inline Formula disj_all(const std::vector<Formula>& fs) {
  if (fs.empty()) return bottom();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = disj(acc, fs[i]);
  return acc;
}

/// Conjunction that drops syntactic `true` operands.
inline Formula conj_simp(const std::vector<Formula>& fs) {
  std::vector<Formula> kept;
  for (const auto& f : fs)
    if (f.kind() != FK::True) kept.push_back(f);
  return conj_all(kept);
}

inline Formula exists_block(const std::vector<std::string>& vs, Formula body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = exists(*it, std::move(body));
  return body;
}

inline Formula forall_block(const std::vector<std::string>& vs, Formula body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = forall(*it, std::move(body));
  return body;
}

// ---------------------------------------------------------------------------
// Variables
// ---------------------------------------------------------------------------

namespace detail {

inline void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case FK::True:
    case FK::False:
      return;
    case FK::Equal:
    case FK::Rel:
      for (const auto& t : f.terms())
        if (t.is_var() && !bound.count(t.name)) out.insert(t.name);
      return;
    case FK::Not:
      collect_free(f.body(), bound, out);
      return;
    case FK::And:
    case FK::Or:
    case FK::Implies:
    case FK::Iff:
      collect_free(f.lhs(), bound, out);
      collect_free(f.rhs(), bound, out);
      return;
    case FK::ForAll:
    case FK::Exists: {
      bool fresh = bound.insert(f.var()).second;
      collect_free(f.body(), bound, out);
      if (fresh) bound.erase(f.var());
      return;
    }
  }
}

inline void collect_all(const Formula& f, std::set<std::string>& out) {
  if (f.is_quantifier()) out.insert(f.var());
  for (const auto& t : f.terms())
    if (t.is_var()) out.insert(t.name);
  if (f.kind() == FK::Not || f.is_quantifier()) collect_all(f.body(), out);
  if (f.is_binary()) {
    collect_all(f.lhs(), out);
    collect_all(f.rhs(), out);
  }
}

}  // namespace detail

inline std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> bound, out;
  detail::collect_free(f, bound, out);
  return out;
}

/// Free and bound variable names.
inline std::set<std::string> all_vars(const Formula& f) {
  std::set<std::string> out;
  detail::collect_all(f, out);
  return out;
}

inline bool is_sentence(const Formula& f) { return free_vars(f).empty(); }

inline std::set<std::string> constants_of(const Formula& f) {
  std::set<std::string> out;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    for (const auto& t : g.terms())
      if (t.is_const()) out.insert(t.name);
    if (g.kind() == FK::Not || g.is_quantifier()) go(g.body());
    if (g.is_binary()) {
      go(g.lhs());
      go(g.rhs());
    }
  };
  go(f);
  return out;
}

inline std::size_t quantifier_depth(const Formula& f) {
  if (f.is_atom()) return 0;
  if (f.kind() == FK::Not) return quantifier_depth(f.body());
  if (f.is_quantifier()) return 1 + quantifier_depth(f.body());
  return std::max(quantifier_depth(f.lhs()), quantifier_depth(f.rhs()));
}

/// Least `base + k` (k >= 1) not in `avoid`.
inline std::string fresh_variant(const std::string& base, const std::set<std::string>& avoid) {
  for (std::size_t k = 1;; ++k) {
    std::string cand = base + std::to_string(k);
    if (!avoid.count(cand)) return cand;
  }
}

/// `base` itself if free, else a numbered variant.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  return avoid.count(base) ? fresh_variant(base, avoid) : base;
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace detail {

inline Term subst_term(const Term& t, const Substitution& m) {
  if (!t.is_var()) return t;
  auto it = m.find(t.name);
  return it == m.end() ? t : it->second;
}

inline Formula subst(const Formula& f, const Substitution& m) {
  if (m.empty()) return f;
  switch (f.kind()) {
    case FK::True:
    case FK::False:
      return f;
    case FK::Equal:
      return eq(subst_term(f.terms()[0], m), subst_term(f.terms()[1], m));
    case FK::Rel: {
      std::vector<Term> args;
      args.reserve(f.terms().size());
      for (const auto& t : f.terms()) args.push_back(subst_term(t, m));
      return rel(f.symbol(), std::move(args));
    }
    case FK::Not:
      return neg(subst(f.body(), m));
    case FK::And:
    case FK::Or:
    case FK::Implies:
    case FK::Iff:
      return Formula::binary(f.kind(), subst(f.lhs(), m), subst(f.rhs(), m));
    case FK::ForAll:
    case FK::Exists: {
      const std::string& v = f.var();
      Substitution inner;
      std::set<std::string> body_free = free_vars(f.body());
      std::set<std::string> range_vars;
      for (const auto& [x, t] : m) {
        if (x == v || !body_free.count(x)) continue;
        inner.emplace(x, t);
        if (t.is_var()) range_vars.insert(t.name);
      }
      if (inner.empty()) return f;
      if (!range_vars.count(v)) return Formula::quantifier(f.kind(), v, subst(f.body(), inner));
      std::set<std::string> avoid = all_vars(f.body());
      avoid.insert(range_vars.begin(), range_vars.end());
      for (const auto& [x, t] : inner) avoid.insert(x);
      std::string renamed = fresh_variant(v, avoid);
      inner.emplace(v, var(renamed));
      return Formula::quantifier(f.kind(), renamed, subst(f.body(), inner));
    }
  }
  return f;
}

}  // namespace detail

/// Capture-avoiding simultaneous substitution of terms for free variables.
inline Formula substitute(const Formula& f, const Substitution& m) { return detail::subst(f, m); }

/// Structural equality up to renaming of bound variables.
inline bool alpha_equivalent(const Formula& a, const Formula& b) {
  // Bound variables are paired positionally via de Bruijn-style environments.
  std::function<bool(const Formula&, const Formula&, std::vector<std::pair<std::string, std::string>>&)> go;
  auto term_eq = [](const Term& x, const Term& y, const std::vector<std::pair<std::string, std::string>>& env) {
    if (x.kind != y.kind) return false;
    if (x.is_const()) return x.name == y.name;
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      bool lx = it->first == x.name, ly = it->second == y.name;
      if (lx || ly) return lx && ly;
    }
    return x.name == y.name;
  };
  go = [&](const Formula& f, const Formula& g, std::vector<std::pair<std::string, std::string>>& env) -> bool {
    if (f.kind() != g.kind()) return false;
    switch (f.kind()) {
      case FK::True:
      case FK::False:
        return true;
      case FK::Equal:
      case FK::Rel:
        if (f.symbol() != g.symbol() || f.terms().size() != g.terms().size()) return false;
        for (std::size_t i = 0; i < f.terms().size(); ++i)
          if (!term_eq(f.terms()[i], g.terms()[i], env)) return false;
        return true;
      case FK::Not:
        return go(f.body(), g.body(), env);
      case FK::ForAll:
      case FK::Exists: {
        env.emplace_back(f.var(), g.var());
        bool r = go(f.body(), g.body(), env);
        env.pop_back();
        return r;
      }
      default:
        return go(f.lhs(), g.lhs(), env) && go(f.rhs(), g.rhs(), env);
    }
  };
  std::vector<std::pair<std::string, std::string>> env;
  return go(a, b, env);
}

// ---------------------------------------------------------------------------
// Counting quantifiers
// ---------------------------------------------------------------------------

/// exists>=n v. body, as n existentials over pairwise-distinct witnesses.
inline Formula expand_counting(std::size_t n, const std::string& v, const Formula& body) {
  if (n == 0) return top();
  std::set<std::string> avoid = all_vars(body);
  avoid.insert(v);
  std::vector<std::string> xs;
  for (std::size_t i = 0; i < n; ++i) {
    std::string x = v + std::to_string(i + 1);
    if (avoid.count(x)) x = fresh_variant(v + "_", avoid);
    avoid.insert(x);
    xs.push_back(x);
  }
  std::vector<Formula> parts;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) parts.push_back(neg(eq(xs[i], xs[j])));
  for (const auto& x : xs) parts.push_back(substitute(body, {{v, var(x)}}));
  return exists_block(xs, conj_all(parts));
}

// ---------------------------------------------------------------------------
// Signature checking
// ---------------------------------------------------------------------------

/// Throws SignatureError if `f` mentions a symbol outside `sig` or misuses an arity.
inline void check_over(const Signature& sig, const Formula& f) {
  for (const auto& t : f.terms())
    if (t.is_const() && !sig.has_constant(t.name))
      throw SignatureError("unknown constant '" + t.name + "'");
  if (f.kind() == FK::Rel) {
    if (!sig.has_relation(f.symbol())) throw SignatureError("unknown relation symbol '" + f.symbol() + "'");
    if (sig.arity(f.symbol()) != f.terms().size())
      throw SignatureError("arity mismatch for '" + f.symbol() + "': expected " +
                           std::to_string(sig.arity(f.symbol())) + ", got " + std::to_string(f.terms().size()));
  }
  if (f.kind() == FK::Not || f.is_quantifier()) check_over(sig, f.body());
  if (f.is_binary()) {
    check_over(sig, f.lhs());
    check_over(sig, f.rhs());
  }
}

inline bool is_over(const Signature& sig, const Formula& f) {
  try {
    check_over(sig, f);
    return true;
  } catch (const SignatureError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Negation normal form
// ---------------------------------------------------------------------------

/// Negation normal form over {and, or, forall, exists}; `->` and `<->` are eliminated.
inline Formula to_nnf(const Formula& f, bool negated = false) {
  switch (f.kind()) {
    case FK::True:
      return negated ? bottom() : top();
    case FK::False:
      return negated ? top() : bottom();
    case FK::Equal:
    case FK::Rel:
      return negated ? neg(f) : f;
    case FK::Not:
      return to_nnf(f.body(), !negated);
    case FK::And:
      return negated ? disj(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                     : conj(to_nnf(f.lhs()), to_nnf(f.rhs()));
    case FK::Or:
      return negated ? conj(to_nnf(f.lhs(), true), to_nnf(f.rhs(), true))
                     : disj(to_nnf(f.lhs()), to_nnf(f.rhs()));
    case FK::Implies:
      return negated ? conj(to_nnf(f.lhs()), to_nnf(f.rhs(), true))
                     : disj(to_nnf(f.lhs(), true), to_nnf(f.rhs()));
    case FK::Iff:
      if (negated)
        return disj(conj(to_nnf(f.lhs()), to_nnf(f.rhs(), true)), conj(to_nnf(f.lhs(), true), to_nnf(f.rhs())));
      return conj(disj(to_nnf(f.lhs(), true), to_nnf(f.rhs())), disj(to_nnf(f.lhs()), to_nnf(f.rhs(), true)));
    case FK::ForAll:
      return negated ? exists(f.var(), to_nnf(f.body(), true)) : forall(f.var(), to_nnf(f.body()));
    case FK::Exists:
      return negated ? forall(f.var(), to_nnf(f.body(), true)) : exists(f.var(), to_nnf(f.body()));
  }
  return f;
}

/// Operands of a nested same-kind binary chain, left to right.
inline std::vector<Formula> flatten(const Formula& f, FK kind) {
  std::vector<Formula> out;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (g.kind() == kind) {
      go(g.lhs());
      go(g.rhs());
    } else {
      out.push_back(g);
    }
  };
  go(f);
  return out;
}

// ---------------------------------------------------------------------------
// Theories
// ---------------------------------------------------------------------------

/// A theory given by finitely many axioms plus schemas indexed by naturals.
struct SchemaTheory {
  struct Schema {
    std::string label;
    std::function<Formula(std::size_t)> instance;
  };

  std::string name;
  Signature signature;
  std::vector<Formula> axioms;
  std::vector<Schema> schemas;

  /// Plain axioms followed by schema instances for parameters 1..bound.
  std::vector<Formula> instantiate(std::size_t bound) const {
    std::vector<Formula> out = axioms;
    for (const auto& s : schemas)
      for (std::size_t n = 1; n <= bound; ++n) out.push_back(s.instance(n));
    return out;
  }
};

}  // namespace biprism
