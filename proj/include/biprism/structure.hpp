#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "biprism/logic.hpp"

namespace biprism {

using Element = std::size_t;
using Tuple = std::vector<Element>;
using Assignment = std::map<std::string, Element>;

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Number of tuples in domain^arity; throws beyond `limit`.
inline std::size_t tuple_count(std::size_t size, std::size_t arity, std::size_t limit = std::size_t(1) << 26) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < arity; ++i) {
    if (size != 0 && n > limit / size) throw StructureError("domain^arity exceeds enumeration limit");
    n *= size;
  }
  return n;
}

/// Calls `fn(tuple)` for every tuple of domain^arity in lexicographic order.
template <typename Fn>
void for_each_tuple(std::size_t size, std::size_t arity, Fn&& fn) {
  if (arity > 0 && size == 0) return;
  Tuple t(arity, 0);
  while (true) {
    fn(static_cast<const Tuple&>(t));
    std::size_t i = arity;
    while (i > 0) {
      --i;
      if (++t[i] < size) break;
      t[i] = 0;
      if (i == 0) return;
    }
    if (arity == 0) return;
  }
}

/// Finite structure over {0, ..., size-1}.
class FiniteStructure {
 public:
  FiniteStructure() = default;

  FiniteStructure(Signature sig, std::size_t size, std::map<std::string, std::set<Tuple>> relations = {},
                  std::map<std::string, Element> constants = {})
      : sig_(std::move(sig)), size_(size), relations_(std::move(relations)), constants_(std::move(constants)) {
    sig_.validate();
    for (const auto& [r, tuples] : relations_) {
      if (!sig_.has_relation(r)) throw StructureError("relation '" + r + "' not in signature");
      for (const auto& t : tuples) {
        if (t.size() != sig_.arity(r)) throw StructureError("tuple of wrong arity in '" + r + "'");
        for (Element e : t)
          if (e >= size_) throw StructureError("tuple element out of domain in '" + r + "'");
      }
    }
    for (const auto& [r, k] : sig_.relations) {
      auto& table = tables_[r];
      table.assign(tuple_count(size_, k), 0);
      auto it = relations_.find(r);
      if (it == relations_.end()) {
        relations_[r];
        continue;
      }
      for (const auto& t : it->second) table[index(t)] = 1;
    }
    for (const auto& [c, e] : constants_) {
      if (!sig_.has_constant(c)) throw StructureError("constant '" + c + "' not in signature");
      if (e >= size_) throw StructureError("constant '" + c + "' interpreted outside the domain");
    }
    for (const auto& c : sig_.constants)
      if (!constants_.count(c)) throw StructureError("constant '" + c + "' is not interpreted");
  }

  const Signature& signature() const { return sig_; }
  std::size_t size() const { return size_; }
  const std::map<std::string, std::set<Tuple>>& relations() const { return relations_; }
  const std::map<std::string, Element>& constants() const { return constants_; }
  Element constant(const std::string& c) const {
    auto it = constants_.find(c);
    if (it == constants_.end()) throw EvaluationError("unknown constant '" + c + "'");
    return it->second;
  }

  bool holds(const std::string& r, std::span<const Element> args) const {
    auto it = tables_.find(r);
    if (it == tables_.end()) throw EvaluationError("unknown relation '" + r + "'");
    return it->second[index(args)] != 0;
  }

  const std::vector<std::uint8_t>& table(const std::string& r) const { return tables_.at(r); }

  std::size_t index(std::span<const Element> t) const {
    std::size_t idx = 0;
    for (Element e : t) idx = idx * size_ + e;
    return idx;
  }

  friend bool operator==(const FiniteStructure& a, const FiniteStructure& b) {
    return a.sig_ == b.sig_ && a.size_ == b.size_ && a.relations_ == b.relations_ && a.constants_ == b.constants_;
  }

 private:
  Signature sig_;
  std::size_t size_ = 0;
  std::map<std::string, std::set<Tuple>> relations_;
  std::map<std::string, Element> constants_;
  std::map<std::string, std::vector<std::uint8_t>> tables_;
};

/// Formula compiled against a structure with a fixed ordering of free variables.
/// Not thread-safe: holds its own scratch assignment. A must outlive the evaluator.
class Evaluator {
 public:
  Evaluator(const FiniteStructure& A, const Formula& f, std::vector<std::string> inputs)
      : A_(&A), inputs_(std::move(inputs)) {
    std::map<std::string, int> env;
    for (std::size_t i = 0; i < inputs_.size(); ++i) env[inputs_[i]] = static_cast<int>(i);
    slots_ = inputs_.size();
    root_ = compile(f, env);
    scratch_.assign(slots_, 0);
  }

  const std::vector<std::string>& inputs() const { return inputs_; }

  bool operator()(std::span<const Element> values) {
    if (values.size() != inputs_.size()) throw EvaluationError("wrong number of input values");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] >= A_->size()) throw EvaluationError("assignment element outside the domain");
      scratch_[i] = values[i];
    }
    return eval(root_);
  }

 private:
  struct Node {
    FK kind;
    int a = -1, b = -1;
    int slot = -1;
    const std::vector<std::uint8_t>* table = nullptr;
    // >= 0: variable slot; < 0: constant element -(e+1).
    std::vector<long> args;
  };

  int compile(const Formula& f, std::map<std::string, int>& env) {
    Node n{f.kind(), -1, -1, -1, nullptr, {}};
    switch (f.kind()) {
      case FK::True:
      case FK::False:
        break;
      case FK::Equal:
      case FK::Rel:
        if (f.kind() == FK::Rel) n.table = &A_->table(f.symbol());
        for (const auto& t : f.terms()) {
          if (t.is_const()) {
            n.args.push_back(-static_cast<long>(A_->constant(t.name)) - 1);
          } else {
            auto it = env.find(t.name);
            if (it == env.end()) throw EvaluationError("unbound free variable '" + t.name + "'");
            n.args.push_back(it->second);
          }
        }
        break;
      case FK::Not:
        n.a = compile(f.body(), env);
        break;
      case FK::ForAll:
      case FK::Exists: {
        int slot = static_cast<int>(slots_++);
        auto prev = env.find(f.var());
        std::optional<int> saved;
        if (prev != env.end()) saved = prev->second;
        env[f.var()] = slot;
        n.a = compile(f.body(), env);
        if (saved) env[f.var()] = *saved;
        else env.erase(f.var());
        n.slot = slot;
        break;
      }
      default:
        n.a = compile(f.lhs(), env);
        n.b = compile(f.rhs(), env);
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
  }

  Element value(long arg) const { return arg >= 0 ? scratch_[arg] : static_cast<Element>(-arg - 1); }

  bool eval(int i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case FK::True: return true;
      case FK::False: return false;
      case FK::Equal: return value(n.args[0]) == value(n.args[1]);
      case FK::Rel: {
        std::size_t idx = 0;
        for (long a : n.args) idx = idx * A_->size() + value(a);
        return (*n.table)[idx] != 0;
      }
      case FK::Not: return !eval(n.a);
      case FK::And: return eval(n.a) && eval(n.b);
      case FK::Or: return eval(n.a) || eval(n.b);
      case FK::Implies: return !eval(n.a) || eval(n.b);
      case FK::Iff: return eval(n.a) == eval(n.b);
      case FK::ForAll:
        for (Element e = 0; e < A_->size(); ++e) {
          scratch_[n.slot] = e;
          if (!eval(n.a)) return false;
        }
        return true;
      case FK::Exists:
        for (Element e = 0; e < A_->size(); ++e) {
          scratch_[n.slot] = e;
          if (eval(n.a)) return true;
        }
        return false;
    }
    return false;
  }

  const FiniteStructure* A_;
  std::vector<std::string> inputs_;
  std::vector<Node> nodes_;
  std::size_t slots_ = 0;
  int root_ = -1;
  std::vector<Element> scratch_;
};

/// Tarski satisfaction. Every free variable of `f` must be assigned.
inline bool evaluate(const FiniteStructure& A, const Formula& f, const Assignment& a = {}) {
  std::vector<std::string> names;
  Tuple values;
  for (const auto& [v, e] : a) {
    names.push_back(v);
    values.push_back(e);
  }
  Evaluator ev(A, f, names);
  return ev(values);
}

/// { t in domain^|vars| : A |= f[vars := t] }, lexicographically ordered.
inline std::vector<Tuple> definable_set(const FiniteStructure& A, const Formula& f, const std::vector<std::string>& vars) {
  std::set<std::string> distinct(vars.begin(), vars.end());
  if (distinct.size() != vars.size()) throw EvaluationError("duplicate variable in definable_set");
  Evaluator ev(A, f, vars);
  std::vector<Tuple> out;
  for_each_tuple(A.size(), vars.size(), [&](const Tuple& t) {
    if (ev(t)) out.push_back(t);
  });
  return out;
}

/// The structure with `size` elements over the empty signature.
inline FiniteStructure pure_set(std::size_t size) { return FiniteStructure(Signature{}, size); }

/// Calls `fn(structure)` for every structure over `sig` with the given domain
/// size, in a fixed order, until `fn` returns true. Returns whether it did.
/// Throws if the count would exceed `limit`.
template <typename Fn>
bool for_each_structure(const Signature& sig, std::size_t size, Fn&& fn, std::size_t limit = std::size_t(1) << 24) {
  std::vector<std::string> consts(sig.constants.begin(), sig.constants.end());
  std::vector<std::pair<std::string, std::size_t>> rels(sig.relations.begin(), sig.relations.end());
  if (!consts.empty() && size == 0) return false;
  std::size_t total_bits = 0;
  for (const auto& [r, k] : rels) total_bits += tuple_count(size, k);
  std::size_t const_combos = tuple_count(size, consts.size());
  if (total_bits >= 63 || (std::size_t(1) << total_bits) > limit / std::max<std::size_t>(const_combos, 1))
    throw StructureError("too many structures to enumerate");
  bool stop = false;
  for_each_tuple(size, consts.size(), [&](const Tuple& cvals) {
    if (stop) return;
    std::map<std::string, Element> cmap;
    for (std::size_t i = 0; i < consts.size(); ++i) cmap[consts[i]] = cvals[i];
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << total_bits) && !stop; ++mask) {
      std::map<std::string, std::set<Tuple>> rmap;
      std::size_t bit = 0;
      for (const auto& [r, k] : rels) {
        auto& ts = rmap[r];
        for_each_tuple(size, k, [&](const Tuple& t) {
          if (mask >> bit & 1) ts.insert(t);
          ++bit;
        });
      }
      stop = fn(FiniteStructure(sig, size, std::move(rmap), cmap));
    }
  });
  return stop;
}

/// Every structure over `sig` with the given domain size, in enumeration order.
inline std::vector<FiniteStructure> all_structures(const Signature& sig, std::size_t size,
                                                   std::size_t limit = std::size_t(1) << 20) {
  std::vector<FiniteStructure> out;
  for_each_structure(
      sig, size,
      [&](FiniteStructure A) {
        out.push_back(std::move(A));
        return false;
      },
      limit);
  return out;
}

}  // namespace biprism
