#pragma once

// Bounded ground tableau for first-order logic with equality, finite
// countermodel search, and a replayer for the tableau's proof traces.
//
// Trace format, one item per line:
//
//   biprism-trace 1
//   node <id> premise <k> : <formula>
//   node <id> negated-goal <x=p,...|-> : <formula>
//   node <id> nnf <src> : <formula>
//   node <id> alpha <src> : <formula>
//   node <id> gamma <src> <term> : <formula>
//   node <id> delta <src> <param> : <formula>
//   close <id> <id> ...
//   split <src> <n>
//   branch <i>
//   node <id> beta <src> <i> : <formula>
//   ...
//   end
//
// A block is a run of node lines ending in `close` or in `split` followed by
// its n branch blocks. Parameters are printed as constants.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "biprism/logic.hpp"
#include "biprism/structure.hpp"
#include "biprism/syntax.hpp"

namespace biprism {

struct ProverBounds {
  std::size_t tableau_depth = 16;           // branching splits along one branch
  std::size_t instantiation_budget = 2000;  // gamma instances along one branch
  std::size_t countermodel_max_size = 4;
  std::size_t max_nodes = 100000;           // whole tableau

  void validate() const {
    if (tableau_depth == 0 || instantiation_budget == 0 || countermodel_max_size == 0 || max_nodes == 0)
      throw Error("prover bounds must be positive");
  }
};

struct Countermodel {
  FiniteStructure structure;
  Assignment assignment;
};

struct Verdict {
  enum class Kind { Proved, Refuted, Unknown };
  Kind kind = Kind::Unknown;
  std::string trace;                         // Proved
  std::optional<Countermodel> countermodel;  // Refuted
  std::string reason;                        // Unknown: which bound ran out

  bool proved() const { return kind == Kind::Proved; }
  bool refuted() const { return kind == Kind::Refuted; }
};

inline const char* to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Proved: return "PROVED";
    case Verdict::Kind::Refuted: return "REFUTED";
    case Verdict::Kind::Unknown: return "UNKNOWN";
  }
  return "?";
}

/// Symbols used by the formulas; arities from first use.
inline Signature infer_signature(const std::vector<Formula>& fs) {
  Signature sig;
  std::function<void(const Formula&)> go = [&](const Formula& f) {
    for (const auto& t : f.terms())
      if (t.is_const()) sig.constants.insert(t.name);
    if (f.kind() == FK::Rel) {
      auto [it, fresh] = sig.relations.emplace(f.symbol(), f.terms().size());
      if (!fresh && it->second != f.terms().size())
        throw SignatureError("relation '" + f.symbol() + "' used with two arities");
    }
    if (f.kind() == FK::Not || f.is_quantifier()) go(f.body());
    if (f.is_binary()) {
      go(f.lhs());
      go(f.rhs());
    }
  };
  for (const auto& f : fs) go(f);
  return sig;
}

// ---------------------------------------------------------------------------
// Countermodels
// ---------------------------------------------------------------------------

/// A structure of size 1..max_n over `sig` satisfying every axiom and an
/// assignment to the goal's free variables falsifying it. Results are
/// re-checked with `evaluate` before being returned.
inline std::optional<Countermodel> find_countermodel(const std::vector<Formula>& axioms, const Formula& goal,
                                                     const Signature& sig, std::size_t max_n) {
  for (const auto& a : axioms) {
    check_over(sig, a);
    if (!is_sentence(a)) throw Error("axiom has free variables: " + render_formula(a));
  }
  check_over(sig, goal);
  auto fv = free_vars(goal);
  std::vector<std::string> vars(fv.begin(), fv.end());
  std::optional<Countermodel> found;
  for (std::size_t n = 1; n <= max_n && !found; ++n) {
    for_each_structure(sig, n, [&](FiniteStructure A) {
      for (const auto& a : axioms)
        if (!evaluate(A, a)) return false;
      Evaluator ev(A, goal, vars);
      std::optional<Tuple> bad;
      for_each_tuple(n, vars.size(), [&](const Tuple& t) {
        if (!bad && !ev(t)) bad = t;
      });
      if (!bad) return false;
      Assignment asg;
      for (std::size_t i = 0; i < vars.size(); ++i) asg[vars[i]] = (*bad)[i];
      found = Countermodel{std::move(A), std::move(asg)};
      return true;
    });
  }
  if (found) {
    for (const auto& a : axioms)
      if (!evaluate(found->structure, a)) throw Error("countermodel check failed on an axiom");
    if (evaluate(found->structure, goal, found->assignment)) throw Error("countermodel check failed on the goal");
  }
  return found;
}

inline std::optional<Countermodel> find_countermodel(const std::vector<Formula>& axioms, const Formula& goal,
                                                     std::size_t max_n) {
  std::vector<Formula> all = axioms;
  all.push_back(goal);
  return find_countermodel(axioms, goal, infer_signature(all), max_n);
}

// ---------------------------------------------------------------------------
// Tableau
// ---------------------------------------------------------------------------

namespace detail {

class UnionFind {
 public:
  std::string find(const std::string& a) {
    auto it = parent_.find(a);
    if (it == parent_.end() || it->second == a) return a;
    std::string root = find(it->second);
    it->second = root;
    return root;
  }
  bool merge(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra == rb) return false;
    parent_.emplace(ra, ra);
    parent_.emplace(rb, rb);
    if (rb < ra) std::swap(ra, rb);
    parent_[rb] = ra;
    return true;
  }

 private:
  std::map<std::string, std::string> parent_;
};

struct TraceBlock {
  std::vector<std::string> lines;
  bool split = false;
  std::size_t split_src = 0;
  std::vector<TraceBlock> children;

  void emit(std::string& out) const {
    for (const auto& l : lines) out += l + "\n";
    if (!split) return;
    out += "split " + std::to_string(split_src) + " " + std::to_string(children.size()) + "\n";
    for (std::size_t i = 0; i < children.size(); ++i) {
      out += "branch " + std::to_string(i) + "\n";
      children[i].emit(out);
      out += "end\n";
    }
  }
};

inline bool is_literal(const Formula& f) {
  return f.is_atom() || (f.kind() == FK::Not && f.body().is_atom());
}

struct Item {
  Formula f;
  std::size_t id;
};

struct Branch {
  std::vector<Item> items;
  std::deque<std::size_t> pending;
  std::vector<std::size_t> gammas, betas;
  std::map<std::string, std::size_t> keys;  // rendered formula -> local index
  std::vector<std::string> terms;
  std::size_t level = 0;
  std::set<std::pair<std::size_t, std::size_t>> done;
  UnionFind uf;
  std::vector<std::size_t> pos_eq, neg_eq, pos_rel, neg_rel;
  // Relation literals by canonical key under `uf`; rebuilt when classes merge.
  std::map<std::string, std::size_t> pos_keys, neg_keys;
  std::size_t splits = 0, instances = 0;
};

class Tableau {
 public:
  enum class Result { Closed, Open, Exhausted };

  Tableau(const Signature& sig, const std::vector<Formula>& axioms, bool use_axioms, const Formula& goal,
          const ProverBounds& b)
      : sig_(sig), bounds_(b) {
    std::set<std::string> names;
    auto note = [&](const Formula& f) {
      for (const auto& v : all_vars(f)) names.insert(v);
      for (const auto& c : constants_of(f)) names.insert(c);
    };
    for (const auto& a : axioms) note(a);
    note(goal);
    for (const auto& c : sig.constants) names.insert(c);
    prefix_ = "_p";
    auto clash = [&] {
      return std::any_of(names.begin(), names.end(), [&](const std::string& n) { return n.rfind(prefix_, 0) == 0; });
    };
    while (clash()) prefix_ += "_";

    for (const auto& c : sig.constants) root_.terms.push_back(c);
    if (use_axioms)
      for (std::size_t k = 0; k < axioms.size(); ++k) {
        std::size_t i = add(root_, root_block_, axioms[k], "premise " + std::to_string(k), false);
        if (i != npos) nnf_of(i, axioms[k]);
      }
    Substitution m;
    std::string mapping;
    for (const auto& v : free_vars(goal)) {
      std::string p = new_param();
      m[v] = cst(p);
      root_.terms.push_back(p);
      mapping += (mapping.empty() ? "" : ",") + v + "=" + p;
    }
    Formula ng = neg(substitute(goal, m));
    std::size_t i = add(root_, root_block_, ng, "negated-goal " + (mapping.empty() ? "-" : mapping), false);
    if (i != npos) nnf_of(i, ng);
  }

  Result run() {
    Result r = prove(root_, root_block_);
    if (r == Result::Exhausted && reason_.empty()) reason_ = "bounds exhausted";
    return r;
  }
  const std::string& reason() const { return reason_; }

  std::string trace() const {
    std::string out = "biprism-trace 1\n";
    root_block_.emit(out);
    return out;
  }

 private:
  std::string new_param() { return prefix_ + std::to_string(params_++); }

  // The premise and negated goal are kept as written; their NNF is what the search uses.
  void nnf_of(std::size_t item_index, const Formula& f) {
    Formula g = to_nnf(f);
    auto& items = root_.items;
    std::size_t src = items[item_index].id;
    if (g == f) {
      root_.pending.push_back(item_index);
      return;
    }
    add(root_, root_block_, g, "nnf " + std::to_string(src));
  }

  std::size_t emit_node(TraceBlock& blk, const std::string& rule, const std::string& text) {
    std::size_t id = next_id_++;
    if (next_id_ > bounds_.max_nodes) {
      exhausted_ = true;
      if (reason_.empty()) reason_ = "node limit " + std::to_string(bounds_.max_nodes);
    }
    blk.lines.push_back("node " + std::to_string(id) + " " + rule + " : " + text);
    return id;
  }

  /// Appends a node to the branch unless the same formula is already there.
  /// Returns the local index, or npos for a duplicate.
  std::size_t add(Branch& br, TraceBlock& blk, const Formula& f, const std::string& rule, bool queue = true) {
    std::string key = render_formula(f);
    if (br.keys.count(key)) return npos;
    std::size_t id = emit_node(blk, rule, key);
    br.keys.emplace(key, br.items.size());
    br.items.push_back({f, id});
    if (queue) br.pending.push_back(br.items.size() - 1);
    return br.items.size() - 1;
  }

  static const std::string& tname(const Term& t) { return t.name; }

  static std::string rel_key(UnionFind& uf, const Formula& atom) {
    std::string k = atom.symbol();
    for (const auto& t : atom.terms()) k += " " + uf.find(tname(t));
    return k;
  }

  static void rebuild_keys(Branch& br) {
    br.pos_keys.clear();
    br.neg_keys.clear();
    for (std::size_t i : br.pos_rel) br.pos_keys.emplace(rel_key(br.uf, atom_of(br, i)), i);
    for (std::size_t i : br.neg_rel) br.neg_keys.emplace(rel_key(br.uf, atom_of(br, i)), i);
  }

  static const Formula& atom_of(const Branch& br, std::size_t i) {
    const Formula& f = br.items[i].f;
    return f.kind() == FK::Not ? f.body() : f;
  }

  static std::vector<std::size_t> with_equalities(const Branch& br, std::initializer_list<std::size_t> extra) {
    std::vector<std::size_t> ids;
    for (std::size_t i : br.pos_eq) ids.push_back(br.items[i].id);
    for (std::size_t i : extra) ids.push_back(br.items[i].id);
    return ids;
  }

  /// Trace ids witnessing a contradiction among the branch literals under `uf`.
  std::optional<std::vector<std::size_t>> clash(const Branch& br, UnionFind& uf) const {
    for (std::size_t i : br.neg_eq) {
      const Formula& a = atom_of(br, i);
      if (uf.find(tname(a.terms()[0])) == uf.find(tname(a.terms()[1]))) return with_equalities(br, {i});
    }
    if (br.pos_rel.empty() || br.neg_rel.empty()) return std::nullopt;
    std::map<std::string, std::size_t> pos;
    for (std::size_t i : br.pos_rel) pos.emplace(rel_key(uf, atom_of(br, i)), i);
    for (std::size_t j : br.neg_rel) {
      auto it = pos.find(rel_key(uf, atom_of(br, j)));
      if (it != pos.end()) return with_equalities(br, {it->second, j});
    }
    return std::nullopt;
  }

  /// If adding `d` would close the branch at once, the trace ids of the other
  /// literals involved.
  std::optional<std::vector<std::size_t>> closes_with(Branch& br, const Formula& d) const {
    if (d.kind() == FK::False) return std::vector<std::size_t>{};
    if (!is_literal(d) || d.kind() == FK::True) return std::nullopt;
    bool positive = d.kind() != FK::Not;
    const Formula& a = positive ? d : d.body();
    if (a.kind() == FK::Equal) {
      std::string s = tname(a.terms()[0]), t = tname(a.terms()[1]);
      if (!positive) {
        if (br.uf.find(s) == br.uf.find(t)) return with_equalities(br, {});
        return std::nullopt;
      }
      if (br.uf.find(s) == br.uf.find(t)) return std::nullopt;
      UnionFind u = br.uf;
      u.merge(s, t);
      return clash(br, u);
    }
    if (a.kind() != FK::Rel) return std::nullopt;
    const auto& opposite = positive ? br.neg_keys : br.pos_keys;
    auto it = opposite.find(rel_key(br.uf, a));
    if (it != opposite.end()) return with_equalities(br, {it->second});
    return std::nullopt;
  }

  /// Whether disjunct `d` already holds on the branch.
  bool entailed(Branch& br, const Formula& d) {
    if (d.kind() == FK::True) return true;
    if (br.keys.count(render_formula(d))) return true;
    if (!is_literal(d)) return false;
    bool positive = d.kind() != FK::Not;
    const Formula& a = positive ? d : d.body();
    if (a.kind() == FK::Equal) {
      const std::string& s = br.uf.find(tname(a.terms()[0]));
      const std::string& t = br.uf.find(tname(a.terms()[1]));
      if (positive) return s == t;
      for (std::size_t j : br.neg_eq) {
        const Formula& b = atom_of(br, j);
        std::string u = br.uf.find(tname(b.terms()[0])), v = br.uf.find(tname(b.terms()[1]));
        if ((u == s && v == t) || (u == t && v == s)) return true;
      }
      return false;
    }
    if (a.kind() != FK::Rel) return false;
    return (positive ? br.pos_keys : br.neg_keys).count(rel_key(br.uf, a)) != 0;
  }

  enum class Tri { Closes, Open, Undecided };

  /// Whether the quantifier-free NNF formula `m` under the partial substitution
  /// `sub` would close the branch once fully expanded.
  Tri closing_status(Branch& br, const Formula& m, const Substitution& sub) const {
    switch (m.kind()) {
      case FK::True: return Tri::Open;
      case FK::False: return Tri::Closes;
      case FK::And:
      case FK::Or: {
        bool conj = m.kind() == FK::And;
        Tri l = closing_status(br, m.lhs(), sub);
        if (conj && l == Tri::Closes) return Tri::Closes;
        if (!conj && l == Tri::Open) return Tri::Open;
        Tri r = closing_status(br, m.rhs(), sub);
        if (conj) {
          if (r == Tri::Closes) return Tri::Closes;
          return l == Tri::Open && r == Tri::Open ? Tri::Open : Tri::Undecided;
        }
        if (r == Tri::Open) return Tri::Open;
        return l == Tri::Closes && r == Tri::Closes ? Tri::Closes : Tri::Undecided;
      }
      default: {
        const Formula& a = m.kind() == FK::Not ? m.body() : m;
        for (const auto& t : a.terms())
          if (t.is_var() && !sub.count(t.name)) return Tri::Undecided;
        return closes_with(br, substitute(m, sub)) ? Tri::Closes : Tri::Open;
      }
    }
  }

  static bool quantifier_free(const Formula& f) {
    if (f.is_quantifier()) return false;
    if (f.kind() == FK::Not) return quantifier_free(f.body());
    if (f.is_binary()) return quantifier_free(f.lhs()) && quantifier_free(f.rhs());
    return true;
  }

  /// Term indices for the leading universal block of `g` whose instance closes
  /// the branch at once, searched depth-first with pruning. The search size is
  /// a fixed constant so the outcome does not depend on the prover bounds.
  std::optional<std::vector<std::size_t>> closing_instance(Branch& br, const Formula& g) const {
    std::vector<std::string> vars;
    Formula m = g;
    while (m.kind() == FK::ForAll) {
      vars.push_back(m.var());
      m = m.body();
    }
    if (!quantifier_free(m) || br.terms.empty()) return std::nullopt;
    std::set<std::string> distinct(vars.begin(), vars.end());
    if (distinct.size() != vars.size()) return std::nullopt;
    std::size_t visits = 0;
    std::vector<std::size_t> pick;
    Substitution sub;
    std::function<bool(std::size_t)> go = [&](std::size_t k) -> bool {
      if (++visits > kInstanceSearchLimit) return false;
      Tri st = closing_status(br, m, sub);
      if (st == Tri::Open) return false;
      if (k == vars.size()) return st == Tri::Closes;
      for (std::size_t ti = 0; ti < br.terms.size(); ++ti) {
        sub[vars[k]] = cst(br.terms[ti]);
        pick.push_back(ti);
        if (go(k + 1)) return true;
        pick.pop_back();
        if (visits > kInstanceSearchLimit) break;
      }
      sub.erase(vars[k]);
      return false;
    };
    if (go(0)) return pick;
    return std::nullopt;
  }

  /// Adds the chain of universal instances of item `g` for the given terms.
  /// Sets `added` if any node is new; returns false if the budget runs out.
  bool instantiate_chain(Branch& br, TraceBlock& blk, std::size_t g, const std::vector<std::size_t>& pick, bool& added) {
    for (std::size_t ti : pick) {
      if (br.done.insert({g, ti}).second && ++br.instances > bounds_.instantiation_budget) {
        reason_ = "instantiation budget " + std::to_string(bounds_.instantiation_budget);
        return false;
      }
      const Formula& f = br.items[g].f;
      Formula inst = substitute(f.body(), {{f.var(), cst(br.terms[ti])}});
      std::size_t i = add(br, blk, inst, "gamma " + std::to_string(br.items[g].id) + " " + br.terms[ti]);
      added |= i != npos;
      g = i != npos ? i : br.keys.at(render_formula(inst));
    }
    return true;
  }

  Result close(TraceBlock& blk, const std::vector<std::size_t>& ids) {
    std::string line = "close";
    for (auto id : ids) line += " " + std::to_string(id);
    blk.lines.push_back(line);
    return Result::Closed;
  }

  /// Processes one queued item. Returns a conflict if the branch closes.
  std::optional<std::vector<std::size_t>> process(Branch& br, TraceBlock& blk, std::size_t i) {
    Formula f = br.items[i].f;
    std::size_t id = br.items[i].id;
    switch (f.kind()) {
      case FK::True:
        return std::nullopt;
      case FK::False:
        return std::vector<std::size_t>{id};
      case FK::Equal:
        br.pos_eq.push_back(i);
        if (!br.uf.merge(tname(f.terms()[0]), tname(f.terms()[1]))) return std::nullopt;
        rebuild_keys(br);
        return clash(br, br.uf);
      case FK::Rel:
      case FK::Not: {
        bool positive = f.kind() == FK::Rel;
        const Formula& a = positive ? f : f.body();
        if (a.kind() == FK::Equal) {
          br.neg_eq.push_back(i);
          if (br.uf.find(tname(a.terms()[0])) == br.uf.find(tname(a.terms()[1]))) return with_equalities(br, {i});
          return std::nullopt;
        }
        if (a.kind() != FK::Rel) throw Error("tableau formula not in negation normal form");
        std::string k = rel_key(br.uf, a);
        (positive ? br.pos_rel : br.neg_rel).push_back(i);
        (positive ? br.pos_keys : br.neg_keys).emplace(k, i);
        const auto& opposite = positive ? br.neg_keys : br.pos_keys;
        auto it = opposite.find(k);
        if (it != opposite.end()) return with_equalities(br, {i, it->second});
        return std::nullopt;
      }
      case FK::And:
        for (const auto& c : flatten(f, FK::And)) add(br, blk, c, "alpha " + std::to_string(id));
        return std::nullopt;
      case FK::Or:
        br.betas.push_back(i);
        return std::nullopt;
      case FK::ForAll:
        br.gammas.push_back(i);
        return std::nullopt;
      case FK::Exists: {
        std::string p = new_param();
        br.terms.push_back(p);
        add(br, blk, substitute(f.body(), {{f.var(), cst(p)}}), "delta " + std::to_string(id) + " " + p);
        return std::nullopt;
      }
      default:
        throw Error("tableau formula not in negation normal form");
    }
  }

  /// Turns `blk` into a split on the disjunction at local index `bi`.
  void start_split(Branch& br, TraceBlock& blk, std::size_t bi, std::size_t n) {
    blk.split = true;
    blk.split_src = br.items[bi].id;
    blk.children.assign(n, TraceBlock{});
    br.betas.erase(std::find(br.betas.begin(), br.betas.end(), bi));
  }

  /// Adds disjunct `k` of the split to `br` and closes it if it conflicts at once.
  bool enter_child(Branch& br, TraceBlock& child, std::size_t src_id, std::size_t k, const Formula& d) {
    std::size_t i = add(br, child, d, "beta " + std::to_string(src_id) + " " + std::to_string(k));
    if (i == npos) throw Error("internal: duplicate beta child");
    br.pending.erase(std::find(br.pending.begin(), br.pending.end(), i));
    auto c = process(br, child, i);
    if (c) {
      close(child, *c);
      return true;
    }
    return false;
  }

  Result prove(Branch& br, TraceBlock& root_blk) {
    TraceBlock* blk = &root_blk;
    while (true) {
      if (exhausted_) return Result::Exhausted;

      if (!br.pending.empty()) {
        std::size_t i = br.pending.front();
        br.pending.pop_front();
        if (auto c = process(br, *blk, i)) return close(*blk, *c);
        continue;
      }

      // Disjunctions that are already true, close in every child, or leave one child open.
      bool progressed = false;
      for (std::size_t pos = 0; pos < br.betas.size() && !progressed; ++pos) {
        std::size_t bi = br.betas[pos];
        auto ds = flatten(br.items[bi].f, FK::Or);
        if (std::any_of(ds.begin(), ds.end(), [&](const Formula& d) { return entailed(br, d); })) {
          br.betas.erase(br.betas.begin() + static_cast<long>(pos));
          progressed = true;
          break;
        }
        std::vector<std::optional<std::vector<std::size_t>>> shut(ds.size());
        std::size_t open = 0, open_at = 0;
        for (std::size_t k = 0; k < ds.size(); ++k) {
          shut[k] = closes_with(br, ds[k]);
          if (!shut[k]) {
            ++open;
            open_at = k;
          }
        }
        if (open > 1) continue;
        std::size_t src_id = br.items[bi].id;
        start_split(br, *blk, bi, ds.size());
        for (std::size_t k = 0; k < ds.size(); ++k) {
          if (!shut[k]) continue;
          TraceBlock& child = blk->children[k];
          auto ids = *shut[k];
          ids.push_back(emit_node(child, "beta " + std::to_string(src_id) + " " + std::to_string(k), render_formula(ds[k])));
          close(child, ids);
        }
        if (open == 0) return Result::Closed;
        blk = &blk->children[open_at];
        if (enter_child(br, *blk, src_id, open_at, ds[open_at])) return Result::Closed;
        progressed = true;
      }
      if (progressed) continue;

      // A universal formula with an instance that closes the branch outright.
      bool found = false;
      for (std::size_t gi = 0; gi < br.gammas.size() && !found; ++gi) {
        std::size_t g = br.gammas[gi];
        if (auto pick = closing_instance(br, br.items[g].f))
          if (!instantiate_chain(br, *blk, g, *pick, found)) return Result::Exhausted;
      }
      if (found) continue;

      // Universal instances over the first `level` terms.
      bool added = false;
      for (std::size_t gi = 0, ng = br.gammas.size(); gi < ng; ++gi) {
        std::size_t g = br.gammas[gi];
        for (std::size_t ti = 0; ti < br.level && ti < br.terms.size(); ++ti) {
          if (!br.done.insert({g, ti}).second) continue;
          if (++br.instances > bounds_.instantiation_budget) {
            reason_ = "instantiation budget " + std::to_string(bounds_.instantiation_budget);
            return Result::Exhausted;
          }
          const Formula& f = br.items[g].f;
          if (add(br, *blk, substitute(f.body(), {{f.var(), cst(br.terms[ti])}}),
                  "gamma " + std::to_string(br.items[g].id) + " " + br.terms[ti]) != npos)
            added = true;
        }
      }
      if (added) continue;

      // Branching split on the first remaining disjunction.
      if (!br.betas.empty()) {
        if (br.splits + 1 > bounds_.tableau_depth) {
          reason_ = "tableau depth " + std::to_string(bounds_.tableau_depth);
          return Result::Exhausted;
        }
        std::size_t bi = br.betas.front();
        std::size_t src_id = br.items[bi].id;
        auto ds = flatten(br.items[bi].f, FK::Or);
        start_split(br, *blk, bi, ds.size());
        for (std::size_t k = 0; k < ds.size(); ++k) {
          Branch child = br;
          ++child.splits;
          if (enter_child(child, blk->children[k], src_id, k, ds[k])) continue;
          Result r = prove(child, blk->children[k]);
          if (r != Result::Closed) return r;
        }
        return Result::Closed;
      }

      if (br.level < br.terms.size()) {
        ++br.level;
        continue;
      }
      if (!br.gammas.empty() && br.terms.empty()) {
        br.terms.push_back(new_param());
        continue;
      }
      return Result::Open;
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  static constexpr std::size_t kInstanceSearchLimit = 20000;

  Signature sig_;
  ProverBounds bounds_;
  std::string prefix_;
  std::size_t params_ = 0;
  std::size_t next_id_ = 0;
  bool exhausted_ = false;
  std::string reason_;
  Branch root_;
  TraceBlock root_block_;
};

}  // namespace detail

/// Outcome of the tableau alone, without countermodel search.
struct TableauOutcome {
  enum class Kind { Closed, Open, Exhausted };
  Kind kind = Kind::Open;
  std::string trace;   // Closed
  std::string reason;  // Exhausted
};

/// Refutation search for axioms + !goal. Free variables of the goal are
/// read universally.
inline TableauOutcome tableau_search(const std::vector<Formula>& axioms, const Formula& goal, const Signature& sig,
                                     const ProverBounds& b = {}) {
  b.validate();
  for (const auto& a : axioms) {
    check_over(sig, a);
    if (!is_sentence(a)) throw Error("axiom has free variables: " + render_formula(a));
  }
  check_over(sig, goal);
  detail::Tableau t(sig, axioms, true, goal, b);
  switch (t.run()) {
    case detail::Tableau::Result::Closed: return {TableauOutcome::Kind::Closed, t.trace(), {}};
    case detail::Tableau::Result::Open: return {TableauOutcome::Kind::Open, {}, "open saturated branch"};
    case detail::Tableau::Result::Exhausted: return {TableauOutcome::Kind::Exhausted, {}, t.reason()};
  }
  return {};
}

/// Proof search, first without premises and then with all axioms; on failure
/// a countermodel of size up to `countermodel_max_size` is searched for.
inline Verdict tableau_prove(const std::vector<Formula>& axioms, const Formula& goal, const Signature& sig,
                             const ProverBounds& b = {}) {
  TableauOutcome bare = tableau_search({}, goal, sig, b);
  Verdict v;
  if (bare.kind == TableauOutcome::Kind::Closed) {
    v.kind = Verdict::Kind::Proved;
    v.trace = std::move(bare.trace);
    return v;
  }
  TableauOutcome full = axioms.empty() ? bare : tableau_search(axioms, goal, sig, b);
  if (full.kind == TableauOutcome::Kind::Closed) {
    v.kind = Verdict::Kind::Proved;
    v.trace = std::move(full.trace);
    return v;
  }
  if (auto cm = find_countermodel(axioms, goal, sig, b.countermodel_max_size)) {
    v.kind = Verdict::Kind::Refuted;
    v.countermodel = std::move(cm);
    return v;
  }
  v.reason = full.reason + "; no countermodel up to size " + std::to_string(b.countermodel_max_size);
  return v;
}

inline Verdict tableau_prove(const std::vector<Formula>& axioms, const Formula& goal, const ProverBounds& b = {}) {
  std::vector<Formula> all = axioms;
  all.push_back(goal);
  return tableau_prove(axioms, goal, infer_signature(all), b);
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

namespace detail {

/// Checks a trace line by line against the rules, sharing no state with the search.
class Replayer {
 public:
  Replayer(const std::string& trace, const std::vector<Formula>& premises, const Formula& goal, const Signature& sig)
      : premises_(premises), goal_(goal), sig_(sig) {
    std::istringstream in(trace);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines_.push_back(line);
    for (const auto& f : premises) note_names(f, reserved_);
    note_names(goal, reserved_);
  }

  /// Empty on success, otherwise the first problem found.
  std::string check() {
    try {
      if (lines_.empty() || lines_[0] != "biprism-trace 1") return "missing header";
      collect_parameters();
      pos_ = 1;
      Scope root;
      block(root, std::nullopt);
      if (pos_ != lines_.size()) fail("trailing lines");
      return {};
    } catch (const Error& e) {
      return "line " + std::to_string(pos_ + 1) + ": " + e.what();
    }
  }

 private:
  struct Scope {
    std::map<std::size_t, Formula> visible;
    std::set<std::string> names;
  };
  struct BetaExpect {
    std::size_t src, index;
    Formula f;
  };

  [[noreturn]] static void fail(const std::string& m) { throw Error(m); }

  static void note_names(const Formula& f, std::set<std::string>& out) {
    for (const auto& v : all_vars(f)) out.insert(v);
    for (const auto& c : constants_of(f)) out.insert(c);
  }

  static std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
  }

  static std::size_t number(const std::string& s) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
      fail("expected a number, got '" + s + "'");
    return std::stoul(s);
  }

  void collect_parameters() {
    ext_ = sig_;
    for (std::size_t i = 1; i < lines_.size(); ++i) {
      auto w = words(head(lines_[i]));
      if (w.size() >= 5 && w[0] == "node" && (w[2] == "gamma" || w[2] == "delta")) ext_.constants.insert(w[4]);
      if (w.size() >= 4 && w[0] == "node" && w[2] == "negated-goal" && w[3] != "-")
        for (const auto& [v, p] : mapping(w[3])) ext_.constants.insert(p);
    }
    for (const auto& [r, k] : ext_.relations)
      if (ext_.constants.count(r)) fail("parameter clashes with relation '" + r + "'");
  }

  static std::string head(const std::string& line) {
    auto at = line.find(" : ");
    return at == std::string::npos ? line : line.substr(0, at);
  }

  static std::vector<std::pair<std::string, std::string>> mapping(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) fail("bad goal mapping '" + item + "'");
      out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
  }

  const Formula& source(const Scope& s, const std::string& tok) {
    auto it = s.visible.find(number(tok));
    if (it == s.visible.end()) fail("node " + tok + " is not on this branch");
    return it->second;
  }

  void node(Scope& s, const std::vector<std::string>& w, const Formula& f, const std::optional<BetaExpect>& beta) {
    const std::string& rule = w[2];
    auto need = [&](std::size_t n) {
      if (w.size() != n) fail("wrong number of fields for rule '" + rule + "'");
    };
    if (rule == "premise") {
      need(4);
      std::size_t k = number(w[3]);
      if (k >= premises_.size() || !(premises_[k] == f)) fail("premise mismatch");
    } else if (rule == "negated-goal") {
      need(4);
      Substitution m;
      if (w[3] != "-")
        for (const auto& [v, p] : mapping(w[3])) {
          if (reserved_.count(p) || sig_.has_constant(p) || s.names.count(p)) fail("goal parameter '" + p + "' not fresh");
          m[v] = cst(p);
        }
      std::set<std::string> mapped;
      for (const auto& [v, t] : m) mapped.insert(v);
      if (mapped != free_vars(goal_)) fail("goal mapping does not cover the free variables");
      if (!(f == neg(substitute(goal_, m)))) fail("negated goal mismatch");
    } else if (rule == "nnf") {
      need(4);
      if (!(f == to_nnf(source(s, w[3])))) fail("not the negation normal form of node " + w[3]);
    } else if (rule == "alpha") {
      need(4);
      const Formula& src = source(s, w[3]);
      if (src.kind() != FK::And) fail("alpha source is not a conjunction");
      auto parts = flatten(src, FK::And);
      if (std::find(parts.begin(), parts.end(), f) == parts.end()) fail("not a conjunct of node " + w[3]);
    } else if (rule == "gamma") {
      need(5);
      const Formula& src = source(s, w[3]);
      if (src.kind() != FK::ForAll) fail("gamma source is not universal");
      if (!ext_.has_constant(w[4])) fail("unknown instance term '" + w[4] + "'");
      if (!(f == substitute(src.body(), {{src.var(), cst(w[4])}}))) fail("wrong universal instance");
    } else if (rule == "delta") {
      need(5);
      const Formula& src = source(s, w[3]);
      if (src.kind() != FK::Exists) fail("delta source is not existential");
      const std::string& p = w[4];
      if (reserved_.count(p) || sig_.has_constant(p) || s.names.count(p)) fail("parameter '" + p + "' not fresh");
      if (!(f == substitute(src.body(), {{src.var(), cst(p)}}))) fail("wrong existential witness");
    } else if (rule == "beta") {
      need(5);
      if (!beta || beta->src != number(w[3]) || beta->index != number(w[4]) || !(beta->f == f))
        fail("unexpected beta node");
    } else {
      fail("unknown rule '" + rule + "'");
    }
    if (rule != "beta" && beta) fail("branch must start with its beta node");
  }

  static bool contradictory(const std::vector<Formula>& lits) {
    std::map<std::string, std::string> parent;
    std::function<std::string(const std::string&)> find = [&](const std::string& a) -> std::string {
      auto it = parent.find(a);
      if (it == parent.end() || it->second == a) return a;
      return it->second = find(it->second);
    };
    for (const auto& l : lits)
      if (l.kind() == FK::Equal) {
        std::string a = find(l.terms()[0].name), b = find(l.terms()[1].name);
        if (a != b) parent[a] = b;
      }
    auto canon = [&](const Formula& a) {
      std::vector<std::string> out;
      for (const auto& t : a.terms()) out.push_back(find(t.name));
      return out;
    };
    for (const auto& l : lits) {
      if (l.kind() == FK::False) return true;
      if (l.kind() != FK::Not) continue;
      const Formula& a = l.body();
      if (a.kind() == FK::Equal && find(a.terms()[0].name) == find(a.terms()[1].name)) return true;
      if (a.kind() == FK::Rel)
        for (const auto& m : lits)
          if (m.kind() == FK::Rel && m.symbol() == a.symbol() && canon(m) == canon(a)) return true;
    }
    return false;
  }

  void block(Scope& s, std::optional<BetaExpect> beta) {
    while (pos_ < lines_.size()) {
      const std::string& line = lines_[pos_];
      auto w = words(head(line));
      if (w.empty()) fail("blank item");
      if (w[0] == "node") {
        if (w.size() < 3) fail("short node line");
        auto at = line.find(" : ");
        if (at == std::string::npos) fail("node without formula");
        std::size_t id = number(w[1]);
        if (!ids_.insert(id).second) fail("duplicate node id");
        Formula f = parse_formula(line.substr(at + 3), ext_);
        node(s, w, f, beta);
        beta.reset();
        s.visible.emplace(id, f);
        note_names(f, s.names);
        ++pos_;
        continue;
      }
      if (beta) fail("branch must start with its beta node");
      if (w[0] == "close") {
        std::vector<Formula> lits;
        for (std::size_t i = 1; i < w.size(); ++i) {
          const Formula& f = source(s, w[i]);
          if (!(f.is_atom() || (f.kind() == FK::Not && f.body().is_atom()))) fail("close on a non-literal");
          lits.push_back(f);
        }
        if (!contradictory(lits)) fail("closing literals are consistent");
        ++pos_;
        return;
      }
      if (w[0] == "split") {
        if (w.size() != 3) fail("bad split line");
        const Formula& src = source(s, w[1]);
        if (src.kind() != FK::Or) fail("split source is not a disjunction");
        auto parts = flatten(src, FK::Or);
        if (parts.size() != number(w[2])) fail("split arity mismatch");
        std::size_t src_id = number(w[1]);
        ++pos_;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          if (pos_ >= lines_.size() || lines_[pos_] != "branch " + std::to_string(i)) fail("expected branch " + std::to_string(i));
          ++pos_;
          Scope child = s;
          block(child, BetaExpect{src_id, i, parts[i]});
          if (pos_ >= lines_.size() || lines_[pos_] != "end") fail("expected end");
          ++pos_;
        }
        return;
      }
      fail("unexpected item '" + w[0] + "'");
    }
    fail("block ends without close or split");
  }

  std::vector<std::string> lines_;
  std::vector<Formula> premises_;
  Formula goal_;
  Signature sig_, ext_;
  std::set<std::string> reserved_;
  std::set<std::size_t> ids_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Empty if `trace` is a closed tableau for premises + !goal, otherwise the first error.
inline std::string replay_error(const std::string& trace, const std::vector<Formula>& premises, const Formula& goal,
                                const Signature& sig) {
  return detail::Replayer(trace, premises, goal, sig).check();
}

inline bool replays(const std::string& trace, const std::vector<Formula>& premises, const Formula& goal,
                    const Signature& sig) {
  return replay_error(trace, premises, goal, sig).empty();
}

}  // namespace biprism
