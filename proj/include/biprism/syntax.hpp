#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "biprism/logic.hpp"

namespace biprism {

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& msg, std::size_t pos)
      : Error("syntax error at " + std::to_string(pos) + ": " + msg), position(pos) {}
  std::size_t position;
};

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace detail {

// Binding strength: <-> 1, -> 2, | 3, & 4, unary and atoms 5, quantifiers 0.
inline int precedence(const Formula& f) {
  switch (f.kind()) {
    case FK::Iff: return 1;
    case FK::Implies: return 2;
    case FK::Or: return 3;
    case FK::And: return 4;
    case FK::ForAll:
    case FK::Exists: return 0;
    default: return 5;
  }
}

inline void render_to(std::string& out, const Formula& f);

inline void render_term(std::string& out, const Term& t) { out += t.name; }

inline void render_operand(std::string& out, const Formula& child, const Formula& parent, bool left) {
  int pc = precedence(child), pp = precedence(parent);
  bool paren = pc < pp || child.is_quantifier();
  if (pc == pp) {
    if (parent.kind() == FK::Iff) paren = true;
    else if (parent.kind() == FK::Implies) paren = left;
    else paren = !left;
  }
  if (paren) out += '(';
  render_to(out, child);
  if (paren) out += ')';
}

inline void render_to(std::string& out, const Formula& f) {
  switch (f.kind()) {
    case FK::True: out += "true"; return;
    case FK::False: out += "false"; return;
    case FK::Equal:
      render_term(out, f.terms()[0]);
      out += " = ";
      render_term(out, f.terms()[1]);
      return;
    case FK::Rel:
      out += f.symbol();
      out += '(';
      for (std::size_t i = 0; i < f.terms().size(); ++i) {
        if (i) out += ", ";
        render_term(out, f.terms()[i]);
      }
      out += ')';
      return;
    case FK::Not: {
      const Formula& b = f.body();
      bool bare = b.kind() == FK::Rel || b.kind() == FK::True || b.kind() == FK::False || b.kind() == FK::Not;
      out += '!';
      if (!bare) out += '(';
      render_to(out, b);
      if (!bare) out += ')';
      return;
    }
    case FK::And:
    case FK::Or:
    case FK::Implies:
    case FK::Iff: {
      const char* op = f.kind() == FK::And ? " & " : f.kind() == FK::Or ? " | " : f.kind() == FK::Implies ? " -> " : " <-> ";
      render_operand(out, f.lhs(), f, true);
      out += op;
      render_operand(out, f.rhs(), f, false);
      return;
    }
    case FK::ForAll:
    case FK::Exists:
      out += f.kind() == FK::ForAll ? "forall " : "exists ";
      out += f.var();
      out += ". ";
      render_to(out, f.body());
      return;
  }
}

}  // namespace detail

/// Concrete ASCII syntax; parse_formula(render_formula(f)) == f.
inline std::string render_formula(const Formula& f) {
  std::string out;
  detail::render_to(out, f);
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Formula& f) { return os << render_formula(f); }

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const Signature& sig) : text_(text), sig_(sig) {}

  Formula parse() {
    Formula f = parse_iff();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string peek_ident() {
    skip_ws();
    std::size_t p = pos_;
    if (p >= text_.size() || !ident_start(text_[p])) return {};
    while (p < text_.size() && ident_char(text_[p])) ++p;
    return std::string(text_.substr(pos_, p - pos_));
  }

  std::string ident() {
    std::string id = peek_ident();
    if (id.empty()) fail("expected identifier");
    pos_ += id.size();
    return id;
  }

  bool accept_keyword(std::string_view kw) {
    if (peek_ident() == kw) {
      pos_ += kw.size();
      return true;
    }
    return false;
  }

  static bool is_keyword(const std::string& s) {
    return s == "true" || s == "false" || s == "forall" || s == "exists";
  }

  Formula parse_iff() {
    Formula f = parse_implies();
    while (accept("<->")) f = iff(f, parse_implies());
    return f;
  }

  Formula parse_implies() {
    Formula f = parse_or();
    if (accept("->")) return implies(f, parse_implies());
    return f;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept("|")) f = disj(f, parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_unary();
    while (accept("&")) f = conj(f, parse_unary());
    return f;
  }

  std::string bound_var() {
    std::size_t at = pos_;
    std::string v = ident();
    if (is_keyword(v)) {
      pos_ = at;
      fail("keyword used as variable");
    }
    if (sig_.has_constant(v) || sig_.has_relation(v)) {
      pos_ = at;
      fail("signature symbol '" + v + "' used as bound variable");
    }
    return v;
  }

  Formula parse_unary() {
    skip_ws();
    if (accept("!")) return neg(parse_unary());
    if (accept("(")) {
      Formula f = parse_iff();
      expect(")");
      return f;
    }
    if (accept_keyword("forall")) {
      std::string v = bound_var();
      expect(".");
      return forall(v, parse_iff());
    }
    if (accept_keyword("exists")) {
      if (accept(">=")) {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected count after 'exists>='");
        std::size_t n = std::stoul(std::string(text_.substr(start, pos_ - start)));
        std::string v = bound_var();
        expect(".");
        return expand_counting(n, v, parse_iff());
      }
      std::string v = bound_var();
      expect(".");
      return exists(v, parse_iff());
    }
    if (accept_keyword("true")) return top();
    if (accept_keyword("false")) return bottom();
    return parse_atom();
  }

  Term term_from(const std::string& name, std::size_t at) {
    if (sig_.has_constant(name)) return cst(name);
    if (sig_.has_relation(name)) {
      pos_ = at;
      fail("relation symbol '" + name + "' used as a term");
    }
    if (is_keyword(name)) {
      pos_ = at;
      fail("keyword used as a term");
    }
    return var(name);
  }

  Term parse_term() {
    skip_ws();
    std::size_t at = pos_;
    return term_from(ident(), at);
  }

  Formula parse_atom() {
    skip_ws();
    std::size_t at = pos_;
    std::string name = ident();
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      if (!sig_.has_relation(name)) {
        pos_ = at;
        throw SignatureError("unknown relation symbol '" + name + "' at " + std::to_string(at));
      }
      ++pos_;
      std::vector<Term> args;
      if (!accept(")")) {
        args.push_back(parse_term());
        while (accept(",")) args.push_back(parse_term());
        expect(")");
      }
      if (args.size() != sig_.arity(name))
        throw SignatureError("arity mismatch for '" + name + "' at " + std::to_string(at) + ": expected " +
                             std::to_string(sig_.arity(name)) + ", got " + std::to_string(args.size()));
      return rel(name, std::move(args));
    }
    Term lhs = term_from(name, at);
    // "x = y" but not "x <->" etc.
    if (!accept("=")) fail("expected '=' after term");
    return eq(lhs, parse_term());
  }

  std::string_view text_;
  const Signature& sig_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the ASCII formula grammar. Identifiers that are constants of `sig`
/// become constant terms; all other term identifiers are variables.
inline Formula parse_formula(std::string_view text, const Signature& sig = {}) {
  return detail::Parser(text, sig).parse();
}

// ---------------------------------------------------------------------------
// Signature files
// ---------------------------------------------------------------------------

/// Lines `name NAME`, `relation NAME/ARITY`, `constant NAME`; `#` starts a comment.
inline Signature parse_signature(std::string_view text) {
  Signature sig;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string kw, arg, extra;
    if (!(ls >> kw)) continue;
    if (!(ls >> arg) || (ls >> extra)) throw SyntaxError("malformed signature line " + std::to_string(lineno), lineno);
    if (kw == "name") {
      sig.name = arg;
    } else if (kw == "constant") {
      if (sig.constants.count(arg) || sig.relations.count(arg))
        throw SignatureError("duplicate symbol '" + arg + "'");
      sig.constants.insert(arg);
    } else if (kw == "relation") {
      auto slash = arg.find('/');
      if (slash == std::string::npos) throw SyntaxError("expected NAME/ARITY on line " + std::to_string(lineno), lineno);
      std::string r = arg.substr(0, slash);
      std::size_t k = 0;
      try {
        k = std::stoul(arg.substr(slash + 1));
      } catch (const std::exception&) {
        throw SyntaxError("bad arity on line " + std::to_string(lineno), lineno);
      }
      if (sig.constants.count(r) || sig.relations.count(r)) throw SignatureError("duplicate symbol '" + r + "'");
      sig.relations[r] = k;
    } else {
      throw SyntaxError("unknown keyword '" + kw + "' on line " + std::to_string(lineno), lineno);
    }
  }
  sig.validate();
  return sig;
}

inline std::string render_signature(const Signature& sig) {
  std::string out;
  if (!sig.name.empty()) out += "name " + sig.name + "\n";
  for (const auto& [r, k] : sig.relations) out += "relation " + r + "/" + std::to_string(k) + "\n";
  for (const auto& c : sig.constants) out += "constant " + c + "\n";
  return out;
}

}  // namespace biprism
