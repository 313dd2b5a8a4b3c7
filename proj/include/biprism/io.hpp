#pragma once

// JSON file formats for signatures, schemes, structures, theories and reports.
//
// Scheme:    {"name", "source", "target", "dim", "delta", "epsilon", "relations": {R: f}, "constants": {c: f}}
//            source/target are an inline signature or a path to a signature file;
//            epsilon is a formula or "componentwise" (the default).
// Signature: {"name", "relations": {R: k}, "constants": [c, ...]}
// Structure: {"signature", "size", "constants": {c: e}, "relations": {R: [[...], ...]}}
// Theory:    {"name", "signature", "axioms": [f, ...], "schemas": ["... {n} ..."]}
//            each schema is instantiated by replacing {n} with 1, 2, ...

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "biprism/interpretation.hpp"
#include "biprism/logic.hpp"
#include "biprism/report.hpp"
#include "biprism/structure.hpp"
#include "biprism/syntax.hpp"

namespace biprism::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

class InputError : public Error {
 public:
  using Error::Error;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw InputError("'" + p.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

inline json signature_to_json(const Signature& s) {
  json j;
  j["name"] = s.name;
  j["relations"] = json::object();
  for (const auto& [r, k] : s.relations) j["relations"][r] = k;
  j["constants"] = json::array();
  for (const auto& c : s.constants) j["constants"].push_back(c);
  return j;
}

/// Inline object, or a path (relative to `base`) to a JSON or line-format signature file.
inline Signature signature_from_json(const json& j, const fs::path& base = {}) {
  try {
    if (j.is_string()) {
      fs::path p = base / j.get<std::string>();
      std::string text = read_file(p);
      auto first = text.find_first_not_of(" \t\r\n");
      if (first != std::string::npos && text[first] == '{') return signature_from_json(json::parse(text), p.parent_path());
      return parse_signature(text);
    }
    Signature s;
    s.name = j.value("name", "");
    if (j.contains("relations"))
      for (const auto& [r, k] : j.at("relations").items()) s.relations[r] = k.get<std::size_t>();
    if (j.contains("constants"))
      for (const auto& c : j.at("constants")) s.constants.insert(c.get<std::string>());
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad signature: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Schemes
// ---------------------------------------------------------------------------

inline json scheme_to_json(const TranslationScheme& s) {
  json j;
  j["name"] = s.name;
  j["source"] = signature_to_json(s.source);
  j["target"] = signature_to_json(s.target);
  j["dim"] = s.dim;
  j["delta"] = render_formula(s.delta);
  j["epsilon"] = s.epsilon ? json(render_formula(*s.epsilon)) : json("componentwise");
  j["relations"] = json::object();
  for (const auto& [r, f] : s.relations) j["relations"][r] = render_formula(f);
  j["constants"] = json::object();
  for (const auto& [c, f] : s.constants) j["constants"][c] = render_formula(f);
  return j;
}

inline TranslationScheme scheme_from_json(const json& j, const fs::path& base = {}) {
  try {
    TranslationScheme s;
    s.name = j.value("name", "");
    s.source = signature_from_json(j.at("source"), base);
    s.target = signature_from_json(j.at("target"), base);
    s.dim = j.value("dim", std::size_t{1});
    s.delta = parse_formula(j.value("delta", std::string("true")), s.target);
    std::string eps = j.value("epsilon", std::string("componentwise"));
    if (eps != "componentwise") s.epsilon = parse_formula(eps, s.target);
    if (j.contains("relations"))
      for (const auto& [r, f] : j.at("relations").items()) s.relations[r] = parse_formula(f.get<std::string>(), s.target);
    if (j.contains("constants"))
      for (const auto& [c, f] : j.at("constants").items()) s.constants[c] = parse_formula(f.get<std::string>(), s.target);
    s.check_shape();
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad scheme: ") + e.what());
  }
}

inline TranslationScheme load_scheme(const fs::path& p) { return scheme_from_json(read_json(p), p.parent_path()); }

// ---------------------------------------------------------------------------
// Structures
// ---------------------------------------------------------------------------

inline json structure_to_json(const FiniteStructure& A) {
  json j;
  j["signature"] = signature_to_json(A.signature());
  j["size"] = A.size();
  j["constants"] = json::object();
  for (const auto& [c, e] : A.constants()) j["constants"][c] = e;
  j["relations"] = json::object();
  for (const auto& [r, ts] : A.relations()) {
    json arr = json::array();
    for (const auto& t : ts) arr.push_back(t);
    j["relations"][r] = arr;
  }
  return j;
}

/// Without a "signature" field the signature is read off the constants and relations.
inline FiniteStructure structure_from_json(const json& j, const fs::path& base = {}) {
  try {
    std::map<std::string, Element> consts;
    std::map<std::string, std::set<Tuple>> rels;
    if (j.contains("constants"))
      for (const auto& [c, e] : j.at("constants").items()) consts[c] = e.get<Element>();
    if (j.contains("relations"))
      for (const auto& [r, arr] : j.at("relations").items())
        for (const auto& t : arr) rels[r].insert(t.get<Tuple>());
    Signature sig;
    if (j.contains("signature")) {
      sig = signature_from_json(j.at("signature"), base);
    } else {
      for (const auto& [c, e] : consts) sig.constants.insert(c);
      for (const auto& [r, ts] : rels) {
        if (ts.empty()) throw InputError("cannot infer the arity of empty relation '" + r + "'; give a signature");
        sig.relations[r] = ts.begin()->size();
      }
    }
    return FiniteStructure(sig, j.at("size").get<std::size_t>(), rels, consts);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad structure: ") + e.what());
  }
}

inline FiniteStructure load_structure(const fs::path& p) { return structure_from_json(read_json(p), p.parent_path()); }

// ---------------------------------------------------------------------------
// Theories
// ---------------------------------------------------------------------------

inline SchemaTheory theory_from_json(const json& j, const fs::path& base = {}) {
  try {
    SchemaTheory t;
    t.name = j.value("name", "");
    t.signature = signature_from_json(j.at("signature"), base);
    if (j.contains("axioms"))
      for (const auto& a : j.at("axioms")) {
        Formula f = parse_formula(a.get<std::string>(), t.signature);
        if (!is_sentence(f)) throw InputError("axiom is not a sentence: " + a.get<std::string>());
        t.axioms.push_back(f);
      }
    if (j.contains("schemas"))
      for (const auto& sc : j.at("schemas")) {
        std::string text = sc.get<std::string>();
        if (text.find("{n}") == std::string::npos) throw InputError("schema without {n}: " + text);
        Signature sig = t.signature;
        auto inst = [text, sig](std::size_t n) {
          std::string s = text;
          for (auto at = s.find("{n}"); at != std::string::npos; at = s.find("{n}"))
            s.replace(at, 3, std::to_string(n));
          return parse_formula(s, sig);
        };
        Formula probe = inst(1);
        if (!is_sentence(probe)) throw InputError("schema instance is not a sentence: " + text);
        t.schemas.push_back({text, inst});
      }
    return t;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad theory: ") + e.what());
  }
}

inline SchemaTheory load_theory(const fs::path& p) { return theory_from_json(read_json(p), p.parent_path()); }

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline Status status_from_string(const std::string& s) {
  for (Status st : {Status::Pass, Status::Fail, Status::Unknown, Status::Skip})
    if (s == to_string(st)) return st;
  throw InputError("unknown status '" + s + "'");
}

inline json report_to_json(const Report& r) {
  json j;
  j["title"] = r.title;
  j["overall"] = to_string(r.overall());
  j["entries"] = json::array();
  for (const auto& e : r.entries)
    j["entries"].push_back({{"check", e.check}, {"status", to_string(e.status)}, {"detail", e.detail}, {"witness", e.witness}});
  return j;
}

inline Report report_from_json(const json& j) {
  try {
    Report r;
    r.title = j.value("title", "");
    for (const auto& e : j.at("entries"))
      r.entries.push_back({e.at("check").get<std::string>(), status_from_string(e.at("status").get<std::string>()),
                           e.value("detail", ""), e.value("witness", "")});
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad report: ") + e.what());
  }
}

}  // namespace biprism::io
