#pragma once

#include <string>
#include <vector>

namespace biprism {

enum class Status { Pass, Fail, Unknown, Skip };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Unknown: return "UNKNOWN";
    case Status::Skip: return "SKIP";
  }
  return "?";
}

struct ReportEntry {
  std::string check;
  Status status = Status::Pass;
  std::string detail;
  std::string witness;

  friend bool operator==(const ReportEntry&, const ReportEntry&) = default;
};

/// Named list of check results. Overall: FAIL if any entry fails, else
/// UNKNOWN if any is unknown, else PASS.
struct Report {
  std::string title;
  std::vector<ReportEntry> entries;

  void add(std::string check, Status s, std::string detail = {}, std::string witness = {}) {
    entries.push_back({std::move(check), s, std::move(detail), std::move(witness)});
  }
  void add(std::string check, bool ok, std::string detail = {}, std::string witness = {}) {
    add(std::move(check), ok ? Status::Pass : Status::Fail, std::move(detail), std::move(witness));
  }
  void append(const Report& other, const std::string& prefix = {}) {
    for (auto e : other.entries) {
      if (!prefix.empty()) e.check = prefix + e.check;
      entries.push_back(std::move(e));
    }
  }

  Status overall() const {
    bool unknown = false;
    for (const auto& e : entries) {
      if (e.status == Status::Fail) return Status::Fail;
      if (e.status == Status::Unknown) unknown = true;
    }
    return unknown ? Status::Unknown : Status::Pass;
  }
  bool passed() const { return overall() == Status::Pass; }

  /// First failing entry, or nullptr.
  const ReportEntry* first_failure() const {
    for (const auto& e : entries)
      if (e.status == Status::Fail) return &e;
    return nullptr;
  }

  std::string to_text() const {
    std::string out = title.empty() ? std::string() : title + "\n";
    for (const auto& e : entries) {
      out += std::string("  [") + to_string(e.status) + "] " + e.check;
      if (!e.detail.empty()) out += ": " + e.detail;
      if (!e.witness.empty()) out += " (witness: " + e.witness + ")";
      out += "\n";
    }
    out += std::string("overall: ") + to_string(overall()) + "\n";
    return out;
  }

  friend bool operator==(const Report&, const Report&) = default;
};

}  // namespace biprism
