#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "heattrace/verify.hpp"

namespace heattrace {

namespace {

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Info: return "info";
  }
  return "fail";
}

}  // namespace

bool SuiteReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

void SuiteReport::append(const SuiteReport& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

void SuiteReport::sort() {
  std::stable_sort(checks.begin(), checks.end(), [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
}

std::string report_json(const SuiteReport& report, bool with_timing) {
  nlohmann::ordered_json doc;
  doc["suite"] = report.suite;
  doc["passed"] = report.passed();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const CheckResult& c : report.checks) {
    nlohmann::ordered_json entry;
    entry["name"] = c.name;
    entry["anchor"] = c.anchor;
    entry["status"] = status_name(c.status);
    entry["measured"] = c.measured;
    entry["tolerance"] = c.tolerance;
    if (with_timing) entry["runtime_seconds"] = c.runtime_seconds;
    if (!c.detail.empty()) entry["detail"] = c.detail;
    list.push_back(std::move(entry));
  }
  doc["checks"] = std::move(list);
  return doc.dump(2) + "\n";
}

std::string report_table(const SuiteReport& report) {
  std::size_t width = 5;
  for (const CheckResult& c : report.checks) width = std::max(width, c.name.size());
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %-6s  %12s  %12s  %9s\n", static_cast<int>(width), "check", "status",
                "measured", "tolerance", "time [s]");
  out << line;
  for (const CheckResult& c : report.checks) {
    std::snprintf(line, sizeof line, "%-*s  %-6s  %12.4e  %12.4e  %9.3f\n", static_cast<int>(width), c.name.c_str(),
                  status_name(c.status), c.measured, c.tolerance, c.runtime_seconds);
    out << line;
    if (c.status == CheckStatus::Fail && !c.detail.empty()) out << "    " << c.detail << "\n";
  }
  out << (report.passed() ? "PASS" : "FAIL") << "  " << report.suite << "\n";
  return out.str();
}

ProbeSampler::ProbeSampler(std::uint64_t seed) : engine_(seed) {}

// The engine's sequence is fixed by the standard; distributions are not, so
// the top 53 bits are mapped directly.
double ProbeSampler::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

}  // namespace heattrace
