#pragma once

// Verification suites. Each criterion is a self-contained, seeded
// experiment with a pass/fail verdict; the CLI's `verify` command and the
// acceptance test binary both run them from here.

#include <functional>
#include <string>
#include <vector>

namespace mtsim::tools {

struct CriterionResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::vector<std::string> details;
  double seconds = 0.0;
};

struct Criterion {
  std::string id;     // "1", "5a", ...
  std::string suite;  // verify suite name
  std::string title;
  std::function<CriterionResult()> run;
};

const std::vector<Criterion>& criteria();

/// Suite names in criterion order, followed by "all".
std::vector<std::string> suite_names();

/// Runs every criterion of `suite` ("all" runs everything). Throws
/// std::invalid_argument for an unknown suite.
std::vector<CriterionResult> run_suite(const std::string& suite);

/// Runs a single criterion by id.
CriterionResult run_criterion(const std::string& id);

/// "PASS [id] title (1.2 s)" followed by indented details.
std::string format_result(const CriterionResult& r);

}  // namespace mtsim::tools
