#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dgnn {

inline constexpr std::string_view kVerifyScopes[] = {"tensor-autodiff", "atomic-graph", "backbone",
                                                     "variants",        "data-io",      "harness-cli"};

struct CheckResult {
  std::string scope;
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured error or mismatch count
  double tolerance = 0.0;  // pass when value <= tolerance
  std::string detail;
};

struct VerifyOptions {
  std::string scope = "all";  // "all" or one of kVerifyScopes
  std::uint64_t seed = 0;
  /// Negative control: adds one adsorbate-catalyst edge to the disconnected
  /// topology before the disconnection check runs.
  bool inject_cross_edge = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Runs the invariance, oracle and gradient-check suites of the selected scope
/// on freshly seeded random models and systems. Throws ValidationError for an
/// unknown scope.
VerifyReport run_verify(const VerifyOptions& options);

std::string format_verify_report(const VerifyReport& report);

}  // namespace dgnn
