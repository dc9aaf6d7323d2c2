#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace pathflow {

struct CheckResult {
  std::string name;
  long instances = 0;
  double value = 0;       // worst error, or the statistic named by `relation`
  double tolerance = 0;
  std::string relation;   // "<", ">" or "<="
  bool passed = false;
  double seconds = 0;
};

struct VerificationOptions {
  long instances = 100;
  std::uint64_t seed = 20240601;
  /// Test hook: doubles every analytic target gradient before comparison.
  bool inject_gradient_fault = false;
};

/// Finite-difference checks of every hand-derived derivative, the oracle residual identity
/// and the Euler step-size trend. Pure apart from CPU time.
std::vector<CheckResult> run_verification(const VerificationOptions& options = {});

void print_verification_table(std::ostream& out, const std::vector<CheckResult>& results);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace pathflow
