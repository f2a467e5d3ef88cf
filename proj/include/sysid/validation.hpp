#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sysid/linalg.hpp"

namespace sysid {

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// Pointwise identity between the likelihood-times-prior product and its
/// posterior-times-predictive factorization, on random (y, x, A, V, M, K, Q, n)
/// tuples. Errors are absolute differences of log densities.
CheckResult check_conjugate_factorization(int tuples, int d, int m, std::uint64_t seed,
                                          double tolerance = 1e-8);

/// Closed-form joint entropy against a nested Monte-Carlo estimate
/// (V draws, then A | V), d in {1, 2}, m up to 3. Errors are relative.
CheckResult check_joint_entropy_mc(int draws, std::uint64_t seed, double tolerance = 0.03);

/// Monte-Carlo estimates of E ln|Q + (y - mu) gamma (y - mu)'| under the
/// matrix-T with location mu and precision gamma must not depend on mu or
/// gamma. Errors are pairwise mean differences in combined standard errors.
CheckResult check_predicted_logdet_invariance(int draws, std::uint64_t seed,
                                              double tolerance = 3.0);

std::vector<CheckResult> run_analytic_checks(std::uint64_t seed);

}  // namespace sysid
