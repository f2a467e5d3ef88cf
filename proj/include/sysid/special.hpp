#pragma once

namespace sysid {

/// Digamma function for x > 0, accurate to ~1e-12 (recurrence into the
/// asymptotic regime, then the Bernoulli series). Throws std::domain_error
/// for x <= 0.
double digamma(double x);

/// Log of the multivariate gamma normalizer:
///   d(d-1)/4 * ln(pi) + sum_{i=1..d} lnGamma((n + 1 - i)/2).
/// Requires n > d - 1 so every gamma argument is positive.
double log_multi_gamma(int d, double n);

}  // namespace sysid
