#include "sysid/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sysid {

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: argument must be positive, got " + std::to_string(x));
  }
  double result = 0.0;
  // psi(x) = psi(x + 1) - 1/x until the asymptotic series is accurate.
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion with Bernoulli coefficients through x^-14.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv;
  double term = inv2;
  static constexpr double kBernoulli[] = {
      1.0 / 12.0,   -1.0 / 120.0,  1.0 / 252.0,  -1.0 / 240.0,
      1.0 / 132.0,  -691.0 / 32760.0, 1.0 / 12.0,
  };
  for (double coeff : kBernoulli) {
    series -= coeff * term;
    term *= inv2;
  }
  return result + series;
}

double log_multi_gamma(int d, double n) {
  if (d <= 0) throw std::domain_error("log_multi_gamma: d must be positive");
  if (!(n > d - 1)) {
    throw std::domain_error("log_multi_gamma: need n > d - 1, got n = " + std::to_string(n) +
                            ", d = " + std::to_string(d));
  }
  double sum = 0.25 * d * (d - 1) * std::log(std::numbers::pi);
  for (int i = 1; i <= d; ++i) {
    sum += std::lgamma(0.5 * (n + 1 - i));
  }
  return sum;
}

}  // namespace sysid
