// Test-only numerical oracles: quadrature, dense grid search, and
// distribution-free checks. Kept independent of the library code paths they
// are used to verify.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "sysid/linalg.hpp"

namespace oracles {

/// Tanh-sinh (double-exponential) quadrature on (a, b). Handles integrable
/// endpoint singularities; non-finite integrand values at the extreme nodes
/// are treated as zero.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-11, int max_level = 13) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double t_max = 4.0;
  const auto node = [&](double t, double& x, double& w) {
    const double s = std::numbers::pi / 2.0 * std::sinh(t);
    x = std::tanh(s);
    const double ch = std::cosh(s);
    w = std::numbers::pi / 2.0 * std::cosh(t) / (ch * ch);
  };
  double previous = std::numeric_limits<double>::quiet_NaN();
  double estimate = 0.0;
  int agreements = 0;
  for (int level = 2; level <= max_level; ++level) {
    const double h = std::pow(2.0, -level) * 4.0;
    const long n = static_cast<long>(std::ceil(t_max / h));
    double sum = 0.0;
    for (long k = -n; k <= n; ++k) {
      double x, w;
      node(k * h, x, w);
      const double fx = f(mid + half * x);
      if (std::isfinite(fx)) sum += w * fx;
    }
    estimate = sum * h * half;
    // Two consecutive level agreements guard against sparse coarse grids
    // missing a narrow peak.
    if (level >= 5 && std::abs(estimate - previous) <=
                          rel_tol * std::max(std::abs(estimate), 1e-12)) {
      if (++agreements >= 2) break;
    } else {
      agreements = 0;
    }
    previous = estimate;
  }
  return estimate;
}

inline double integrate_2d(const std::function<double(double, double)>& f, double ax,
                           double bx, double ay, double by, double rel_tol = 1e-9) {
  return integrate(
      [&](double x) {
        return integrate([&](double y) { return f(x, y); }, ay, by, rel_tol);
      },
      ax, bx, rel_tol);
}

struct GridResult {
  sysid::Vector u;
  double value = 0.0;
};

/// Dense scan of a scalar objective over a box or ball in c <= 2 dimensions.
inline GridResult grid_search(const std::function<double(const sysid::Vector&)>& f, int c,
                              double bound, bool ball, double resolution, bool maximize) {
  const double sign = maximize ? 1.0 : -1.0;
  GridResult best;
  best.value = -std::numeric_limits<double>::infinity();
  const long steps = static_cast<long>(std::llround(2.0 * bound / resolution));
  const auto consider = [&](const sysid::Vector& u) {
    const double value = sign * f(u);
    if (value > best.value) {
      best.value = value;
      best.u = u;
    }
  };
  if (c == 1) {
    sysid::Vector u(1);
    for (long i = 0; i <= steps; ++i) {
      u[0] = -bound + i * resolution;
      consider(u);
    }
  } else if (c == 2) {
    sysid::Vector u(2);
    for (long i = 0; i <= steps; ++i) {
      u[0] = -bound + i * resolution;
      for (long j = 0; j <= steps; ++j) {
        u[1] = -bound + j * resolution;
        if (ball && u.norm() > bound) continue;
        consider(u);
      }
    }
    if (ball) {
      // Sweep the circle as well; boundary optima need not sit on the grid.
      const long arc_steps = static_cast<long>(std::llround(
          2.0 * std::numbers::pi * bound / resolution));
      for (long k = 0; k <= arc_steps; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / arc_steps;
        u[0] = bound * std::cos(theta);
        u[1] = bound * std::sin(theta);
        consider(u);
      }
    }
  } else {
    throw std::invalid_argument("grid_search: only c <= 2 supported");
  }
  best.value *= sign;
  return best;
}

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Kolmogorov-Smirnov p-value against a reference CDF (asymptotic).
inline double ks_test_pvalue(std::vector<double> sample,
                             const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d_stat = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = cdf(sample[i]);
    d_stat = std::max(d_stat, std::abs(u - static_cast<double>(i) / n));
    d_stat = std::max(d_stat, std::abs(static_cast<double>(i + 1) / n - u));
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d_stat;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

struct BatchPosterior {
  sysid::Matrix M, K, Q;
  double n = 0.0;
};

/// One-shot normal-equation posterior, the order-free oracle for the
/// recursive update chain.
inline BatchPosterior batch_normal_equations(const sysid::Matrix& M0, const sysid::Matrix& K0,
                                             const sysid::Matrix& Q0, double n0,
                                             const std::vector<sysid::Vector>& X,
                                             const std::vector<sysid::Vector>& Y) {
  const long d = M0.rows(), m = M0.cols();
  sysid::Matrix xxt = sysid::Matrix::Zero(m, m);
  sysid::Matrix yxt = sysid::Matrix::Zero(d, m);
  sysid::Matrix yyt = sysid::Matrix::Zero(d, d);
  for (std::size_t i = 0; i < X.size(); ++i) {
    xxt += X[i] * X[i].transpose();
    yxt += Y[i] * X[i].transpose();
    yyt += Y[i] * Y[i].transpose();
  }
  BatchPosterior out;
  out.K = K0 + xxt;
  out.M = (M0 * K0 + yxt) * out.K.inverse();
  out.Q = Q0 + yyt + M0 * K0 * M0.transpose() - out.M * out.K * out.M.transpose();
  out.n = n0 + static_cast<double>(X.size());
  return out;
}

}  // namespace oracles
