#include "sysid/control.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sysid {

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  for (long i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

Vector box_vertex(std::uint64_t bits, int c, double bound) {
  Vector u(c);
  // Bit c-1-i drives coordinate i so ascending bit patterns enumerate
  // vertices in lexicographic order.
  for (int i = 0; i < c; ++i) {
    u[i] = ((bits >> (c - 1 - i)) & 1u) ? bound : -bound;
  }
  return u;
}

Vector box_maximize_enumerate(const ControlQuadratic& f, double bound, int c) {
  Vector best = box_vertex(0, c, bound);
  double best_value = f.value(best);
  const std::uint64_t count = std::uint64_t{1} << c;
  for (std::uint64_t k = 1; k < count; ++k) {
    const Vector u = box_vertex(k, c, bound);
    const double value = f.value(u);
    if (value > best_value) {
      best_value = value;
      best = u;
    }
  }
  return best;
}

Vector box_maximize_coordinate_ascent(const ControlQuadratic& f, double bound, int c) {
  Vector best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int start = 0; start < 8; ++start) {
    Rng rng(0x9e3779b97f4a7c15ULL + start);
    std::uniform_int_distribution<int> coin(0, 1);
    Vector u(c);
    for (int i = 0; i < c; ++i) u[i] = coin(rng) ? bound : -bound;
    bool changed = true;
    int sweeps = 0;
    while (changed && sweeps++ < 10 * c) {
      changed = false;
      for (int i = 0; i < c; ++i) {
        // Sign of the partial slope excluding the diagonal term decides the endpoint.
        const double g = f.q[i] + f.Puu.row(i).dot(u) - f.Puu(i, i) * u[i];
        const double target = g > 0 ? bound : -bound;
        if (target != u[i]) {
          u[i] = target;
          changed = true;
        }
      }
    }
    const double value = f.value(u);
    if (value > best_value || (value == best_value && lex_less(u, best))) {
      best_value = value;
      best = u;
    }
  }
  return best;
}

// Maximize on the sphere ||u|| = bound through the eigenbasis secular equation
// (mu I - Lambda) w = p with mu >= lambda_max.
Vector ball_maximize(const ControlQuadratic& f, double bound, int c) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(f.Puu));
  const Vector lambda = eig.eigenvalues();
  const Matrix basis = eig.eigenvectors();
  const Vector p = basis.transpose() * f.q;
  const double lambda_max = lambda.maxCoeff();

  const auto norm2_at = [&](double mu) {
    double sum = 0.0;
    for (int i = 0; i < c; ++i) {
      const double denom = mu - lambda[i];
      if (denom > 0.0) sum += (p[i] * p[i]) / (denom * denom);
    }
    return sum;
  };

  // Components in the top eigenspace decide between the regular and the
  // degenerate (filler) case.
  const double top_tol = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  double off_top_norm2 = 0.0;
  bool top_has_p = false;
  for (int i = 0; i < c; ++i) {
    if (lambda_max - lambda[i] <= top_tol) {
      if (std::abs(p[i]) > 1e-14 * std::max(1.0, f.q.norm())) top_has_p = true;
    } else {
      const double denom = lambda_max - lambda[i];
      off_top_norm2 += (p[i] * p[i]) / (denom * denom);
    }
  }

  Vector w(c);
  if (top_has_p || off_top_norm2 >= bound * bound) {
    double lo = lambda_max, hi = lambda_max + std::max(f.q.norm() / bound, 1e-8);
    while (norm2_at(hi) > bound * bound) hi = lambda_max + 2.0 * (hi - lambda_max);
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (norm2_at(mid) > bound * bound)
        lo = mid;
      else
        hi = mid;
    }
    const double mu = 0.5 * (lo + hi);
    for (int i = 0; i < c; ++i) w[i] = p[i] / (mu - lambda[i]);
  } else {
    // Degenerate case: fill the remaining norm along one top eigendirection.
    for (int i = 0; i < c; ++i) {
      const double denom = lambda_max - lambda[i];
      w[i] = denom > top_tol ? p[i] / denom : 0.0;
    }
    int top_index = 0;
    for (int i = 0; i < c; ++i) {
      if (lambda_max - lambda[i] <= top_tol) {
        top_index = i;
        break;
      }
    }
    const double filler = std::sqrt(std::max(0.0, bound * bound - w.squaredNorm()));
    Vector w_plus = w, w_minus = w;
    w_plus[top_index] += filler;
    w_minus[top_index] -= filler;
    const Vector u_plus = basis * w_plus;
    const Vector u_minus = basis * w_minus;
    return lex_less(u_minus, u_plus) ? u_minus : u_plus;
  }
  return basis * w;
}

Vector box_minimize(const ControlQuadratic& f, double bound, int c, const Vector& interior) {
  Vector u = interior.cwiseMax(-bound).cwiseMin(bound);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double max_delta = 0.0;
    for (int i = 0; i < c; ++i) {
      const double g = f.q[i] + f.Puu.row(i).dot(u) - f.Puu(i, i) * u[i];
      const double target = std::clamp(-g / f.Puu(i, i), -bound, bound);
      max_delta = std::max(max_delta, std::abs(target - u[i]));
      u[i] = target;
    }
    if (max_delta < 1e-13 * std::max(1.0, bound)) break;
  }
  return u;
}

Vector ball_minimize(const ControlQuadratic& f, double bound, int c, const Vector& interior) {
  if (interior.norm() <= bound) return interior;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(f.Puu));
  const Vector lambda = eig.eigenvalues();
  const Matrix basis = eig.eigenvectors();
  const Vector p = basis.transpose() * f.q;
  const auto norm2_at = [&](double mu) {
    double sum = 0.0;
    for (int i = 0; i < c; ++i) {
      const double denom = lambda[i] + mu;
      sum += (p[i] * p[i]) / (denom * denom);
    }
    return sum;
  };
  // ||u(mu)|| is strictly decreasing in mu and exceeds bound at mu = 0.
  double lo = 0.0, hi = std::max(f.q.norm() / bound, 1e-8);
  while (norm2_at(hi) > bound * bound) hi *= 2.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (norm2_at(mid) > bound * bound)
      lo = mid;
    else
      hi = mid;
  }
  const double mu = 0.5 * (lo + hi);
  Vector w(c);
  for (int i = 0; i < c; ++i) w[i] = -p[i] / (lambda[i] + mu);
  return basis * w;
}

}  // namespace

void ControlDomain::validate() const {
  if (!(bound > 0.0)) throw std::invalid_argument("ControlDomain: bound must be positive");
}

bool ControlDomain::contains(const Vector& u, double tol) const {
  switch (kind) {
    case DomainKind::Box:
      return u.cwiseAbs().maxCoeff() <= bound + tol;
    case DomainKind::Ball:
      return u.norm() <= bound + tol;
  }
  return false;
}

void StrategySpec::validate() const {
  domain.validate();
  if ((kind == StrategyKind::TauInfomax || kind == StrategyKind::TauZero) && tau < 0)
    throw std::invalid_argument("StrategySpec: tau must be >= 0");
}

double quadratic_form(const PosteriorState& s, const Vector& x) {
  if (x.size() != s.m()) throw std::invalid_argument("quadratic_form: regressor size mismatch");
  return x.dot(s.precision_inverse() * x);
}

ControlQuadratic control_quadratic(const PosteriorState& s, const History& h) {
  const long c = h.u_buffer.empty() ? s.m() - static_cast<long>(h.r_buffer.size()) *
                                                 h.r_buffer.front().size()
                                    : h.u_buffer.front().size();
  if (c <= 0) throw std::invalid_argument("control_quadratic: no control slots in regressor");
  const Vector x0 = build_regressor(h, Vector::Zero(c));
  if (x0.size() != s.m())
    throw std::invalid_argument("control_quadratic: history/state dimension mismatch");
  const Matrix& p = s.precision_inverse();
  ControlQuadratic f;
  f.c0 = x0.dot(p * x0);
  f.q = (p * x0).tail(c);
  f.Puu = symmetrized(p.bottomRightCorner(c, c));
  return f;
}

Vector maximize_quadratic(const ControlQuadratic& f, const ControlDomain& dom) {
  dom.validate();
  const int c = static_cast<int>(f.q.size());
  switch (dom.kind) {
    case DomainKind::Box:
      return c <= 16 ? box_maximize_enumerate(f, dom.bound, c)
                     : box_maximize_coordinate_ascent(f, dom.bound, c);
    case DomainKind::Ball:
      return ball_maximize(f, dom.bound, c);
  }
  throw std::logic_error("maximize_quadratic: unknown domain kind");
}

Vector minimize_quadratic(const ControlQuadratic& f, const ControlDomain& dom) {
  dom.validate();
  const int c = static_cast<int>(f.q.size());
  const auto llt = spd_cholesky(f.Puu, "minimize_quadratic: Puu");
  const Vector interior = -llt.solve(f.q);
  switch (dom.kind) {
    case DomainKind::Box:
      if (interior.cwiseAbs().maxCoeff() <= dom.bound) return interior;
      return box_minimize(f, dom.bound, c, interior);
    case DomainKind::Ball:
      return ball_minimize(f, dom.bound, c, interior);
  }
  throw std::logic_error("minimize_quadratic: unknown domain kind");
}

Vector infomax_control(const PosteriorState& s, const History& h, const ControlDomain& dom) {
  return maximize_quadratic(control_quadratic(s, h), dom);
}

Vector noise_optimal_control(const PosteriorState& s, const History& h,
                             const ControlDomain& dom) {
  return minimize_quadratic(control_quadratic(s, h), dom);
}

Vector noise_optimal_control_alt(const PosteriorState& s, const History& h) {
  if (h.r_buffer.size() != 1 || !h.u_buffer.empty())
    throw std::invalid_argument("noise_optimal_control_alt: defined only for I = 0, J = 0");
  const long d = h.r_buffer.front().size();
  const long c = s.m() - d;
  if (c <= 0) throw std::invalid_argument("noise_optimal_control_alt: no control block");
  const Matrix& k = s.precision();
  const Matrix k_uu = k.bottomRightCorner(c, c);
  const Matrix k_uz = k.bottomLeftCorner(c, d);
  return spd_cholesky(k_uu, "noise_optimal_control_alt: K_uu").solve(k_uz *
                                                                     h.r_buffer.front());
}

Vector select_control(const StrategySpec& strat, const PosteriorState& s, const History& h,
                      long t, Rng& rng) {
  strat.validate();
  const auto control_dim = [&] {
    return h.u_buffer.empty()
               ? static_cast<int>(s.m() - static_cast<long>(h.r_buffer.size()) *
                                              h.r_buffer.front().size())
               : static_cast<int>(h.u_buffer.front().size());
  };
  const auto noise_control = [&] {
    if (!strat.alt_noise_formula) return noise_optimal_control(s, h, strat.domain);
    Vector u = noise_optimal_control_alt(s, h);
    // The block form ignores the domain; project back when it lands outside.
    if (strat.domain.kind == DomainKind::Box) {
      u = u.cwiseMax(-strat.domain.bound).cwiseMin(strat.domain.bound);
    } else if (u.norm() > strat.domain.bound) {
      u *= strat.domain.bound / u.norm();
    }
    return u;
  };
  switch (strat.kind) {
    case StrategyKind::Infomax:
      return infomax_control(s, h, strat.domain);
    case StrategyKind::NoiseOptimal:
      return noise_control();
    case StrategyKind::TauInfomax:
      return t < strat.tau ? infomax_control(s, h, strat.domain) : noise_control();
    case StrategyKind::TauZero:
      return t < strat.tau ? infomax_control(s, h, strat.domain)
                           : Vector::Zero(control_dim());
    case StrategyKind::Random:
      return sample_uniform_control(strat.domain, control_dim(), rng);
    case StrategyKind::Zero:
      return Vector::Zero(control_dim());
  }
  throw std::logic_error("select_control: unknown strategy kind");
}

Vector sample_uniform_control(const ControlDomain& dom, int c, Rng& rng) {
  dom.validate();
  switch (dom.kind) {
    case DomainKind::Box: {
      std::uniform_real_distribution<double> unif(-dom.bound, dom.bound);
      Vector u(c);
      for (int i = 0; i < c; ++i) u[i] = unif(rng);
      return u;
    }
    case DomainKind::Ball: {
      const Vector dir = sample_standard_normal(c, rng);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      const double radius = dom.bound * std::pow(unif(rng), 1.0 / c);
      const double norm = dir.norm();
      return norm > 0 ? Vector(dir * (radius / norm)) : Vector::Zero(c);
    }
  }
  throw std::logic_error("sample_uniform_control: unknown domain kind");
}

}  // namespace sysid
