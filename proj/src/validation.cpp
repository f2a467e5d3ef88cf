#include "sysid/validation.hpp"

#include <cmath>
#include <sstream>

#include "sysid/distributions.hpp"

namespace sysid {

CheckResult check_conjugate_factorization(int tuples, int d, int m, std::uint64_t seed,
                                          double tolerance) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> dof(d + 0.5, d + 4.0);
  double worst = 0.0;
  for (int trial = 0; trial < tuples; ++trial) {
    const Matrix A = sample_standard_normal_matrix(d, m, rng);
    const Matrix M = sample_standard_normal_matrix(d, m, rng);
    const Matrix V = random_spd(d, 0.3, 2.0, rng);
    const Matrix K = random_spd(m, 0.3, 2.0, rng);
    const Matrix Q = random_spd(d, 0.3, 2.0, rng);
    const double n = dof(rng);
    const Vector x = sample_standard_normal(m, rng);
    const Vector y = sample_standard_normal(d, rng);

    const double lhs = mvn_logpdf(y, A * x, V) + matrix_normal_logpdf(A, {M, V, K}) +
                       inverse_wishart_logpdf(V, {Q, n});

    const Matrix K_post = symmetrized(K + x * x.transpose());
    const auto llt = spd_cholesky(K_post, "factorization: xx' + K");
    const double gamma = 1.0 - x.dot(llt.solve(x));
    const Matrix M_post = (M * K + y * x.transpose()) * llt.solve(Matrix::Identity(m, m));
    const Vector residual = y - M * x;
    const Matrix Q_post = symmetrized(Q + gamma * residual * residual.transpose());
    const double rhs =
        matrix_normal_logpdf(A, {M_post, V, K_post}) +
        inverse_wishart_logpdf(V, {Q_post, n + 1}) +
        matrix_t_logpdf(y, {Q, n, M * x, Matrix::Constant(1, 1, gamma)});

    worst = std::max(worst, std::abs(lhs - rhs));
  }
  std::ostringstream detail;
  detail << tuples << " tuples at d=" << d << ", m=" << m;
  return {"conjugate-factorization-identity", worst, tolerance, worst < tolerance,
          detail.str()};
}

CheckResult check_joint_entropy_mc(int draws, std::uint64_t seed, double tolerance) {
  Rng rng(seed);
  double worst = 0.0;
  std::ostringstream detail;
  for (const auto& [d, m] : {std::pair{1, 2}, std::pair{2, 3}}) {
    const Matrix M = sample_standard_normal_matrix(d, m, rng);
    const Matrix K = random_spd(m, 0.4, 1.8, rng);
    const Matrix Q = random_spd(d, 0.4, 1.8, rng);
    const double n = d + 3.0;
    const double closed = entropy_joint_mniw(K, Q, d, m, n);

    double sum = 0.0;
    for (int i = 0; i < draws; ++i) {
      const Matrix V = sample_inverse_wishart({Q, n}, rng);
      const Matrix A = sample_matrix_normal({M, V, K}, rng);
      sum += matrix_normal_logpdf(A, {M, V, K}) + inverse_wishart_logpdf(V, {Q, n});
    }
    const double mc = -sum / draws;
    // Entropies can sit near zero; floor the denominator so the 3% criterion
    // compares against a one-nat scale rather than dividing by ~0.
    const double rel = std::abs(mc - closed) / std::max(std::abs(closed), 1.0);
    worst = std::max(worst, rel);
    detail << "(d=" << d << ",m=" << m << ": closed=" << closed << " mc=" << mc << ") ";
  }
  return {"joint-entropy-closed-form-vs-mc", worst, tolerance, worst < tolerance,
          detail.str()};
}

CheckResult check_predicted_logdet_invariance(int draws, std::uint64_t seed,
                                              double tolerance) {
  Rng outer_rng(seed);
  double worst = 0.0;
  std::ostringstream detail;
  for (int d : {1, 2}) {
    const Matrix Q = random_spd(d, 0.5, 1.5, outer_rng);
    const double n = d + 4.0;
    struct Cell {
      double mean, se;
    };
    std::vector<Cell> cells;
    int combo = 0;
    for (double mu_value : {0.0, 1.0, -3.0}) {
      for (double gamma : {0.1, 0.5, 0.9}) {
        Rng rng(seed + 7919 * (d * 100 + ++combo));
        const Vector mu = Vector::Constant(d, mu_value);
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < draws; ++i) {
          const Matrix y = sample_matrix_t(
              {Q, n, mu, Matrix::Constant(1, 1, gamma)}, rng);
          const Vector residual = y.col(0) - mu;
          const double value = logdet_spd(
              symmetrized(Q + gamma * residual * residual.transpose()), "invariance: Q+");
          sum += value;
          sum_sq += value * value;
        }
        const double mean = sum / draws;
        const double var = std::max(sum_sq / draws - mean * mean, 0.0);
        cells.push_back({mean, std::sqrt(var / draws)});
      }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      for (std::size_t j = i + 1; j < cells.size(); ++j) {
        const double combined =
            std::sqrt(cells[i].se * cells[i].se + cells[j].se * cells[j].se);
        worst = std::max(worst, std::abs(cells[i].mean - cells[j].mean) / combined);
      }
    }
    detail << "d=" << d << ": means ";
    for (const auto& cell : cells) detail << cell.mean << " ";
  }
  return {"predicted-logdet-invariance", worst, tolerance, worst < tolerance, detail.str()};
}

std::vector<CheckResult> run_analytic_checks(std::uint64_t seed) {
  return {
      check_conjugate_factorization(200, 2, 3, seed),
      check_joint_entropy_mc(100000, seed + 1),
      check_predicted_logdet_invariance(200000, seed + 2),
  };
}

}  // namespace sysid
