#include "sysid/estimator.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "sysid/json_io.hpp"

namespace sysid {

PosteriorState::PosteriorState(Matrix M0, Matrix K0, Matrix Q0, double n0)
    : M_(std::move(M0)), K_(std::move(K0)), Q_(std::move(Q0)), n_(n0) {
  if (!M_.allFinite()) throw std::invalid_argument("PosteriorState: M0 must be finite");
  if (K_.rows() != M_.cols()) throw std::invalid_argument("PosteriorState: K0/M0 shape mismatch");
  if (Q_.rows() != M_.rows()) throw std::invalid_argument("PosteriorState: Q0/M0 shape mismatch");
  const auto llt = spd_cholesky(K_, "PosteriorState: K0");
  spd_cholesky(Q_, "PosteriorState: Q0");
  if (!(n_ > d() - 1))
    throw std::invalid_argument("PosteriorState: need n0 > d - 1");
  K_ = symmetrized(K_);
  Q_ = symmetrized(Q_);
  P_ = symmetrized(llt.solve(Matrix::Identity(m(), m())));
}

UpdateDiagnostics PosteriorState::update(const Vector& x, const Vector& y) {
  if (x.size() != m() || y.size() != d())
    throw std::invalid_argument("PosteriorState::update: shape mismatch");
  if (!x.allFinite() || !y.allFinite())
    throw std::invalid_argument("PosteriorState::update: non-finite input");

  const Vector px = P_ * x;
  const double quad = x.dot(px);
  if (!(quad >= -1e-12) || !std::isfinite(quad)) {
    throw std::runtime_error("PosteriorState::update: precision inverse lost definiteness");
  }
  const double gamma = 1.0 / (1.0 + quad);

  UpdateDiagnostics diag;
  diag.gamma = gamma;
  diag.predictive_logpdf = predictive_logpdf(*this, x, y);

  const Vector residual = y - M_ * x;
  Matrix new_K = symmetrized(K_ + x * x.transpose());
  Matrix new_P = symmetrized(P_ - (px * px.transpose()) * gamma);
  Matrix new_M = M_ + gamma * residual * px.transpose();
  Matrix new_Q = symmetrized(Q_ + gamma * (residual * residual.transpose()));
  if (!new_M.allFinite() || !new_Q.allFinite() || !new_K.allFinite() || !new_P.allFinite()) {
    throw std::runtime_error("PosteriorState::update: non-finite update");
  }

  M_ = std::move(new_M);
  K_ = std::move(new_K);
  P_ = std::move(new_P);
  Q_ = std::move(new_Q);
  n_ += 1.0;
  ++t_;

  if (t_ % refresh_period == 0 || inverse_drift() >= 1e-6) refresh_inverse();

  diag.entropy_after = posterior_entropy(*this);
  return diag;
}

void PosteriorState::refresh_inverse() {
  const auto llt = spd_cholesky(K_, "PosteriorState::refresh_inverse: K");
  P_ = symmetrized(llt.solve(Matrix::Identity(m(), m())));
}

double PosteriorState::inverse_drift() const {
  return max_abs(P_ * K_ - Matrix::Identity(m(), m()));
}

nlohmann::json PosteriorState::to_json() const {
  return {{"M", matrix_to_json(M_)}, {"K", matrix_to_json(K_)}, {"P", matrix_to_json(P_)},
          {"Q", matrix_to_json(Q_)}, {"n", n_},                 {"t", t_},
          {"refresh_period", refresh_period}};
}

PosteriorState PosteriorState::from_json(const nlohmann::json& j) {
  PosteriorState s(matrix_from_json(j.at("M"), "snapshot.M"),
                   matrix_from_json(j.at("K"), "snapshot.K"),
                   matrix_from_json(j.at("Q"), "snapshot.Q"), j.at("n").get<double>());
  s.t_ = j.at("t").get<long>();
  if (j.contains("refresh_period")) s.refresh_period = j.at("refresh_period").get<int>();
  if (j.contains("P")) {
    // Restore the carried inverse exactly for bit-identical resume.
    Matrix p = matrix_from_json(j.at("P"), "snapshot.P");
    if (p.rows() != s.m() || p.cols() != s.m())
      throw std::invalid_argument("snapshot.P: shape mismatch");
    s.P_ = std::move(p);
  }
  return s;
}

PosteriorState batch_posterior(const Matrix& M0, const Matrix& K0, const Matrix& Q0, double n0,
                               const std::vector<Vector>& X, const std::vector<Vector>& Y) {
  if (X.size() != Y.size())
    throw std::invalid_argument("batch_posterior: X and Y must have equal length");
  PosteriorState s(M0, K0, Q0, n0);
  for (std::size_t i = 0; i < X.size(); ++i) s.update(X[i], Y[i]);
  return s;
}

double gamma_via_inverse(const PosteriorState& s, const Vector& x) {
  return 1.0 / (1.0 + x.dot(s.precision_inverse() * x));
}

double gamma_via_solve(const Matrix& K, const Vector& x) {
  const Matrix shifted = symmetrized(K + x * x.transpose());
  const auto llt = spd_cholesky(shifted, "gamma_via_solve: xx' + K");
  return 1.0 - x.dot(llt.solve(x));
}

double predictive_logpdf(const PosteriorState& s, const Vector& x, const Vector& y) {
  const double gamma = gamma_via_inverse(s, x);
  if (!(gamma > 0.0) || !(gamma <= 1.0 + 1e-12))
    throw std::runtime_error("predictive_logpdf: gamma outside (0, 1]");
  MatrixTParams p{s.scatter(), s.dof(), s.mean() * x, Matrix::Constant(1, 1, gamma)};
  return matrix_t_logpdf(y, p);
}

double posterior_entropy(const PosteriorState& s) {
  return entropy_joint_mniw(s.precision(), s.scatter(), s.d(), s.m(), s.dof());
}

Vector estimate_noise(const PosteriorState& s, const Vector& x, const Vector& y) {
  if (x.size() != s.m() || y.size() != s.d())
    throw std::invalid_argument("estimate_noise: shape mismatch");
  return y - s.mean() * x;
}

Matrix noise_covariance_estimate(const PosteriorState& s) {
  const double denom = s.dof() - s.d() - 1;
  if (!(denom > 0.0))
    throw std::invalid_argument("noise_covariance_estimate: requires n > d + 1");
  return s.scatter() / denom;
}

}  // namespace sysid
