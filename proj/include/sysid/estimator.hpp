#pragma once

#include <vector>

#include <json.hpp>

#include "sysid/distributions.hpp"
#include "sysid/linalg.hpp"

namespace sysid {

struct UpdateDiagnostics {
  double gamma = 0.0;             // 1/(1 + x'Px), in (0, 1]
  double predictive_logpdf = 0.0; // log density of y under the pre-update predictive
  double entropy_after = 0.0;     // joint entropy of the committed posterior
};

/// Conjugate posterior over (A, V): A | V matrix-normal(M, V, K), V inverse-
/// Wishart(Q, n). One rank-one update per observation; P = K^{-1} is carried
/// alongside and refreshed from K by direct solve every `refresh_period`
/// updates (or whenever the drift check trips).
class PosteriorState {
 public:
  PosteriorState(Matrix M0, Matrix K0, Matrix Q0, double n0);

  int d() const { return static_cast<int>(M_.rows()); }
  int m() const { return static_cast<int>(M_.cols()); }
  const Matrix& mean() const { return M_; }
  const Matrix& precision() const { return K_; }
  const Matrix& precision_inverse() const { return P_; }
  const Matrix& scatter() const { return Q_; }
  double dof() const { return n_; }
  long update_count() const { return t_; }

  /// Rank-one conjugate update:
  ///   K' = x x' + K,  n' = n + 1,  gamma = 1/(1 + x'Px),
  ///   M' = M + gamma (y - Mx) (Px)',
  ///   Q' = Q + gamma (y - Mx)(y - Mx)',
  ///   P' = P - (Px)(Px)'/(1 + x'Px).
  /// On numerical failure the state is left unchanged.
  UpdateDiagnostics update(const Vector& x, const Vector& y);

  void refresh_inverse();
  /// ||P K - I||_max
  double inverse_drift() const;

  int refresh_period = 500;

  nlohmann::json to_json() const;
  static PosteriorState from_json(const nlohmann::json& j);

 private:
  Matrix M_, K_, P_, Q_;
  double n_ = 0.0;
  long t_ = 0;
};

/// Fold of update() over an observation sequence; the normal-equation oracle
/// for this fold lives in the tests.
PosteriorState batch_posterior(const Matrix& M0, const Matrix& K0, const Matrix& Q0, double n0,
                               const std::vector<Vector>& X, const std::vector<Vector>& Y);

double gamma_via_inverse(const PosteriorState& s, const Vector& x);
/// 1 - x'(x x' + K)^{-1} x by direct solve; the cross-check form.
double gamma_via_solve(const Matrix& K, const Vector& x);

/// Matrix-T predictive log density of y at regressor x:
/// T(Q, n, Mx, gamma) with scalar precision gamma.
double predictive_logpdf(const PosteriorState& s, const Vector& x, const Vector& y);

double posterior_entropy(const PosteriorState& s);

/// Residual noise estimate y - M x with the state's current mean.
Vector estimate_noise(const PosteriorState& s, const Vector& x, const Vector& y);

/// Posterior mean of V: Q/(n - d - 1); requires n > d + 1.
Matrix noise_covariance_estimate(const PosteriorState& s);

}  // namespace sysid
