#include "sysid/distributions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sysid/special.hpp"

namespace sysid {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

void check_shapes_mn(const Matrix& A, const MatrixNormalParams& p) {
  if (p.M.rows() != A.rows() || p.M.cols() != A.cols())
    throw std::invalid_argument("matrix_normal: variate/mean shape mismatch");
  if (p.V.rows() != A.rows() || p.K.rows() != A.cols())
    throw std::invalid_argument("matrix_normal: covariance shapes do not match variate");
}

}  // namespace

double mvn_logpdf(const Vector& y, const Vector& mean, const Matrix& cov) {
  if (y.size() != mean.size() || cov.rows() != y.size())
    throw std::invalid_argument("mvn_logpdf: shape mismatch");
  const auto llt = spd_cholesky(cov, "mvn_logpdf: cov");
  const Vector r = y - mean;
  const double quad = r.dot(llt.solve(r));
  return -0.5 * y.size() * kLog2Pi - 0.5 * logdet_from_llt(llt) - 0.5 * quad;
}

double matrix_normal_logpdf(const Matrix& A, const MatrixNormalParams& p) {
  check_shapes_mn(A, p);
  const long d = A.rows(), m = A.cols();
  const auto lltV = spd_cholesky(p.V, "matrix_normal: V");
  const auto lltK = spd_cholesky(p.K, "matrix_normal: K");
  const Matrix E = A - p.M;
  const double quad = (E.transpose() * lltV.solve(E) * symmetrized(p.K)).trace();
  return 0.5 * d * logdet_from_llt(lltK) - 0.5 * d * m * kLog2Pi -
         0.5 * m * logdet_from_llt(lltV) - 0.5 * quad;
}

double inverse_wishart_logpdf(const Matrix& V, const InverseWishartParams& p) {
  const long d = p.Q.rows();
  if (V.rows() != d || V.cols() != d)
    throw std::invalid_argument("inverse_wishart: variate/scale shape mismatch");
  const auto lltV = spd_cholesky(V, "inverse_wishart: V");
  const auto lltQ = spd_cholesky(p.Q, "inverse_wishart: Q");
  const double trace_term = lltV.solve(symmetrized(p.Q)).trace();
  return -log_multi_gamma(static_cast<int>(d), p.n) -
         0.5 * (p.n + d + 1) * logdet_from_llt(lltV) + 0.5 * p.n * logdet_from_llt(lltQ) -
         0.5 * p.n * d * std::numbers::ln2 - 0.5 * trace_term;
}

double matrix_t_logpdf(const Matrix& Y, const MatrixTParams& p) {
  const long d = Y.rows(), m = Y.cols();
  if (p.M.rows() != d || p.M.cols() != m)
    throw std::invalid_argument("matrix_t: variate/location shape mismatch");
  if (p.Q.rows() != d || p.K.rows() != m)
    throw std::invalid_argument("matrix_t: scale shapes do not match variate");
  const auto lltQ = spd_cholesky(p.Q, "matrix_t: Q");
  const auto lltK = spd_cholesky(p.K, "matrix_t: K");
  const Matrix E = Y - p.M;
  const Matrix shifted = symmetrized(p.Q + E * symmetrized(p.K) * E.transpose());
  return 0.5 * d * logdet_from_llt(lltK) - 0.5 * d * m * std::log(std::numbers::pi) +
         log_multi_gamma(static_cast<int>(d), p.n + m) -
         log_multi_gamma(static_cast<int>(d), p.n) + 0.5 * p.n * logdet_from_llt(lltQ) -
         0.5 * (m + p.n) * logdet_spd(shifted, "matrix_t: Q + EKE^T");
}

Matrix sample_matrix_normal(const MatrixNormalParams& p, Rng& rng) {
  check_shapes_mn(p.M, p);
  const long d = p.M.rows(), m = p.M.cols();
  const auto lltV = spd_cholesky(p.V, "sample_matrix_normal: V");
  const auto lltK = spd_cholesky(p.K, "sample_matrix_normal: K");
  const Matrix z = sample_standard_normal_matrix(static_cast<int>(d), static_cast<int>(m), rng);
  // A = M + L_V Z L_K^{-1}: the column factor W = L_K^{-1} satisfies
  // W^T W = K^{-1}, giving vec covariance V (x) K^{-1}.
  const Matrix zk = Matrix(lltK.matrixU())
                        .triangularView<Eigen::Upper>()
                        .solve(z.transpose())
                        .transpose();
  return p.M + Matrix(lltV.matrixL()) * zk;
}

Matrix sample_wishart(const Matrix& scale, double n, Rng& rng) {
  const long d = scale.rows();
  if (!(n > d - 1)) {
    throw std::invalid_argument("sample_wishart: need n > dim - 1, got n = " +
                                std::to_string(n));
  }
  const auto llt = spd_cholesky(scale, "sample_wishart: scale");
  std::normal_distribution<double> normal;
  Matrix bartlett = Matrix::Zero(d, d);
  for (long i = 0; i < d; ++i) {
    std::chi_squared_distribution<double> chi2(n - i);
    bartlett(i, i) = std::sqrt(chi2(rng));
    for (long j = 0; j < i; ++j) bartlett(i, j) = normal(rng);
  }
  const Matrix lb = Matrix(llt.matrixL()) * bartlett;
  return symmetrized(lb * lb.transpose());
}

Matrix sample_inverse_wishart(const InverseWishartParams& p, Rng& rng) {
  const auto lltQ = spd_cholesky(p.Q, "sample_inverse_wishart: Q");
  const long d = p.Q.rows();
  const Matrix q_inv = lltQ.solve(Matrix::Identity(d, d));
  const Matrix s = sample_wishart(symmetrized(q_inv), p.n, rng);
  const Matrix v = spd_cholesky(s, "sample_inverse_wishart: S").solve(Matrix::Identity(d, d));
  return symmetrized(v);
}

Matrix sample_matrix_t(const MatrixTParams& p, Rng& rng) {
  const Matrix v = sample_inverse_wishart({p.Q, p.n}, rng);
  return sample_matrix_normal({p.M, v, p.K}, rng);
}

double entropy_matrix_normal(const MatrixNormalParams& p) {
  const long d = p.M.rows(), m = p.M.cols();
  const double logdet_v = logdet_spd(p.V, "entropy_matrix_normal: V");
  const double logdet_k = logdet_spd(p.K, "entropy_matrix_normal: K");
  // |V (x) K^{-1}| = |V|^m / |K|^d
  return 0.5 * m * logdet_v - 0.5 * d * logdet_k + 0.5 * d * m * (kLog2Pi + 1.0);
}

double wishart_logdet_shift(int d, double n) {
  double sum = 0.0;
  for (int i = 1; i <= d; ++i) sum += digamma(0.5 * (n + 1 - i));
  return -sum - d * std::numbers::ln2;
}

double iw_entropy_constant(int d, double n) {
  const double shift = wishart_logdet_shift(d, n);
  return log_multi_gamma(d, n) + 0.5 * n * d * std::numbers::ln2 +
         0.5 * (n + d + 1) * shift + 0.5 * n * d;
}

double entropy_inverse_wishart(const InverseWishartParams& p) {
  const int d = static_cast<int>(p.Q.rows());
  return 0.5 * (d + 1) * logdet_spd(p.Q, "entropy_inverse_wishart: Q") +
         iw_entropy_constant(d, p.n);
}

double joint_entropy_constant(int d, int m, double n) {
  return 0.5 * d * m * (kLog2Pi + 1.0) + 0.5 * m * wishart_logdet_shift(d, n) +
         iw_entropy_constant(d, n);
}

double entropy_joint_mniw(const Matrix& K, const Matrix& Q, int d, int m, double n) {
  if (K.rows() != m || Q.rows() != d)
    throw std::invalid_argument("entropy_joint_mniw: dimension mismatch");
  return -0.5 * d * logdet_spd(K, "entropy_joint_mniw: K") +
         0.5 * (m + d + 1) * logdet_spd(Q, "entropy_joint_mniw: Q") +
         joint_entropy_constant(d, m, n);
}

double predicted_entropy_constant(int d, double n) {
  if (!(n + 1 - d > 0))
    throw std::domain_error("predicted_entropy_constant: need n + 1 > d");
  const double a = 0.5 * (n + 1);
  const double b = 0.5 * (n + 1 - d);
  return -(std::lgamma(a) - 0.5 * d * std::log(std::numbers::pi) - std::lgamma(b)) +
         a * (digamma(a) - digamma(b));
}

double entropy_predicted_product(double k_tilde, const Matrix& Q, int d, double n) {
  if (!(k_tilde > 0.0))
    throw std::invalid_argument("entropy_predicted_product: k_tilde must be positive");
  return predicted_entropy_constant(d, n) - 0.5 * d * std::log(k_tilde) +
         logdet_spd(Q, "entropy_predicted_product: Q");
}

}  // namespace sysid
