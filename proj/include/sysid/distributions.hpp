#pragma once

#include "sysid/linalg.hpp"

namespace sysid {

// Matrix-normal over a d x m matrix A:
//   p(A) = |K|^{d/2} / |2 pi V|^{m/2} * exp(-1/2 tr((A-M)^T V^{-1} (A-M) K))
// V is the d x d row covariance, K the m x m precision parameter matrix.
struct MatrixNormalParams {
  Matrix M;
  Matrix V;
  Matrix K;
};

// Inverse-Wishart over a d x d SPD matrix V with scale Q (SPD) and degrees n > d - 1:
//   p(V) = 1/Z_{n,d} * |V|^{-(d+1)/2} * |V^{-1} Q / 2|^{n/2} * exp(-1/2 tr(V^{-1} Q))
struct InverseWishartParams {
  Matrix Q;
  double n = 0.0;
};

// Matrix Student-T over a d x m matrix Y:
//   p(Y) = |K|^{d/2} / pi^{dm/2} * Z_{n+m,d}/Z_{n,d}
//          * |Q|^{n/2} / |Q + (Y-M) K (Y-M)^T|^{(m+n)/2}
struct MatrixTParams {
  Matrix Q;
  double n = 0.0;
  Matrix M;
  Matrix K;  // m x m; 1 x 1 when the variate is a column vector
};

double mvn_logpdf(const Vector& y, const Vector& mean, const Matrix& cov);
double matrix_normal_logpdf(const Matrix& A, const MatrixNormalParams& p);
double inverse_wishart_logpdf(const Matrix& V, const InverseWishartParams& p);
double matrix_t_logpdf(const Matrix& Y, const MatrixTParams& p);

/// Draw A = M + L_V Z L_K^{-1} with L_V L_V^T = V, L_K L_K^T = K and Z iid
/// standard normal. Row-major vec(A) then has covariance V (x) K^{-1}.
Matrix sample_matrix_normal(const MatrixNormalParams& p, Rng& rng);

/// Bartlett construction; `n` may be any real > dim - 1. E[S] = n * scale.
Matrix sample_wishart(const Matrix& scale, double n, Rng& rng);

/// V = S^{-1} with S Wishart(Q^{-1}, n).
Matrix sample_inverse_wishart(const InverseWishartParams& p, Rng& rng);

/// Compound draw: V ~ IW(Q, n), then row-cov-V matrix normal around M.
Matrix sample_matrix_t(const MatrixTParams& p, Rng& rng);

// Entropies (nats). Every d/m/n-only constant below is in closed form.

/// (m/2) ln|V| - (d/2) ln|K| + (dm/2) ln(2 pi e)
double entropy_matrix_normal(const MatrixNormalParams& p);

/// ((d+1)/2) ln|Q| + iw_entropy_constant(d, n)
double entropy_inverse_wishart(const InverseWishartParams& p);

/// Joint entropy of (A, V) with V ~ IW(Q, n) and A | V matrix-normal(M, V, K):
/// -(d/2) ln|K| + ((m+d+1)/2) ln|Q| + joint_entropy_constant(d, m, n)
double entropy_joint_mniw(const Matrix& K, const Matrix& Q, int d, int m, double n);

/// Entropy of the predicted-output product form:
/// predicted_entropy_constant(d, n) + (d/2) ln(1/k_tilde) + ln|Q|.
/// The ln|Q| coefficient is kept as printed in the source derivation even
/// though the exact matrix-T entropy carries (1/2) ln|Q|; only the k_tilde
/// term varies with the control, so optimization over u is unaffected.
double entropy_predicted_product(double k_tilde, const Matrix& Q, int d, double n);

/// E_{Wishart(scale, n)} ln|S| = ln|scale| - wishart_logdet_shift(d, n),
/// i.e. the shift is -sum_i digamma((n+1-i)/2) - d ln 2.
double wishart_logdet_shift(int d, double n);

/// Q-independent part of the inverse-Wishart entropy, assembled from
///   H(V) = ln Z_{n,d} - (n/2) ln|Q/2| + ((n+d+1)/2) E[ln|V|] + (1/2) E[tr(V^{-1}Q)]
/// with E[ln|V|] = ln|Q| + shift and E[tr(V^{-1}Q)] = n d:
///   ln Z_{n,d} + (nd/2) ln 2 + ((n+d+1)/2) * shift + nd/2.
double iw_entropy_constant(int d, double n);

/// K/Q-independent part of the joint matrix-normal inverse-Wishart entropy:
///   (dm/2) ln(2 pi e) + (m/2) * wishart_logdet_shift(d, n) + iw_entropy_constant(d, n).
double joint_entropy_constant(int d, int m, double n);

/// -ln[Gamma((n+1)/2) / (pi^{d/2} Gamma((n+1-d)/2))]
///  + ((n+1)/2) [digamma((n+1)/2) - digamma((n+1-d)/2)]
double predicted_entropy_constant(int d, double n);

}  // namespace sysid
