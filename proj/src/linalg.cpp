#include "sysid/linalg.hpp"

#include <stdexcept>
#include <string>

namespace sysid {

Matrix symmetrized(const Matrix& x) { return 0.5 * (x + x.transpose()); }

Eigen::LLT<Matrix> spd_cholesky(const Matrix& x, const char* name, double pivot_tol) {
  if (x.rows() != x.cols()) {
    throw std::invalid_argument(std::string(name) + ": matrix must be square, got " +
                                std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(name) + ": matrix has non-finite entries");
  }
  Eigen::LLT<Matrix> llt(symmetrized(x));
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(std::string(name) + ": matrix is not positive definite");
  }
  const double min_pivot = llt.matrixLLT().diagonal().minCoeff();
  if (!(min_pivot * min_pivot > pivot_tol)) {
    throw std::invalid_argument(std::string(name) + ": Cholesky pivot " +
                                std::to_string(min_pivot) + " below tolerance");
  }
  return llt;
}

bool is_spd(const Matrix& x, double pivot_tol) {
  if (x.rows() != x.cols() || !x.allFinite()) return false;
  Eigen::LLT<Matrix> llt(symmetrized(x));
  if (llt.info() != Eigen::Success) return false;
  const double min_pivot = llt.matrixLLT().diagonal().minCoeff();
  return min_pivot * min_pivot > pivot_tol;
}

double logdet_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double logdet_spd(const Matrix& x, const char* name) {
  return logdet_from_llt(spd_cholesky(x, name));
}

double max_abs(const Matrix& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

Vector sample_standard_normal(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Matrix sample_standard_normal_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix z(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = normal(rng);
  return z;
}

Matrix random_orthogonal(int dim, Rng& rng) {
  const Matrix g = sample_standard_normal_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix random_spd(int dim, double eig_min, double eig_max, Rng& rng) {
  if (dim <= 0) throw std::invalid_argument("random_spd: dim must be positive");
  if (!(0.0 < eig_min && eig_min <= eig_max)) {
    throw std::invalid_argument("random_spd: need 0 < eig_min <= eig_max");
  }
  std::uniform_real_distribution<double> unif(eig_min, eig_max);
  Vector eigs(dim);
  for (int i = 0; i < dim; ++i) eigs[i] = unif(rng);
  const Matrix q = random_orthogonal(dim, rng);
  return symmetrized(q * eigs.asDiagonal() * q.transpose());
}

}  // namespace sysid
