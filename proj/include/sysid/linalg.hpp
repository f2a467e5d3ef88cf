#pragma once

#include <Eigen/Dense>
#include <random>

namespace sysid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Caller-owned generator state; no function in this library touches global RNG state.
using Rng = std::mt19937_64;

// Minimum Cholesky pivot accepted when validating positive definiteness.
inline constexpr double kPdPivotTol = 1e-10;

/// (X + X^T)/2
Matrix symmetrized(const Matrix& x);

bool is_spd(const Matrix& x, double pivot_tol = kPdPivotTol);

/// Cholesky factorization of the symmetrized input. Throws std::invalid_argument
/// (message names `name`) when the factorization fails or a pivot falls below
/// the threshold.
Eigen::LLT<Matrix> spd_cholesky(const Matrix& x, const char* name,
                                double pivot_tol = kPdPivotTol);

double logdet_from_llt(const Eigen::LLT<Matrix>& llt);
double logdet_spd(const Matrix& x, const char* name);

double max_abs(const Matrix& x);

Vector sample_standard_normal(int n, Rng& rng);
Matrix sample_standard_normal_matrix(int rows, int cols, Rng& rng);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(int dim, Rng& rng);

/// Random SPD matrix with eigenvalues drawn uniformly from [eig_min, eig_max].
Matrix random_spd(int dim, double eig_min, double eig_max, Rng& rng);

}  // namespace sysid
