#pragma once

#include <Eigen/Dense>

namespace ddmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest eigenvalue modulus. Throws DimensionError on non-square input.
double spectral_radius(const Matrix& m);

/// Operator 2-norm (largest singular value).
double spectral_norm(const Matrix& m);

/// Numerical rank with threshold rel_tol * sigma_max * max(rows, cols).
struct RankInfo {
  int rank = 0;
  Vector singular_values;
};
RankInfo numerical_rank(const Matrix& m, double rel_tol);

/// Eigenvalues of the symmetric part of `m`, ascending.
Vector sym_eigenvalues(const Matrix& m);
double min_sym_eigenvalue(const Matrix& m);
double max_sym_eigenvalue(const Matrix& m);

/// Smallest gamma >= 0 with lhs <= gamma * rhs in the PSD order, for PSD lhs and rhs.
///
/// rhs may be singular: its numerical null space (eigenvalues below
/// rel_tol * lambda_max) must then carry no energy of lhs, otherwise the
/// ordering is unattainable and +infinity is returned.
double min_psd_multiplier(const Matrix& lhs, const Matrix& rhs, double rel_tol = 1e-10);

/// Orthonormal basis of the null space of m (columns), using the same rank rule as numerical_rank.
Matrix null_space(const Matrix& m, double rel_tol);

/// Discrete Lyapunov solution X of a X a' - X + q = 0 (Kronecker form; small n only).
Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q);

bool all_finite(const Matrix& m);

}  // namespace ddmr
