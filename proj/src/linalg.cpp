#include "ddmr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddmr/errors.hpp"

namespace ddmr {

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix must be square");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

RankInfo numerical_rank(const Matrix& m, double rel_tol) {
  RankInfo info;
  if (m.size() == 0) return info;
  Eigen::JacobiSVD<Matrix> svd(m);
  info.singular_values = svd.singularValues();
  const double smax = info.singular_values(0);
  const double thresh = rel_tol * smax * static_cast<double>(std::max(m.rows(), m.cols()));
  for (Eigen::Index i = 0; i < info.singular_values.size(); ++i) {
    if (info.singular_values(i) > thresh && info.singular_values(i) > 0.0) ++info.rank;
  }
  return info;
}

Vector sym_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("sym_eigenvalues: matrix must be square");
  if (m.size() == 0) return Vector();
  const Matrix s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_sym_eigenvalue(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  return ev.size() ? ev(0) : std::numeric_limits<double>::infinity();
}

double max_sym_eigenvalue(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  return ev.size() ? ev(ev.size() - 1) : -std::numeric_limits<double>::infinity();
}

double min_psd_multiplier(const Matrix& lhs, const Matrix& rhs, double rel_tol) {
  if (lhs.rows() != lhs.cols() || rhs.rows() != rhs.cols() || lhs.rows() != rhs.rows()) {
    throw DimensionError("min_psd_multiplier: operands must be square and of equal size");
  }
  const Eigen::Index n = lhs.rows();
  if (n == 0) return 0.0;
  const Matrix l = 0.5 * (lhs + lhs.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rhs + rhs.transpose()));
  const Vector& lam = es.eigenvalues();
  const double lam_max = std::max(lam(n - 1), 0.0);
  const double l_scale = std::max(l.norm(), std::numeric_limits<double>::min());
  if (lam_max <= 0.0) {
    return l.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const double thresh = rel_tol * lam_max;
  std::vector<Eigen::Index> range, kernel;
  for (Eigen::Index i = 0; i < n; ++i) (lam(i) > thresh ? range : kernel).push_back(i);

  if (!kernel.empty()) {
    Matrix nk(n, static_cast<Eigen::Index>(kernel.size()));
    for (std::size_t k = 0; k < kernel.size(); ++k) nk.col(k) = es.eigenvectors().col(kernel[k]);
    const Matrix restricted = nk.transpose() * l * nk;
    if (restricted.norm() > 1e-9 * l_scale) return std::numeric_limits<double>::infinity();
  }
  Matrix w(n, static_cast<Eigen::Index>(range.size()));
  for (std::size_t k = 0; k < range.size(); ++k) {
    w.col(k) = es.eigenvectors().col(range[k]) / std::sqrt(lam(range[k]));
  }
  const Matrix reduced = w.transpose() * l * w;
  return std::max(0.0, max_sym_eigenvalue(reduced));
}

Matrix null_space(const Matrix& m, double rel_tol) {
  if (m.cols() == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double thresh = rel_tol * s(0) * static_cast<double>(std::max(m.rows(), m.cols()));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thresh && s(i) > 0.0) ++rank;
  }
  return svd.matrixV().rightCols(m.cols() - rank);
}

Matrix solve_discrete_lyapunov(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) {
    throw DimensionError("solve_discrete_lyapunov: dimension mismatch");
  }
  // vec(a X a') = (a kron a) vec(X)
  Matrix kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = a(i, j) * a;
  }
  const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
  const Vector rhs = Eigen::Map<const Vector>(q.data(), n * n);
  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible()) throw SingularityError("solve_discrete_lyapunov: a has reciprocal eigenvalue pair");
  const Vector x = lu.solve(rhs);
  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace ddmr
