#pragma once

#include <map>
#include <string>
#include <vector>

#include "ddmr/linalg.hpp"

namespace ddmr::sdp {

/// Affine matrix-valued map of the problem's scalar unknowns x:
///   vec(E(x)) = constant + coefficients * x      (column-major vec)
///
/// Expressions created before later variables were declared simply have
/// fewer coefficient columns; every operation pads to the larger width.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(int rows, int cols, int width);

  static AffineExpr constant(const Matrix& value, int width = 0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int width() const { return static_cast<int>(coeffs_.cols()); }

  const Vector& constant_vec() const { return constant_; }
  const Matrix& coefficients() const { return coeffs_; }
  Vector& constant_vec() { return constant_; }
  Matrix& coefficients() { return coeffs_; }

  Matrix evaluate(const Vector& x) const;
  AffineExpr padded(int width) const;

  AffineExpr transpose() const;
  AffineExpr operator-() const;
  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double s);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator+(AffineExpr a, const Matrix& b);
  friend AffineExpr operator-(AffineExpr a, const Matrix& b);
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
  friend AffineExpr operator*(const Matrix& left, const AffineExpr& e);
  friend AffineExpr operator*(const AffineExpr& e, const Matrix& right);

  /// Block matrix from a grid of equally-shaped-per-row/column expressions.
  static AffineExpr block(const std::vector<std::vector<AffineExpr>>& grid);

  /// Sum of diagonal entries (1 x 1 expression).
  AffineExpr trace() const;
  /// Sum of all entries (1 x 1 expression).
  AffineExpr sum() const;

  /// max |E - E'| over constant part and coefficients; 0 for exactly symmetric expressions.
  double asymmetry() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vector constant_;
  Matrix coeffs_;
};

enum class VariableKind { general, symmetric };
enum class NormKind { l1, frobenius };

struct VariableInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  VariableKind kind = VariableKind::general;
  int offset = 0;  ///< first scalar slot
  int count = 0;   ///< number of scalar slots
};

struct PsdConstraint {
  AffineExpr expr;
  double margin = 0.0;
  std::string label;
};

struct LinearConstraint {
  AffineExpr expr;
  std::string label;
};

/// minimize  c'x + offset
/// s.t.      E_k(x) = 0          (equalities)
///           E_k(x) >= 0         (elementwise)
///           S_k(x) - margin_k I  is PSD
class ConicProblem {
 public:
  /// Declares a matrix variable; returns its identity expression.
  AffineExpr add_variable(const std::string& name, int rows, int cols,
                          VariableKind kind = VariableKind::general);

  /// Identity expression of a declared variable.
  AffineExpr variable(const std::string& name) const;
  const VariableInfo& variable_info(const std::string& name) const;
  const std::vector<VariableInfo>& variables() const { return vars_; }
  int scalar_count() const { return scalars_; }

  void add_equality(const AffineExpr& expr, const std::string& label = {});
  void add_nonnegative(const AffineExpr& expr, const std::string& label = {});
  /// Rejects non-square or asymmetric expressions and negative margins.
  void add_psd(const AffineExpr& expr, double margin = 0.0, const std::string& label = {});

  /// Adds weight * E(x) for a 1 x 1 expression.
  void add_objective(const AffineExpr& scalar_expr, double weight = 1.0);

  /// Adds weight * ||E(x)|| through epigraph auxiliaries:
  /// l1 -> entrywise bounds t >= E, t >= -E with objective sum(t);
  /// frobenius -> arrow matrix [[s I, vec E], [vec E', s]] PSD with objective s.
  void add_norm_objective(const AffineExpr& expr, double weight, NormKind norm, const std::string& label);

  const Vector& objective() const { return objective_; }
  double objective_offset() const { return objective_offset_; }
  const std::vector<LinearConstraint>& equalities() const { return equalities_; }
  const std::vector<LinearConstraint>& nonnegatives() const { return nonnegatives_; }
  const std::vector<PsdConstraint>& psd_constraints() const { return psd_; }

  /// Reads the variable blocks out of a flat solution vector.
  std::map<std::string, Matrix> unpack(const Vector& x) const;

 private:
  std::vector<VariableInfo> vars_;
  int scalars_ = 0;
  Vector objective_;
  double objective_offset_ = 0.0;
  std::vector<LinearConstraint> equalities_;
  std::vector<LinearConstraint> nonnegatives_;
  std::vector<PsdConstraint> psd_;
  int aux_counter_ = 0;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  int max_iterations = 120;
  bool verbose = false;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  std::map<std::string, Matrix> values;
  Vector x;
  double objective_value = 0.0;
  /// Largest |E(x)| entry over all equality constraints.
  double max_equality_residual = 0.0;
  /// Smallest eigenvalue of S_k(x) - margin_k I over PSD constraints, and smallest
  /// entry of the elementwise constraints.
  double min_psd_eigenvalue = 0.0;
  /// Primal-dual objective gap of the interior-point iterate (when a dual iterate exists).
  double duality_gap = 0.0;
  bool has_dual_certificate = false;
  int iterations = 0;
  std::string message;
};

/// Dense primal-dual interior-point solve.
///
/// Equalities are eliminated up front (inconsistent equalities -> infeasible);
/// directions of x that influence neither the objective nor any cone
/// constraint are fixed at minimum norm, so the returned x is the
/// minimum-norm point of its equivalence class.
ConicSolution solve(const ConicProblem& problem, const SolverOptions& options = {});

/// Recomputes residuals of `x` against every constraint, independently of the solver.
void evaluate_residuals(const ConicProblem& problem, const Vector& x, double& max_equality_residual,
                        double& min_cone_slack);

/// SDPA sparse ("dat-s") standard form: minimize c'x s.t. sum_i F_i x_i - F_0 is PSD.
/// Equalities become pairs of diagonal inequalities; elementwise constraints one diagonal block.
struct SdpaProblem {
  Vector c;
  /// Positive: dense symmetric block; negative: diagonal block of |size|.
  std::vector<int> block_struct;
  /// F[i][b]: matrix i (0..m) for block b; diagonal blocks stored as |size| x |size| diagonal matrices.
  std::vector<std::vector<Matrix>> F;
};

std::string export_problem(const ConicProblem& problem);
SdpaProblem to_sdpa(const ConicProblem& problem);
std::string write_sdpa(const SdpaProblem& p, const std::string& comment = {});
SdpaProblem read_sdpa(const std::string& text);

}  // namespace ddmr::sdp
