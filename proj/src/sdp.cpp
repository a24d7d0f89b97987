#include "ddmr/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "ddmr/errors.hpp"

namespace ddmr::sdp {

// ---------------------------------------------------------------------------
// AffineExpr

AffineExpr::AffineExpr(int rows, int cols, int width)
    : rows_(rows), cols_(cols), constant_(Vector::Zero(rows * cols)), coeffs_(Matrix::Zero(rows * cols, width)) {}

AffineExpr AffineExpr::constant(const Matrix& value, int width) {
  AffineExpr e(static_cast<int>(value.rows()), static_cast<int>(value.cols()), width);
  e.constant_ = Eigen::Map<const Vector>(value.data(), value.size());
  return e;
}

Matrix AffineExpr::evaluate(const Vector& x) const {
  if (x.size() < width()) throw DimensionError("AffineExpr::evaluate: solution vector too short");
  Vector v = constant_;
  if (width() > 0) v += coeffs_ * x.head(width());
  return Eigen::Map<const Matrix>(v.data(), rows_, cols_);
}

AffineExpr AffineExpr::padded(int width) const {
  if (width <= this->width()) return *this;
  AffineExpr e = *this;
  const int old = this->width();
  e.coeffs_.conservativeResize(Eigen::NoChange, width);
  e.coeffs_.rightCols(width - old).setZero();
  return e;
}

AffineExpr AffineExpr::transpose() const {
  AffineExpr t(cols_, rows_, width());
  for (int j = 0; j < cols_; ++j) {
    for (int i = 0; i < rows_; ++i) {
      const int src = i + j * rows_;
      const int dst = j + i * cols_;
      t.constant_(dst) = constant_(src);
      t.coeffs_.row(dst) = coeffs_.row(src);
    }
  }
  return t;
}

AffineExpr AffineExpr::operator-() const {
  AffineExpr e = *this;
  e *= -1.0;
  return e;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) throw DimensionError("AffineExpr: shape mismatch in +");
  if (other.width() > width()) *this = padded(other.width());
  constant_ += other.constant_;
  coeffs_.leftCols(other.width()) += other.coeffs_;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) throw DimensionError("AffineExpr: shape mismatch in -");
  if (other.width() > width()) *this = padded(other.width());
  constant_ -= other.constant_;
  coeffs_.leftCols(other.width()) -= other.coeffs_;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  constant_ *= s;
  coeffs_ *= s;
  return *this;
}

AffineExpr operator+(AffineExpr a, const Matrix& b) { return a += AffineExpr::constant(b); }
AffineExpr operator-(AffineExpr a, const Matrix& b) { return a -= AffineExpr::constant(b); }

AffineExpr operator*(const Matrix& left, const AffineExpr& e) {
  if (left.cols() != e.rows_) throw DimensionError("AffineExpr: shape mismatch in left product");
  const int p = static_cast<int>(left.rows());
  AffineExpr out(p, e.cols_, e.width());
  for (int j = 0; j < e.cols_; ++j) {
    out.constant_.segment(j * p, p) = left * e.constant_.segment(j * e.rows_, e.rows_);
    if (e.width() > 0) out.coeffs_.middleRows(j * p, p) = left * e.coeffs_.middleRows(j * e.rows_, e.rows_);
  }
  return out;
}

AffineExpr operator*(const AffineExpr& e, const Matrix& right) {
  if (right.rows() != e.cols_) throw DimensionError("AffineExpr: shape mismatch in right product");
  const int q = static_cast<int>(right.cols());
  const int r = e.rows_;
  AffineExpr out(r, q, e.width());
  for (int j = 0; j < q; ++j) {
    for (int l = 0; l < e.cols_; ++l) {
      const double w = right(l, j);
      if (w == 0.0) continue;
      out.constant_.segment(j * r, r) += w * e.constant_.segment(l * r, r);
      if (e.width() > 0) out.coeffs_.middleRows(j * r, r) += w * e.coeffs_.middleRows(l * r, r);
    }
  }
  return out;
}

AffineExpr AffineExpr::block(const std::vector<std::vector<AffineExpr>>& grid) {
  if (grid.empty() || grid.front().empty()) throw DimensionError("AffineExpr::block: empty grid");
  const std::size_t br = grid.size();
  const std::size_t bc = grid.front().size();
  std::vector<int> row_h(br), col_w(bc);
  int width = 0;
  for (std::size_t i = 0; i < br; ++i) {
    if (grid[i].size() != bc) throw DimensionError("AffineExpr::block: ragged grid");
    for (std::size_t j = 0; j < bc; ++j) {
      const auto& e = grid[i][j];
      if (j == 0) row_h[i] = e.rows_;
      if (i == 0) col_w[j] = e.cols_;
      if (e.rows_ != row_h[i] || e.cols_ != col_w[j]) throw DimensionError("AffineExpr::block: block shapes disagree");
      width = std::max(width, e.width());
    }
  }
  int total_r = 0, total_c = 0;
  for (int h : row_h) total_r += h;
  for (int w : col_w) total_c += w;
  AffineExpr out(total_r, total_c, width);
  int ro = 0;
  for (std::size_t bi = 0; bi < br; ++bi) {
    int co = 0;
    for (std::size_t bj = 0; bj < bc; ++bj) {
      const auto& e = grid[bi][bj];
      for (int j = 0; j < e.cols_; ++j) {
        for (int i = 0; i < e.rows_; ++i) {
          const int src = i + j * e.rows_;
          const int dst = (ro + i) + (co + j) * total_r;
          out.constant_(dst) = e.constant_(src);
          if (e.width() > 0) out.coeffs_.row(dst).head(e.width()) = e.coeffs_.row(src);
        }
      }
      co += col_w[bj];
    }
    ro += row_h[bi];
  }
  return out;
}

AffineExpr AffineExpr::trace() const {
  if (rows_ != cols_) throw DimensionError("AffineExpr::trace: not square");
  AffineExpr t(1, 1, width());
  for (int i = 0; i < rows_; ++i) {
    t.constant_(0) += constant_(i + i * rows_);
    if (width() > 0) t.coeffs_.row(0) += coeffs_.row(i + i * rows_);
  }
  return t;
}

AffineExpr AffineExpr::sum() const {
  AffineExpr t(1, 1, width());
  t.constant_(0) = constant_.sum();
  if (width() > 0) t.coeffs_.row(0) = coeffs_.colwise().sum();
  return t;
}

double AffineExpr::asymmetry() const {
  if (rows_ != cols_) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int j = 0; j < cols_; ++j) {
    for (int i = j + 1; i < rows_; ++i) {
      const int a = i + j * rows_;
      const int b = j + i * rows_;
      worst = std::max(worst, std::abs(constant_(a) - constant_(b)));
      if (width() > 0) worst = std::max(worst, (coeffs_.row(a) - coeffs_.row(b)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// ConicProblem

AffineExpr ConicProblem::add_variable(const std::string& name, int rows, int cols, VariableKind kind) {
  if (rows <= 0 || cols <= 0) throw DimensionError("ConicProblem: variable '" + name + "' has empty shape");
  if (kind == VariableKind::symmetric && rows != cols) {
    throw DimensionError("ConicProblem: symmetric variable '" + name + "' must be square");
  }
  for (const auto& v : vars_) {
    if (v.name == name) throw DomainError("ConicProblem: duplicate variable '" + name + "'");
  }
  VariableInfo info{name, rows, cols, kind, scalars_,
                    kind == VariableKind::symmetric ? rows * (rows + 1) / 2 : rows * cols};
  scalars_ += info.count;
  vars_.push_back(info);
  objective_.conservativeResize(scalars_);
  objective_.tail(info.count).setZero();
  return variable(name);
}

const VariableInfo& ConicProblem::variable_info(const std::string& name) const {
  for (const auto& v : vars_) {
    if (v.name == name) return v;
  }
  throw DomainError("ConicProblem: unknown variable '" + name + "'");
}

AffineExpr ConicProblem::variable(const std::string& name) const {
  const VariableInfo& v = variable_info(name);
  AffineExpr e(v.rows, v.cols, v.offset + v.count);
  if (v.kind == VariableKind::general) {
    for (int k = 0; k < v.count; ++k) e.coefficients()(k, v.offset + k) = 1.0;
  } else {
    int slot = v.offset;
    for (int j = 0; j < v.cols; ++j) {
      for (int i = 0; i <= j; ++i, ++slot) {
        e.coefficients()(i + j * v.rows, slot) = 1.0;
        e.coefficients()(j + i * v.rows, slot) = 1.0;
      }
    }
  }
  return e;
}

void ConicProblem::add_equality(const AffineExpr& expr, const std::string& label) {
  if (expr.width() > scalars_) throw DimensionError("ConicProblem: expression references undeclared variables");
  equalities_.push_back({expr, label});
}

void ConicProblem::add_nonnegative(const AffineExpr& expr, const std::string& label) {
  if (expr.width() > scalars_) throw DimensionError("ConicProblem: expression references undeclared variables");
  nonnegatives_.push_back({expr, label});
}

void ConicProblem::add_psd(const AffineExpr& expr, double margin, const std::string& label) {
  if (expr.width() > scalars_) throw DimensionError("ConicProblem: expression references undeclared variables");
  if (expr.rows() != expr.cols()) throw DimensionError("ConicProblem: PSD constraint '" + label + "' not square");
  const double scale = 1.0 + expr.constant_vec().cwiseAbs().maxCoeff() +
                       (expr.width() ? expr.coefficients().cwiseAbs().maxCoeff() : 0.0);
  if (expr.asymmetry() > 1e-12 * scale) {
    throw DomainError("ConicProblem: PSD constraint '" + label + "' is not symmetric");
  }
  if (!(margin >= 0.0)) throw DomainError("ConicProblem: PSD margin must be >= 0");
  psd_.push_back({expr, margin, label});
}

void ConicProblem::add_objective(const AffineExpr& scalar_expr, double weight) {
  if (scalar_expr.rows() != 1 || scalar_expr.cols() != 1) throw DimensionError("ConicProblem: objective must be scalar");
  if (scalar_expr.width() > scalars_) throw DimensionError("ConicProblem: objective references undeclared variables");
  objective_offset_ += weight * scalar_expr.constant_vec()(0);
  if (scalar_expr.width() > 0) objective_.head(scalar_expr.width()) += weight * scalar_expr.coefficients().row(0).transpose();
}

void ConicProblem::add_norm_objective(const AffineExpr& expr, double weight, NormKind norm, const std::string& label) {
  if (!(weight >= 0.0)) throw DomainError("ConicProblem: norm weight must be >= 0");
  const std::string base = (label.empty() ? std::string("norm") : label) + "#" + std::to_string(aux_counter_++);
  if (norm == NormKind::l1) {
    const AffineExpr t = add_variable(base + ".t", expr.rows(), expr.cols());
    add_nonnegative(t - expr, base + ".upper");
    add_nonnegative(t + expr, base + ".lower");
    add_objective(t.sum(), weight);
  } else {
    const int k = expr.rows() * expr.cols();
    const AffineExpr s = add_variable(base + ".s", 1, 1);
    // vec(E) as a k x 1 expression
    AffineExpr v(k, 1, expr.width());
    v.constant_vec() = expr.constant_vec();
    v.coefficients() = expr.coefficients();
    AffineExpr s_eye(k, k, s.width());
    for (int i = 0; i < k; ++i) s_eye.coefficients().row(i + i * k) = s.coefficients().row(0);
    add_psd(AffineExpr::block({{s_eye, v}, {v.transpose(), s}}), 0.0, base + ".arrow");
    add_objective(s, weight);
  }
}

std::map<std::string, Matrix> ConicProblem::unpack(const Vector& x) const {
  std::map<std::string, Matrix> out;
  for (const auto& v : vars_) out[v.name] = variable(v.name).evaluate(x);
  return out;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

void evaluate_residuals(const ConicProblem& problem, const Vector& x, double& max_equality_residual,
                        double& min_cone_slack) {
  max_equality_residual = 0.0;
  min_cone_slack = std::numeric_limits<double>::infinity();
  for (const auto& c : problem.equalities()) {
    const Matrix r = c.expr.evaluate(x);
    if (r.size()) max_equality_residual = std::max(max_equality_residual, r.cwiseAbs().maxCoeff());
  }
  for (const auto& c : problem.nonnegatives()) {
    const Matrix r = c.expr.evaluate(x);
    if (r.size()) min_cone_slack = std::min(min_cone_slack, r.minCoeff());
  }
  for (const auto& c : problem.psd_constraints()) {
    const Matrix s = c.expr.evaluate(x);
    min_cone_slack = std::min(min_cone_slack, min_sym_eigenvalue(s) - c.margin);
  }
}

// ---------------------------------------------------------------------------
// Interior-point core
//
// Standard pair over block-diagonal symmetric space:
//   (P)  min <C,X>  s.t. <A_i,X> = b_i,  X PSD
//   (D)  max b'y    s.t. Z = C - sum_i y_i A_i PSD
// The user problem  min c'w s.t. F0 + sum w_i F_i PSD  is (D) with y = w,
// b = -c, C = F0, A_i = -F_i.

namespace {

struct Block {
  int n = 0;
  bool diagonal = false;
  Matrix A;  ///< (n*n or n) x k, column i = vec(A_i restricted to the block)
  Vector C;  ///< vec(C) or diag(C)
};

using BlockVec = std::vector<Matrix>;  // dense n x n, or n x 1 for diagonal blocks

double inner(const std::vector<Block>& blocks, const BlockVec& x, const BlockVec& z) {
  double s = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) s += (x[b].array() * z[b].array()).sum();
  return s;
}

Matrix as_block(const Block& blk, const Vector& v) {
  if (blk.diagonal) return v;
  return Eigen::Map<const Matrix>(v.data(), blk.n, blk.n);
}

Vector vec_of(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Vector apply_A(const std::vector<Block>& blocks, const BlockVec& x, int k) {
  Vector out = Vector::Zero(k);
  for (std::size_t b = 0; b < blocks.size(); ++b) out += blocks[b].A.transpose() * vec_of(x[b]);
  return out;
}

BlockVec apply_At(const std::vector<Block>& blocks, const Vector& y) {
  BlockVec out(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) out[b] = as_block(blocks[b], blocks[b].A * y);
  return out;
}

double norm_of(const BlockVec& v) {
  double s = 0.0;
  for (const auto& m : v) s += m.squaredNorm();
  return std::sqrt(s);
}

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Largest step a <= cap with x + a*dx PSD.
double max_step(const Block& blk, const Matrix& x, const Matrix& dx) {
  double cap = std::numeric_limits<double>::infinity();
  if (blk.diagonal) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (dx(i, 0) < 0.0) cap = std::min(cap, -x(i, 0) / dx(i, 0));
    }
    return cap;
  }
  Eigen::LLT<Matrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix li_dx = llt.matrixL().solve(dx);
  const Matrix s = llt.matrixL().solve(li_dx.transpose());
  const double lmin = min_sym_eigenvalue(s);
  if (lmin >= 0.0) return cap;
  return -1.0 / lmin;
}

struct IpmResult {
  SolveStatus status = SolveStatus::numerical_failure;
  Vector y;
  double pobj = 0.0;
  double dobj = 0.0;
  bool dual_ok = false;
  int iterations = 0;
  std::string message;
};

IpmResult interior_point(const std::vector<Block>& blocks, const Vector& b, const SolverOptions& opt) {
  const int k = static_cast<int>(b.size());
  const std::size_t nb = blocks.size();
  IpmResult res;
  res.y = Vector::Zero(k);

  BlockVec X(nb), Z(nb);
  double nu = 0.0;
  double c_norm = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    const Block& blk = blocks[i];
    const double n = blk.n;
    nu += n;
    c_norm += blk.C.squaredNorm();
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max(10.0, std::sqrt(n));
    for (int j = 0; j < k; ++j) {
      const double an = blk.A.col(j).norm();
      xi = std::max(xi, n * (1.0 + std::abs(b(j))) / (1.0 + an));
      eta = std::max(eta, an);
    }
    eta = std::max(eta, blk.C.norm());
    if (blk.diagonal) {
      X[i] = Vector::Constant(blk.n, xi);
      Z[i] = Vector::Constant(blk.n, eta);
    } else {
      X[i] = xi * Matrix::Identity(blk.n, blk.n);
      Z[i] = eta * Matrix::Identity(blk.n, blk.n);
    }
  }
  c_norm = std::sqrt(c_norm);
  const double b_norm = b.norm();
  Vector y = Vector::Zero(k);

  BlockVec Cm(nb);
  for (std::size_t i = 0; i < nb; ++i) Cm[i] = as_block(blocks[i], blocks[i].C);

  int stall = 0;
  double best_merit = std::numeric_limits<double>::infinity();
  Vector best_y = y;
  double best_p = 0, best_d = 0, best_pinf = 1, best_dinf = 1, best_gap = 1;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter;
    const Vector ax = apply_A(blocks, X, k);
    const Vector rp = b - ax;
    const BlockVec aty = apply_At(blocks, y);
    BlockVec Rd(nb);
    for (std::size_t i = 0; i < nb; ++i) Rd[i] = Cm[i] - Z[i] - aty[i];
    const double mu = inner(blocks, X, Z) / nu;
    const double pobj = inner(blocks, Cm, X);
    const double dobj = b.dot(y);
    const double pinf = rp.norm() / (1.0 + b_norm);
    const double dinf = norm_of(Rd) / (1.0 + c_norm);
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double gap_rel = inner(blocks, X, Z) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (opt.verbose) {
      std::cerr << "ipm " << iter << " pobj=" << pobj << " dobj=" << dobj << " pinf=" << pinf << " dinf=" << dinf
                << " gap=" << relgap << " mu=" << mu << '\n';
    }
    const double merit = std::max({dinf, std::min(relgap, gap_rel), pinf * 1e-3});
    if (merit < best_merit) {
      best_merit = merit;
      best_y = y;
      best_p = pobj;
      best_d = dobj;
      best_pinf = pinf;
      best_dinf = dinf;
      best_gap = std::min(relgap, gap_rel);
    }
    if (pinf <= opt.feas_tol && dinf <= opt.feas_tol && std::min(relgap, gap_rel) <= opt.opt_tol) {
      res.status = SolveStatus::optimal;
      res.y = y;
      res.pobj = pobj;
      res.dobj = dobj;
      res.dual_ok = true;
      return res;
    }
    // (D) infeasible: X nearly in the kernel of A with <C,X> < 0.
    if (pobj < 0.0 && ax.norm() <= 1e-8 * (-pobj) && -pobj > 1e6) {
      res.status = SolveStatus::infeasible;
      res.message = "primal infeasibility certificate";
      res.y = y;
      return res;
    }
    // (D) unbounded: dual objective diverging while dual-feasible.
    if (dinf <= opt.feas_tol && dobj > 1e10 * (1.0 + c_norm)) {
      res.status = SolveStatus::unbounded;
      res.message = "objective diverges along a feasible ray";
      res.y = y;
      return res;
    }

    // Schur complement M_ij = <A_i, X A_j Z^-1> and Z^-1.
    BlockVec Zinv(nb);
    Matrix M = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < nb; ++i) {
      const Block& blk = blocks[i];
      if (blk.diagonal) {
        Zinv[i] = Z[i].array().inverse().matrix();
        const Vector w = X[i].array() * Zinv[i].array();
        M.noalias() += blk.A.transpose() * w.asDiagonal() * blk.A;
      } else {
        Eigen::LLT<Matrix> llt(Z[i]);
        if (llt.info() != Eigen::Success) {
          res.message = "slack matrix lost definiteness";
          goto finish;
        }
        Zinv[i] = llt.solve(Matrix::Identity(blk.n, blk.n));
        Zinv[i] = sym(Zinv[i]);
        Matrix W(blk.n * blk.n, k);
        for (int j = 0; j < k; ++j) {
          const Eigen::Map<const Matrix> aj(blk.A.col(j).data(), blk.n, blk.n);
          const Matrix t = X[i] * aj * Zinv[i];
          W.col(j) = vec_of(t);
        }
        M.noalias() += blk.A.transpose() * W;
      }
    }
    {
      M = sym(M);
      Eigen::LLT<Matrix> mchol(M);
      Eigen::LDLT<Matrix> mldlt;
      bool use_ldlt = false;
      if (mchol.info() != Eigen::Success) {
        const double reg = 1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
        mchol.compute(M + reg * Matrix::Identity(k, k));
        if (mchol.info() != Eigen::Success) {
          mldlt.compute(M);
          use_ldlt = true;
        }
      }
      auto solve_m = [&](const Vector& r) -> Vector { return use_ldlt ? Vector(mldlt.solve(r)) : Vector(mchol.solve(r)); };

      // Direction for a given centering target and second-order correction.
      auto direction = [&](double target, const BlockVec* corr, BlockVec& dX, Vector& dy, BlockVec& dZ) {
        BlockVec H(nb);
        for (std::size_t i = 0; i < nb; ++i) {
          if (blocks[i].diagonal) {
            Vector h = target * Zinv[i] - X[i] - Vector(X[i].array() * Rd[i].array() * Zinv[i].array());
            if (corr) h += (*corr)[i];
            H[i] = h;
          } else {
            Matrix h = target * Zinv[i] - X[i] - X[i] * Rd[i] * Zinv[i];
            if (corr) h += (*corr)[i];
            H[i] = h;
          }
        }
        dy = solve_m(rp - apply_A(blocks, H, k));
        const BlockVec atdy = apply_At(blocks, dy);
        dZ.assign(nb, Matrix());
        dX.assign(nb, Matrix());
        for (std::size_t i = 0; i < nb; ++i) {
          dZ[i] = Rd[i] - atdy[i];
          if (blocks[i].diagonal) {
            Vector dx = target * Zinv[i] - X[i] - Vector(X[i].array() * dZ[i].array() * Zinv[i].array());
            if (corr) dx += (*corr)[i];
            dX[i] = dx;
          } else {
            Matrix dx = target * Zinv[i] - X[i] - X[i] * dZ[i] * Zinv[i];
            if (corr) dx += (*corr)[i];
            dX[i] = sym(dx);
          }
        }
      };
      auto steps = [&](const BlockVec& dX, const BlockVec& dZ, double& ap, double& ad) {
        ap = std::numeric_limits<double>::infinity();
        ad = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nb; ++i) {
          ap = std::min(ap, max_step(blocks[i], X[i], dX[i]));
          ad = std::min(ad, max_step(blocks[i], Z[i], dZ[i]));
        }
      };

      BlockVec dXa, dZa;
      Vector dya;
      direction(0.0, nullptr, dXa, dya, dZa);
      double apa, ada;
      steps(dXa, dZa, apa, ada);
      apa = std::min(1.0, apa);
      ada = std::min(1.0, ada);
      double mu_aff = 0.0;
      for (std::size_t i = 0; i < nb; ++i) {
        mu_aff += ((X[i] + apa * dXa[i]).array() * (Z[i] + ada * dZa[i]).array()).sum();
      }
      mu_aff /= nu;
      double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
      sigma = std::clamp(sigma, 0.0, 1.0);

      BlockVec corr(nb);
      for (std::size_t i = 0; i < nb; ++i) {
        if (blocks[i].diagonal) {
          corr[i] = -Vector(dXa[i].array() * dZa[i].array() * Zinv[i].array());
        } else {
          corr[i] = -dXa[i] * dZa[i] * Zinv[i];
        }
      }
      BlockVec dX, dZ;
      Vector dy;
      direction(sigma * mu, &corr, dX, dy, dZ);
      double ap, ad;
      steps(dX, dZ, ap, ad);
      const double tau = 0.95;
      ap = std::min(1.0, tau * ap);
      ad = std::min(1.0, tau * ad);
      if (!std::isfinite(ap) || !std::isfinite(ad) || !dy.allFinite()) {
        res.message = "non-finite search direction";
        goto finish;
      }
      for (std::size_t i = 0; i < nb; ++i) {
        X[i] += ap * dX[i];
        Z[i] += ad * dZ[i];
        if (!blocks[i].diagonal) {
          X[i] = sym(X[i]);
          Z[i] = sym(Z[i]);
        }
      }
      y += ad * dy;
      stall = (std::max(ap, ad) < 1e-8) ? stall + 1 : 0;
      if (stall >= 5) {
        res.message = "step length stagnated";
        goto finish;
      }
    }
  }
  res.message = "iteration limit reached";

finish:
  // Accept a reduced-accuracy iterate rather than failing outright.
  res.y = best_y;
  res.pobj = best_p;
  res.dobj = best_d;
  res.dual_ok = best_pinf <= 1e-6;
  if (best_dinf <= 1e-6 && best_gap <= 1e-6) {
    res.status = SolveStatus::optimal;
    res.message += " (reduced accuracy)";
  } else {
    res.status = SolveStatus::numerical_failure;
  }
  return res;
}

/// Orthonormal basis (columns) of the row space of m, via column-pivoted QR of m'.
Matrix row_space_basis(const Matrix& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return Matrix(m.cols(), 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(m.transpose());
  const double maxpiv = qr.maxPivot();
  if (maxpiv == 0.0) return Matrix(m.cols(), 0);
  qr.setThreshold(rel_tol * std::max<double>(1.0, static_cast<double>(std::max(m.rows(), m.cols()))));
  const Eigen::Index r = qr.rank();
  const Matrix q = qr.householderQ() * Matrix::Identity(m.cols(), r);
  return q;
}

}  // namespace

ConicSolution solve(const ConicProblem& problem, const SolverOptions& options) {
  ConicSolution sol;
  const int p = problem.scalar_count();
  if (p == 0) throw DomainError("solve: problem declares no variables");
  const Vector c = problem.objective();

  // 1. Eliminate equalities: x = x0 + N z.
  int q = 0;
  for (const auto& e : problem.equalities()) q += e.expr.rows() * e.expr.cols();
  Matrix aeq(q, p);
  Vector beq(q);
  {
    int r = 0;
    for (const auto& e : problem.equalities()) {
      const AffineExpr ex = e.expr.padded(p);
      const int len = ex.rows() * ex.cols();
      aeq.middleRows(r, len) = ex.coefficients();
      beq.segment(r, len) = -ex.constant_vec();
      r += len;
    }
  }
  Vector x0 = Vector::Zero(p);
  Matrix basis = Matrix::Identity(p, p);
  if (q > 0) {
    Eigen::BDCSVD<Matrix> svd(aeq, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    const double thresh = 1e-12 * (s.size() ? s(0) : 0.0) * std::max(q, p);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > thresh && s(i) > 0.0) ++rank;
    }
    x0 = svd.matrixV().leftCols(rank) *
         (svd.matrixU().leftCols(rank).transpose() * beq).cwiseQuotient(s.head(rank));
    const double eq_res = (aeq * x0 - beq).cwiseAbs().maxCoeff();
    if (eq_res > options.feas_tol * (1.0 + beq.cwiseAbs().maxCoeff())) {
      sol.status = SolveStatus::infeasible;
      sol.message = "equality constraints are inconsistent";
      sol.x = x0;
      evaluate_residuals(problem, x0, sol.max_equality_residual, sol.min_psd_eigenvalue);
      return sol;
    }
    basis = svd.matrixV().rightCols(p - rank);
  }

  // 2. Cone blocks in z.
  std::vector<Block> blocks;
  for (const auto& con : problem.psd_constraints()) {
    const AffineExpr ex = con.expr.padded(p);
    Block blk;
    blk.n = ex.rows();
    Vector cst = ex.constant_vec() + ex.coefficients() * x0;
    for (int i = 0; i < blk.n; ++i) cst(i + i * blk.n) -= con.margin;
    blk.C = cst;
    blk.A = -(ex.coefficients() * basis);
    blocks.push_back(std::move(blk));
  }
  {
    int len = 0;
    for (const auto& con : problem.nonnegatives()) len += con.expr.rows() * con.expr.cols();
    if (len > 0) {
      Block blk;
      blk.n = len;
      blk.diagonal = true;
      blk.C.resize(len);
      blk.A.resize(len, basis.cols());
      int r = 0;
      for (const auto& con : problem.nonnegatives()) {
        const AffineExpr ex = con.expr.padded(p);
        const int l = ex.rows() * ex.cols();
        blk.C.segment(r, l) = ex.constant_vec() + ex.coefficients() * x0;
        blk.A.middleRows(r, l) = -(ex.coefficients() * basis);
        r += l;
      }
      blocks.push_back(std::move(blk));
    }
  }

  // 3. Drop directions invisible to every cone (minimum-norm choice); detect free descent.
  const Vector cz = basis.transpose() * c;
  int rows_all = 0;
  for (const auto& blk : blocks) rows_all += static_cast<int>(blk.A.rows());
  Matrix gall(rows_all, basis.cols());
  {
    int r = 0;
    for (const auto& blk : blocks) {
      gall.middleRows(r, blk.A.rows()) = blk.A;
      r += static_cast<int>(blk.A.rows());
    }
  }
  const Matrix vr = row_space_basis(gall, 1e-12);
  const Vector c_free = cz - vr * (vr.transpose() * cz);
  if (c_free.norm() > 1e-9 * (1.0 + cz.norm())) {
    sol.status = SolveStatus::unbounded;
    sol.message = "objective decreases along a direction no constraint restricts";
    sol.x = x0;
    evaluate_residuals(problem, x0, sol.max_equality_residual, sol.min_psd_eigenvalue);
    return sol;
  }
  for (auto& blk : blocks) blk.A = blk.A * vr;
  const Vector cw = vr.transpose() * cz;
  const Matrix full_basis = basis * vr;

  Vector w = Vector::Zero(vr.cols());
  if (vr.cols() == 0) {
    // Nothing to optimize: the constant point is the only candidate.
    sol.x = x0;
    evaluate_residuals(problem, x0, sol.max_equality_residual, sol.min_psd_eigenvalue);
    sol.status = sol.min_psd_eigenvalue >= -options.feas_tol ? SolveStatus::optimal : SolveStatus::infeasible;
  } else if (blocks.empty()) {
    sol.x = x0;
    sol.status = cw.norm() > 0 ? SolveStatus::unbounded : SolveStatus::optimal;
    evaluate_residuals(problem, x0, sol.max_equality_residual, sol.min_psd_eigenvalue);
  } else {
    const IpmResult ipm = interior_point(blocks, -cw, options);
    sol.iterations = ipm.iterations;
    sol.message = ipm.message;
    sol.status = ipm.status;
    w = ipm.y;
    sol.x = x0 + full_basis * w;
    sol.has_dual_certificate = ipm.dual_ok;
    sol.duality_gap = std::abs(ipm.pobj - ipm.dobj);
    evaluate_residuals(problem, sol.x, sol.max_equality_residual, sol.min_psd_eigenvalue);
  }
  if (problem.psd_constraints().empty() && problem.nonnegatives().empty()) sol.min_psd_eigenvalue = 0.0;
  sol.objective_value = c.dot(sol.x) + problem.objective_offset();
  sol.values = problem.unpack(sol.x);
  if (sol.status == SolveStatus::optimal &&
      (sol.max_equality_residual > options.feas_tol || sol.min_psd_eigenvalue < -options.feas_tol)) {
    sol.status = SolveStatus::numerical_failure;
    sol.message += "; residual recheck failed";
  }
  return sol;
}

}  // namespace ddmr::sdp
