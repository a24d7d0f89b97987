#include "ddmr/synthesis.hpp"

#include <cmath>
#include <sstream>

#include "ddmr/errors.hpp"
#include "ddmr/io.hpp"

namespace ddmr {

const char* to_string(SynthesisMode m) {
  switch (m) {
    case SynthesisMode::exact: return "exact";
    case SynthesisMode::relaxed_unstab: return "relaxed_unstab";
    case SynthesisMode::sdp: return "sdp";
    case SynthesisMode::averaged_sdp: return "averaged_sdp";
  }
  return "unknown";
}

SynthesisMode synthesis_mode_from_string(const std::string& s) {
  if (s == "exact") return SynthesisMode::exact;
  if (s == "relaxed_unstab" || s == "relaxed") return SynthesisMode::relaxed_unstab;
  if (s == "sdp") return SynthesisMode::sdp;
  if (s == "averaged_sdp" || s == "averaged") return SynthesisMode::averaged_sdp;
  throw std::invalid_argument("unknown synthesis mode '" + s + "'");
}

const char* to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::optimal: return "optimal";
    case SynthesisStatus::infeasible: return "infeasible";
    case SynthesisStatus::unbounded: return "unbounded";
    case SynthesisStatus::numerical_failure: return "numerical_failure";
    case SynthesisStatus::rank_deficient: return "rank_deficient";
  }
  return "unknown";
}

namespace {

SynthesisStatus status_from_string(const std::string& s) {
  for (auto st : {SynthesisStatus::optimal, SynthesisStatus::infeasible, SynthesisStatus::unbounded,
                  SynthesisStatus::numerical_failure, SynthesisStatus::rank_deficient}) {
    if (s == to_string(st)) return st;
  }
  throw FormatError("unknown synthesis status '" + s + "'");
}

SynthesisStatus from_solver(sdp::SolveStatus s) {
  switch (s) {
    case sdp::SolveStatus::optimal: return SynthesisStatus::optimal;
    case sdp::SolveStatus::infeasible: return SynthesisStatus::infeasible;
    case sdp::SolveStatus::unbounded: return SynthesisStatus::unbounded;
    case sdp::SolveStatus::numerical_failure: return SynthesisStatus::numerical_failure;
  }
  return SynthesisStatus::numerical_failure;
}

void check_dims(const SnapshotMatrices& snap, const ReferenceModel& ref) {
  snap.validate();
  if (snap.states() != ref.states()) {
    throw DimensionError("synthesis: reference model order differs from the data's state dimension");
  }
}

/// Empty optional when the rank condition holds (or is waived); otherwise a rank_deficient outcome.
std::optional<SynthesisOutcome> rank_gate(const SnapshotMatrices& snap, const SynthesisOptions& opts) {
  if (!opts.require_rank_condition) return std::nullopt;
  const RankReport r = check_rank_condition(snap);
  if (r.satisfied) return std::nullopt;
  SynthesisOutcome out;
  out.mode = opts.mode;
  out.status = SynthesisStatus::rank_deficient;
  std::ostringstream msg;
  msg << "rank condition violated: rank([U0; X0]) = " << r.stacked_rank << " < n + m = " << r.required
      << " (T = " << snap.length() << ")";
  out.diagnostic = msg.str();
  return out;
}

double relative_residual(const Matrix& residual, const Matrix& rhs) {
  const double r = residual.norm();
  const double s = rhs.norm();
  return s > 0.0 ? r / s : r;
}

}  // namespace

void SynthesisOptions::validate() const {
  if (!(lambda > 0.0)) throw DomainError("SynthesisOptions: lambda must be > 0");
  if (!(lambda1 >= 0.0)) throw DomainError("SynthesisOptions: lambda1 must be >= 0");
  if (!(dc_gain_weight >= 0.0)) throw DomainError("SynthesisOptions: dc_gain_weight must be >= 0");
  if (!(lmi_margin > 0.0) || !std::isfinite(lmi_margin)) {
    throw DomainError("SynthesisOptions: lmi_margin must be finite and > 0");
  }
}

SynthesisOutcome solve_exact(const SnapshotMatrices& snap, const ReferenceModel& ref, const SynthesisOptions& opts) {
  check_dims(snap, ref);
  if (auto gate = rank_gate(snap, opts)) {
    gate->mode = SynthesisMode::exact;
    return *gate;
  }
  const int n = snap.states();
  Matrix stacked(2 * n, snap.length());
  stacked << snap.X1, snap.X0;
  Matrix rhs_x(2 * n, n), rhs_r(2 * n, n);
  rhs_x << ref.A(), Matrix::Identity(n, n);
  rhs_r << ref.B(), Matrix::Zero(n, n);

  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked);
  const Matrix gx = cod.solve(rhs_x);
  const Matrix gr = cod.solve(rhs_r);
  const double rel_x = relative_residual(stacked * gx - rhs_x, rhs_x);
  const double rel_r = relative_residual(stacked * gr - rhs_r, rhs_r);

  SynthesisOutcome out;
  out.mode = SynthesisMode::exact;
  out.Gx = gx;
  out.Gr = gr;
  out.gains = {snap.U0 * gx, snap.U0 * gr};
  out.residual_Am = spectral_norm(snap.X1 * gx - ref.A());
  out.residual_Bm = spectral_norm(snap.X1 * gr - ref.B());
  out.objective_value = out.residual_Am + out.residual_Bm;
  out.X1 = snap.X1;
  out.U0 = snap.U0;
  if (rel_x > opts.exact_tolerance || rel_r > opts.exact_tolerance) {
    out.status = SynthesisStatus::infeasible;
    std::ostringstream msg;
    msg << "matching equations inconsistent: relative residuals " << rel_x << " (A_M) and " << rel_r
        << " (B_M) exceed " << opts.exact_tolerance << "; the reference model cannot be matched from these data";
    out.diagnostic = msg.str();
  } else {
    out.status = SynthesisStatus::optimal;
  }
  return out;
}

SynthesisOutcome solve_relaxed(const SnapshotMatrices& snap, const ReferenceModel& ref, const SynthesisOptions& opts) {
  opts.validate();
  check_dims(snap, ref);
  if (auto gate = rank_gate(snap, opts)) {
    gate->mode = SynthesisMode::relaxed_unstab;
    return *gate;
  }
  const int n = snap.states();
  const int t = snap.length();
  sdp::ConicProblem prob;
  const auto gx = prob.add_variable("Gx", t, n);
  const auto gr = prob.add_variable("Gr", t, n);
  prob.add_equality(snap.X0 * gx - Matrix::Identity(n, n), "X0 Gx = I");
  prob.add_equality(snap.X0 * gr, "X0 Gr = 0");
  prob.add_norm_objective(snap.X1 * gx - ref.A(), 1.0, opts.norm, "A_M");
  prob.add_norm_objective(snap.X1 * gr - ref.B(), opts.lambda, opts.norm, "B_M");

  const sdp::ConicSolution sol = sdp::solve(prob, opts.solver);
  SynthesisOutcome out;
  out.mode = SynthesisMode::relaxed_unstab;
  out.status = from_solver(sol.status);
  out.diagnostic = sol.message;
  out.objective_value = sol.objective_value;
  out.X1 = snap.X1;
  out.U0 = snap.U0;
  const Matrix& gxv = sol.values.at("Gx");
  const Matrix& grv = sol.values.at("Gr");
  out.Gx = gxv;
  out.Gr = grv;
  out.gains = {snap.U0 * gxv, snap.U0 * grv};
  out.residual_Am = spectral_norm(snap.X1 * gxv - ref.A());
  out.residual_Bm = spectral_norm(snap.X1 * grv - ref.B());
  if (sol.status == sdp::SolveStatus::infeasible) {
    out.diagnostic = "consistency constraints X0 Gx = I, X0 Gr = 0 cannot be met (X0 lacks full row rank?): " +
                     sol.message;
  }
  return out;
}

sdp::ConicProblem build_sdp_problem(const SnapshotMatrices& snap, const ReferenceModel& ref,
                                    const SynthesisOptions& opts) {
  opts.validate();
  check_dims(snap, ref);
  const int n = snap.states();
  const int t = snap.length();
  sdp::ConicProblem prob;
  const auto qx = prob.add_variable("Qx", t, n);
  const auto qr = prob.add_variable("Qr", t, n);
  const auto p = prob.add_variable("P", n, n, sdp::VariableKind::symmetric);
  std::optional<sdp::AffineExpr> z;
  if (opts.lambda1 > 0.0) z = prob.add_variable("Z", t, t, sdp::VariableKind::symmetric);

  prob.add_equality(snap.X0 * qx - p, "X0 Qx = P");
  prob.add_equality(snap.X0 * qr, "X0 Qr = 0");
  const auto x1qx = snap.X1 * qx;
  const auto x1qr = snap.X1 * qr;
  prob.add_psd(sdp::AffineExpr::block({{p, x1qx}, {x1qx.transpose(), p}}), 1.0, "lyapunov");
  prob.add_norm_objective(x1qx - ref.A() * p, 1.0, opts.norm, "A_M");
  prob.add_norm_objective(x1qr - ref.B() * p, opts.lambda, opts.norm, "B_M");
  if (z) {
    prob.add_psd(sdp::AffineExpr::block({{*z, qx}, {qx.transpose(), p}}), 0.0, "M<=Z");
    prob.add_objective(z->trace(), opts.lambda1);
  }
  if (opts.dc_gain_weight > 0.0) {
    prob.add_norm_objective(p - x1qx - x1qr, opts.dc_gain_weight, opts.norm, "dc_gain");
  }
  return prob;
}

double lyapunov_lmi_min_eigenvalue(const Matrix& P, const Matrix& S) {
  const auto n = P.rows();
  Matrix lmi(2 * n, 2 * n);
  lmi << P, S, S.transpose(), P;
  return min_sym_eigenvalue(lmi);
}

SynthesisOutcome solve_sdp(const SnapshotMatrices& snap, const ReferenceModel& ref, const SynthesisOptions& opts) {
  opts.validate();
  if (!(opts.lmi_margin > 0.0)) {
    throw DomainError("solve_sdp: lmi_margin must be > 0 (the program is homogeneous; the margin fixes its scale)");
  }
  check_dims(snap, ref);
  SynthesisOutcome out;
  out.mode = opts.mode == SynthesisMode::averaged_sdp ? SynthesisMode::averaged_sdp : SynthesisMode::sdp;
  if (auto gate = rank_gate(snap, opts)) {
    gate->mode = out.mode;
    return *gate;
  }
  const sdp::ConicProblem prob = build_sdp_problem(snap, ref, opts);
  const sdp::ConicSolution sol = sdp::solve(prob, opts.solver);
  out.status = from_solver(sol.status);
  out.diagnostic = sol.message;
  out.X1 = snap.X1;
  out.U0 = snap.U0;
  if (sol.status == sdp::SolveStatus::infeasible) {
    out.diagnostic = "no stabilizing certificate found from these data: " + sol.message;
    return out;
  }
  if (sol.status != sdp::SolveStatus::optimal) return out;

  const Matrix& qx = sol.values.at("Qx");
  const Matrix& qr = sol.values.at("Qr");
  const Matrix p = 0.5 * (sol.values.at("P") + sol.values.at("P").transpose());
  try {
    out.gains = recover_gains(qx, qr, p, snap.U0);
  } catch (const SingularityError& e) {
    out.status = SynthesisStatus::numerical_failure;
    out.diagnostic = e.what();
    return out;
  }
  const Eigen::LLT<Matrix> llt(p);
  const Matrix gx = llt.solve(qx.transpose()).transpose();
  const Matrix gr = llt.solve(qr.transpose()).transpose();
  out.Gx = gx;
  out.Gr = gr;
  out.residual_Am = spectral_norm(snap.X1 * gx - ref.A());
  out.residual_Bm = spectral_norm(snap.X1 * gr - ref.B());

  // Rescale from the normalized program (margin 1) to the requested margin.
  const double s = opts.lmi_margin;
  out.Qx = s * qx;
  out.Qr = s * qr;
  out.P = s * p;
  out.objective_value = s * sol.objective_value;
  out.lmi_min_eigenvalue = lyapunov_lmi_min_eigenvalue(*out.P, snap.X1 * *out.Qx);
  return out;
}

SynthesisOutcome synthesize(const SnapshotMatrices& snap, const ReferenceModel& ref, const SynthesisOptions& opts) {
  switch (opts.mode) {
    case SynthesisMode::exact: return solve_exact(snap, ref, opts);
    case SynthesisMode::relaxed_unstab: return solve_relaxed(snap, ref, opts);
    case SynthesisMode::sdp:
    case SynthesisMode::averaged_sdp: return solve_sdp(snap, ref, opts);
  }
  throw std::invalid_argument("synthesize: unknown mode");
}

ControllerGains recover_gains(const Matrix& Qx, const Matrix& Qr, const Matrix& P, const Matrix& U0) {
  const auto n = P.rows();
  if (P.cols() != n || Qx.cols() != n || Qr.cols() != n || Qx.rows() != Qr.rows() || U0.cols() != Qx.rows()) {
    throw DimensionError("recover_gains: dimension mismatch");
  }
  const Matrix ps = 0.5 * (P + P.transpose());
  const Vector ev = sym_eigenvalues(ps);
  if (!(ev(0) > 1e-12 * std::abs(ev(n - 1))) || !(ev(n - 1) > 0.0)) {
    throw SingularityError("recover_gains: P is not (numerically) positive definite");
  }
  const Eigen::LLT<Matrix> llt(ps);
  if (llt.info() != Eigen::Success) throw SingularityError("recover_gains: Cholesky factorization of P failed");
  // K = U0 Q P^-1  <=>  K' = P^-1 (U0 Q)'
  ControllerGains g;
  g.Kx = llt.solve((U0 * Qx).transpose()).transpose();
  g.Kr = llt.solve((U0 * Qr).transpose()).transpose();
  return g;
}

std::pair<Matrix, Matrix> reconstruct_closed_loop(const SnapshotMatrices& snap, const Matrix& Gx, const Matrix& Gr,
                                                  const Matrix* true_A) {
  snap.validate();
  if (Gx.rows() != snap.length() || Gr.rows() != snap.length()) {
    throw DimensionError("reconstruct_closed_loop: G must have T rows");
  }
  if (!true_A) return {snap.X1 * Gx, snap.X1 * Gr};
  if (!snap.has_noise_blocks()) {
    throw MissingOracleError("reconstruct_closed_loop: oracle mode needs the noise blocks V0, V1");
  }
  if (true_A->rows() != snap.states() || true_A->cols() != snap.states()) {
    throw DimensionError("reconstruct_closed_loop: true A has the wrong shape");
  }
  const Matrix w0 = *true_A * *snap.V0 - *snap.V1;
  const Matrix x1w = snap.X1 + w0;
  return {x1w * Gx, x1w * Gr};
}

MatchingResiduals verify_matching(const StateSpaceModel& model, const ControllerGains& gains,
                                  const ReferenceModel& ref) {
  gains.validate();
  if (gains.Kx.rows() != model.inputs() || gains.Kx.cols() != model.states() || ref.states() != model.states()) {
    throw DimensionError("verify_matching: dimension mismatch");
  }
  return {spectral_norm(model.A() + model.B() * gains.Kx - ref.A()), spectral_norm(model.B() * gains.Kr - ref.B())};
}

std::string outcome_to_json(const SynthesisOutcome& o) {
  io::json j;
  j["mode"] = to_string(o.mode);
  j["status"] = to_string(o.status);
  j["objective"] = o.objective_value;
  j["residual_Am"] = o.residual_Am;
  j["residual_Bm"] = o.residual_Bm;
  j["lmi_min_eigenvalue"] = o.lmi_min_eigenvalue;
  j["diagnostic"] = o.diagnostic;
  if (o.gains.Kx.size() > 0) j["gains"] = io::gains_to_json(o.gains);
  auto put = [&](const char* key, const std::optional<Matrix>& m) {
    if (m) j[key] = io::matrix_to_json(*m);
  };
  put("Gx", o.Gx);
  put("Gr", o.Gr);
  put("Qx", o.Qx);
  put("Qr", o.Qr);
  put("P", o.P);
  put("X1", o.X1);
  put("U0", o.U0);
  return j.dump(2);
}

SynthesisOutcome outcome_from_json(const std::string& text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    throw FormatError(std::string("outcome JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("status") || !j.contains("mode")) {
    throw FormatError("outcome JSON: missing 'status' or 'mode'");
  }
  SynthesisOutcome o;
  o.mode = synthesis_mode_from_string(j["mode"].get<std::string>());
  o.status = status_from_string(j["status"].get<std::string>());
  o.objective_value = j.value("objective", 0.0);
  o.residual_Am = j.value("residual_Am", 0.0);
  o.residual_Bm = j.value("residual_Bm", 0.0);
  o.lmi_min_eigenvalue = j.value("lmi_min_eigenvalue", 0.0);
  o.diagnostic = j.value("diagnostic", std::string());
  if (j.contains("gains")) o.gains = io::gains_from_json(j["gains"]);
  auto get = [&](const char* key, std::optional<Matrix>& m) {
    if (j.contains(key)) m = io::matrix_from_json(j[key], key);
  };
  get("Gx", o.Gx);
  get("Gr", o.Gr);
  get("Qx", o.Qx);
  get("Qr", o.Qr);
  get("P", o.P);
  get("X1", o.X1);
  get("U0", o.U0);
  return o;
}

}  // namespace ddmr
