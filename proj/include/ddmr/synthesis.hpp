#pragma once

#include <optional>
#include <string>
#include <utility>

#include "ddmr/lti.hpp"
#include "ddmr/sdp.hpp"
#include "ddmr/snapshots.hpp"

namespace ddmr {

enum class SynthesisMode { exact, relaxed_unstab, sdp, averaged_sdp };

const char* to_string(SynthesisMode m);
SynthesisMode synthesis_mode_from_string(const std::string& s);

struct SynthesisOptions {
  SynthesisMode mode = SynthesisMode::sdp;
  double lambda = 1.0;          ///< weight of the B_M matching term
  double lambda1 = 0.0;         ///< weight of the trace(Z) >= ||Qx P^-1 Qx'|| regularizer
  double dc_gain_weight = 0.0;  ///< weight of ||P - X1 Qx - X1 Qr||
  sdp::NormKind norm = sdp::NormKind::l1;
  double lmi_margin = 1e-10;
  /// Relative residual above which the exact linear system counts as inconsistent.
  double exact_tolerance = 1e-6;
  /// Run the rank check on [U0; X0] first and refuse when it fails.
  bool require_rank_condition = true;
  sdp::SolverOptions solver;

  void validate() const;
};

enum class SynthesisStatus { optimal, infeasible, unbounded, numerical_failure, rank_deficient };

const char* to_string(SynthesisStatus s);

struct SynthesisOutcome {
  SynthesisMode mode = SynthesisMode::exact;
  SynthesisStatus status = SynthesisStatus::numerical_failure;
  ControllerGains gains;
  std::optional<Matrix> Gx, Gr;
  std::optional<Matrix> Qx, Qr;
  std::optional<Matrix> P;
  double objective_value = 0.0;
  /// Norm of X1 Gx - A_M and X1 Gr - B_M (spectral), i.e. the data-side matching residuals.
  double residual_Am = 0.0;
  double residual_Bm = 0.0;
  /// Smallest eigenvalue of [[P, X1 Qx], [(X1 Qx)', P]] (SDP modes).
  double lmi_min_eigenvalue = 0.0;
  /// Data blocks retained for the stability certificate.
  std::optional<Matrix> X1;
  std::optional<Matrix> U0;
  std::string diagnostic;

  bool ok() const { return status == SynthesisStatus::optimal; }
};

/// Solves [X1; X0] Gx = [A_M; I] and [X1; X0] Gr = [B_M; 0] (minimum-norm least squares).
SynthesisOutcome solve_exact(const SnapshotMatrices& snap, const ReferenceModel& ref,
                             const SynthesisOptions& opts = {});

/// min ||X1 Gx - A_M|| + lambda ||X1 Gr - B_M||  s.t. X0 Gx = I, X0 Gr = 0.
SynthesisOutcome solve_relaxed(const SnapshotMatrices& snap, const ReferenceModel& ref,
                               const SynthesisOptions& opts);

/// The conic program behind solve_sdp, normalized to an LMI margin of 1
/// (the program is positively homogeneous, so the margin only fixes scale).
sdp::ConicProblem build_sdp_problem(const SnapshotMatrices& snap, const ReferenceModel& ref,
                                    const SynthesisOptions& opts);

/// Lyapunov-constrained matching on (possibly averaged) snapshots:
///   min ||X1 Qx - A_M P|| + lambda ||X1 Qr - B_M P|| [+ lambda1 tr Z] [+ w ||P - X1 Qx - X1 Qr||]
///   s.t. X0 Qx = P, X0 Qr = 0, [[P, X1 Qx], [(X1 Qx)', P]] >= margin I  [, [[Z, Qx], [Qx', P]] >= 0]
SynthesisOutcome solve_sdp(const SnapshotMatrices& snap, const ReferenceModel& ref, const SynthesisOptions& opts);

/// Dispatches on opts.mode.
SynthesisOutcome synthesize(const SnapshotMatrices& snap, const ReferenceModel& ref, const SynthesisOptions& opts);

/// K_x = U0 Qx P^-1, K_r = U0 Qr P^-1 with a Cholesky solve against P.
ControllerGains recover_gains(const Matrix& Qx, const Matrix& Qr, const Matrix& P, const Matrix& U0);

/// A_cl = X1 Gx, B_cl = X1 Gr; with a true plant, (X1 + W0) G with W0 = A V0 - V1.
std::pair<Matrix, Matrix> reconstruct_closed_loop(const SnapshotMatrices& snap, const Matrix& Gx, const Matrix& Gr,
                                                  const Matrix* true_A = nullptr);

struct MatchingResiduals {
  double res_A = 0.0;
  double res_B = 0.0;
};

/// Spectral norms of A + B K_x - A_M and B K_r - B_M.
MatchingResiduals verify_matching(const StateSpaceModel& model, const ControllerGains& gains,
                                  const ReferenceModel& ref);

/// Smallest eigenvalue of [[P, S], [S', P]].
double lyapunov_lmi_min_eigenvalue(const Matrix& P, const Matrix& S);

/// JSON document (gains row-major, residuals, status, objective; decision variables when present).
std::string outcome_to_json(const SynthesisOutcome& outcome);
SynthesisOutcome outcome_from_json(const std::string& text);

}  // namespace ddmr
