#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ddmr/linalg.hpp"
#include "ddmr/lti.hpp"
#include "ddmr/synthesis.hpp"

namespace ddmr {

/// How experiment data is excited.
///   open_loop: u(t) ~ uniform[lo, hi] i.i.d.
///   closed_loop: u(t) = K_x0 x(t) + K_r0 r(t), r(t) ~ uniform[lo, hi] i.i.d.
struct InputLaw {
  enum class Kind { open_loop, closed_loop };
  Kind kind = Kind::open_loop;
  double lo = -2.0;
  double hi = 2.0;
  Matrix Kx0;
  Matrix Kr0;
};

struct ScenarioConfig {
  std::string name;
  Matrix A, B;
  Matrix A_M, B_M;
  ControllerGains optimal_gains;
  int T = 30;
  std::vector<int> N_list{1, 2, 10, 100};
  /// Target mean SNRs in dB; each is converted to a noise level sigma by calibration.
  std::vector<double> snr_targets_db;
  /// Additional noise levels given directly (sigma = 0 is allowed).
  std::vector<double> sigma_values;
  int runs = 20;
  InputLaw input_law;
  /// x(0) ~ uniform[-x0_range, x0_range], shared by all experiments of a run.
  double x0_range = 1.0;
  /// Draw a fresh excitation and x(0) for every experiment instead of repeating them.
  bool independent_inputs = false;
  std::uint64_t seed = 1;
  /// Worker threads for the run loop (results do not depend on it).
  int threads = 1;
  SynthesisOptions synthesis;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(B.cols()); }
  /// Throws DimensionError / DomainError on inconsistent settings.
  void validate() const;
};

std::string scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const std::string& text);

/// Randomly generated open-loop stable plant (open-loop uniform[-2, 2] inputs) and
/// the tridiagonal unstable plant (closed-loop data under K_x0 = -I, K_r0 = I, r ~ uniform[-5, 10]).
std::pair<ScenarioConfig, ScenarioConfig> builtin_scenarios();

/// Switches a configuration to the long sweep: 100 runs, N up to 1000, SNR targets spanning 3..100 dB.
ScenarioConfig full_scale(ScenarioConfig cfg);

/// Per-channel 10 log10(sum clean^2 / sum noise^2); +inf for channels with zero noise energy.
Vector compute_snr(const Matrix& clean, const Matrix& noise);

/// Spectral norm of K - Kstar.
double gain_error(const Matrix& K, const Matrix& Kstar);

/// Instability test on the oracle closed loop.
inline constexpr double kUnstableThreshold = 1.0 - 1e-9;

/// Deterministic 64-bit mixing of a seed with stream indices.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Excitation signal for run `run` (inputs for open loop, references for closed loop), m x T.
Matrix excitation_signal(const ScenarioConfig& cfg, int run);
Vector initial_state(const ScenarioConfig& cfg, int run);

/// One experiment of run `run` with noise level `sigma`; `stream` selects the noise realization.
ExperimentRecord run_experiment(const ScenarioConfig& cfg, int run, double sigma, std::uint64_t stream);

/// sigma whose mean per-channel SNR hits `target_db` on pilot experiments.
double calibrate_sigma(const ScenarioConfig& cfg, double target_db);

struct NoiseLevel {
  double sigma = 0.0;
  /// NaN when the level was given directly as sigma.
  double snr_target_db = 0.0;
};

std::vector<NoiseLevel> noise_levels(const ScenarioConfig& cfg);

struct RunRecord {
  int run = 0;
  int level = 0;
  double sigma = 0.0;
  double snr_db = 0.0;  ///< mean over channels and experiments
  int N = 0;
  double err_Kx = 0.0;
  double err_Kr = 0.0;
  double rho_cl = 0.0;
  bool stable = false;
  SynthesisStatus status = SynthesisStatus::numerical_failure;
  double ms = 0.0;
  ControllerGains gains;
};

struct Aggregate {
  int level = 0;
  double sigma = 0.0;
  double snr_target_db = 0.0;
  double snr_mean_db = 0.0;  ///< over all rows of the cell
  int N = 0;
  int rows = 0;
  int solved = 0;    ///< status optimal
  int stable = 0;    ///< solved and rho_cl < threshold
  int unstable = 0;  ///< solved and rho_cl >= threshold
  int failed = 0;    ///< solver did not return gains
  double mean_err_Kx = 0.0, std_err_Kx = 0.0;  ///< over stable rows
  double mean_err_Kr = 0.0, std_err_Kr = 0.0;
  double median_err_Kx = 0.0, median_err_Kr = 0.0;  ///< over solved rows
};

struct BenchmarkReport {
  std::string scenario;
  std::vector<NoiseLevel> levels;
  std::vector<int> N_list;
  int runs = 0;
  std::vector<RunRecord> rows;  ///< ordered by (run, level, N index)
  std::vector<Aggregate> aggregates;  ///< ordered by (level, N index)
  double total_seconds = 0.0;

  const Aggregate& aggregate(int level, int N) const;
};

/// Aggregates recomputed from rows (the report stores exactly this).
std::vector<Aggregate> aggregate_rows(const std::vector<RunRecord>& rows, const std::vector<NoiseLevel>& levels,
                                      const std::vector<int>& N_list);

/// For every run and noise level: draw max(N_list) experiments, average the first N, synthesize,
/// and score against the oracle plant. Solver failures are recorded, never thrown.
BenchmarkReport run_monte_carlo(const ScenarioConfig& cfg);

/// Long-format CSV: run,sigma,snr_db,N,err_Kx,err_Kr,rho_cl,stable,status,ms
void write_report_csv(std::ostream& os, const BenchmarkReport& report);
std::vector<RunRecord> read_report_csv(std::istream& is);
std::string report_summary_json(const BenchmarkReport& report);
/// Mean/std of gain errors versus SNR for each N, plus instability counts.
void write_error_curves_csv(std::ostream& os, const BenchmarkReport& report);

/// Piecewise-constant reference: every channel steps through `levels`, `hold` samples each.
Matrix step_reference(int channels, const std::vector<double>& levels = {1.0, -0.5, 2.0}, int hold = 40);

struct MatchingTrajectory {
  Matrix refs;      ///< m x T
  Matrix actual;    ///< n x (T+1), oracle plant under the gains, noiseless
  Matrix desired;   ///< n x (T+1), reference model
};

MatchingTrajectory matching_trajectory(const ScenarioConfig& cfg, const ControllerGains& gains, const Matrix& refs);
void write_matching_csv(std::ostream& os, const MatchingTrajectory& traj);

}  // namespace ddmr
