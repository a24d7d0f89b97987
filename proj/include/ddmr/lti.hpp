#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ddmr/linalg.hpp"

namespace ddmr {

/// Discrete-time plant x(t+1) = A x(t) + B u(t).
class StateSpaceModel {
 public:
  StateSpaceModel(Matrix a, Matrix b);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  int states() const { return static_cast<int>(a_.rows()); }
  int inputs() const { return static_cast<int>(b_.cols()); }

 private:
  Matrix a_;
  Matrix b_;
};

/// Target closed loop x_d(t+1) = A_M x_d(t) + B_M r(t). A_M must be Schur stable.
class ReferenceModel {
 public:
  /// Rejects with DomainError unless spectral_radius(A_M) < 1 - kStabilityTolerance.
  ReferenceModel(Matrix a_m, Matrix b_m);

  static constexpr double kStabilityTolerance = 1e-9;

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  int states() const { return static_cast<int>(a_.rows()); }

 private:
  Matrix a_;
  Matrix b_;
};

/// Static law u(t) = K_x x(t) + K_r r(t).
struct ControllerGains {
  Matrix Kx;
  Matrix Kr;

  void validate() const;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One experiment. Columns are time steps: inputs has T columns, state sequences T+1.
///
/// states_clean and noise are oracle data (only simulations have them);
/// when both are present, states_measured == states_clean + noise exactly.
struct ExperimentRecord {
  Matrix inputs;
  Matrix states_measured;
  std::optional<Matrix> states_clean;
  std::optional<Matrix> noise;
  /// Reference sequence driving a closed-loop experiment (T columns), if any.
  std::optional<Matrix> references;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(inputs.cols()); }
  int states() const { return static_cast<int>(states_measured.rows()); }
  int input_dim() const { return static_cast<int>(inputs.rows()); }
  bool has_oracle() const { return states_clean.has_value() && noise.has_value(); }

  /// Throws DimensionError when lengths or the measured = clean + noise identity disagree.
  void validate() const;

  /// Copy without the oracle fields.
  ExperimentRecord without_oracle() const;
};

/// Column-per-step i.i.d. N(0, sigma^2) draws from a seeded mt19937_64. Portable across platforms.
Matrix gaussian_noise(int rows, int cols, const NoiseSpec& spec);

ExperimentRecord simulate_open_loop(const StateSpaceModel& model, const Matrix& inputs,
                                    const Vector& x0, const NoiseSpec& noise);

/// Noise is added to the measured state, which the controller feeds back:
/// x°(t+1) = (A + B K_x) x°(t) + B K_r r(t) + B K_x v(t).
ExperimentRecord simulate_closed_loop(const StateSpaceModel& model, const ControllerGains& gains,
                                      const Matrix& refs, const Vector& x0, const NoiseSpec& noise);

/// Iterates the reference model; returns n x (T+1).
Matrix reference_response(const ReferenceModel& ref, const Matrix& refs, const Vector& xd0);

/// (I - A)^{-1} * bmap. Throws SingularityError when I - A is singular.
Matrix dc_gain(const Matrix& a, const Matrix& bmap);

/// Per-channel mean removal of measured states (and of clean states, if present).
ExperimentRecord detrend(const ExperimentRecord& record);

/// CSV with header t,u_1..u_m,x_1..x_n[,xo_1..xo_n,v_1..v_n]; the last row has empty input cells.
void write_trajectory_csv(std::ostream& os, const ExperimentRecord& record, bool with_oracle);
ExperimentRecord read_trajectory_csv(std::istream& is);

}  // namespace ddmr
