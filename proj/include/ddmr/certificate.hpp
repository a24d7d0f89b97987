#pragma once

#include <string>
#include <utility>

#include "ddmr/linalg.hpp"
#include "ddmr/snapshots.hpp"

namespace ddmr {

/// Noise-to-data energy ratios of the averaged snapshots:
///   [0; V0][0; V0]' <= gamma1 [U0; X0][U0; X0]'   and   V1 V1' <= gamma2 X1 X1'.
struct NoiseEnergyReport {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  bool gamma1_ok = false;  ///< gamma1 < 0.5 (zero counts as the limit 0+)
  bool both_hold = false;
  bool averaged = false;
};

/// Minimal multipliers via symmetric generalized eigenvalues. Needs the V0/V1 oracle blocks.
NoiseEnergyReport check_noise_energy(const SnapshotMatrices& snap, bool averaged);

struct StabilityCertificate {
  double alpha = 0.0;
  double beta = 0.0;
  Matrix Xi;    ///< X1 M X1' - P
  Matrix Mmat;  ///< Qx P^-1 Qx'
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double lhs = 0.0;  ///< (6 gamma1 + 3 gamma2) / (1 - 2 gamma1)
  double rhs = 0.0;  ///< alpha^2 / (2 beta (2 beta + alpha))
  bool certified = false;
  std::string reason;
};

inline constexpr double kBetaFloor = 1e-12;

/// beta = lambda_max(M) (floored at kBetaFloor); alpha = largest value with Xi + alpha X1 X1' <= 0.
/// Throws DomainError unless Xi is negative definite.
StabilityCertificate compute_alpha_beta(const Matrix& X1bar, const Matrix& Qx, const Matrix& P);

/// Evaluates the sufficient condition lhs < rhs. gamma1 >= 0.5 denies the certificate with a reason.
StabilityCertificate noise_robust_certificate(const NoiseEnergyReport& report, StabilityCertificate cert);

struct GaussianBound {
  double bound = 0.0;
  double confidence = 0.0;
};

/// ||mean of N n x T Gaussian blocks||_2 <= sigma sqrt(T/N) (1 + mu + sqrt(n/T))
/// with probability at least 1 - exp(-T mu^2 / 2).
GaussianBound gaussian_average_bound(double sigma, int T, int N, int n, double mu);

/// True iff A_cl P A_cl' - P has largest eigenvalue below -1e-12.
bool check_lyapunov(const Matrix& A_cl, const Matrix& P);

std::string certificate_to_json(const StabilityCertificate& cert, const NoiseEnergyReport& report);
/// Multi-line, human-readable summary.
std::string certificate_report(const StabilityCertificate& cert, const NoiseEnergyReport& report);

}  // namespace ddmr
