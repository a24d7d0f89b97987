#pragma once

#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ddmr/benchmark.hpp"
#include "ddmr/snapshots.hpp"

namespace ddmr::testing {

inline ScenarioConfig stable_scenario() { return builtin_scenarios().first; }
inline ScenarioConfig unstable_scenario() { return builtin_scenarios().second; }

/// K_x = B^-1 (A_M - A), K_r = B^-1 B_M for square invertible B.
inline ControllerGains model_gains(const ScenarioConfig& cfg) {
  const auto lu = cfg.B.fullPivLu();
  return {lu.solve(cfg.A_M - cfg.A), lu.solve(cfg.B_M)};
}

/// Snapshots of N repeated experiments of run `run` at noise level sigma.
inline SnapshotMatrices averaged_data(const ScenarioConfig& cfg, int run, double sigma, int N) {
  std::vector<SnapshotMatrices> snaps;
  for (int e = 0; e < N; ++e) snaps.push_back(build_snapshots(run_experiment(cfg, run, sigma, e)));
  return average_snapshots(snaps);
}

/// i.i.d. uniform[lo, hi] entries.
inline Matrix random_matrix(int rows, int cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  boost::random::mt19937_64 gen(seed);
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(gen);
  return m;
}

/// Random matrix rescaled to the given spectral radius.
inline Matrix random_with_radius(int n, double radius, std::uint64_t seed) {
  Matrix a = random_matrix(n, n, seed);
  const double rho = spectral_radius(a);
  return rho > 0 ? Matrix(a * (radius / rho)) : a;
}

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(int n, std::uint64_t seed, double lo = 0.5, double hi = 2.0) {
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, seed));
  const Matrix q = qr.householderQ();
  const Vector d = random_matrix(n, 1, seed ^ 0x5bd1e995ULL, lo, hi).col(0);
  return q * d.asDiagonal() * q.transpose();
}

}  // namespace ddmr::testing
