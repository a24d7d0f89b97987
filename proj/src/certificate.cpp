#include "ddmr/certificate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ddmr/errors.hpp"
#include "ddmr/io.hpp"

namespace ddmr {

NoiseEnergyReport check_noise_energy(const SnapshotMatrices& snap, bool averaged) {
  snap.validate();
  if (!snap.has_noise_blocks()) {
    throw MissingOracleError("check_noise_energy: snapshots carry no noise blocks (oracle data)");
  }
  const int m = snap.inputs();
  const int n = snap.states();
  const int t = snap.length();
  Matrix data(m + n, t), noise = Matrix::Zero(m + n, t);
  data << snap.U0, snap.X0;
  noise.bottomRows(n) = *snap.V0;

  NoiseEnergyReport r;
  r.averaged = averaged;
  r.gamma1 = min_psd_multiplier(noise * noise.transpose(), data * data.transpose());
  r.gamma2 = min_psd_multiplier(*snap.V1 * snap.V1->transpose(), snap.X1 * snap.X1.transpose());
  r.gamma1_ok = r.gamma1 < 0.5;
  r.both_hold = r.gamma1_ok && std::isfinite(r.gamma2);
  return r;
}

StabilityCertificate compute_alpha_beta(const Matrix& X1bar, const Matrix& Qx, const Matrix& P) {
  const auto n = P.rows();
  if (P.cols() != n || X1bar.rows() != n || Qx.cols() != n || Qx.rows() != X1bar.cols()) {
    throw DimensionError("compute_alpha_beta: dimension mismatch");
  }
  const Matrix ps = 0.5 * (P + P.transpose());
  const Eigen::LLT<Matrix> llt(ps);
  if (llt.info() != Eigen::Success) throw SingularityError("compute_alpha_beta: P is not positive definite");

  StabilityCertificate c;
  c.Mmat = Qx * llt.solve(Qx.transpose());
  c.Mmat = 0.5 * (c.Mmat + c.Mmat.transpose());
  c.Xi = X1bar * c.Mmat * X1bar.transpose() - ps;
  c.Xi = 0.5 * (c.Xi + c.Xi.transpose());
  if (!(max_sym_eigenvalue(c.Xi) < 0.0)) {
    throw DomainError("compute_alpha_beta: Xi = X1 M X1' - P is not negative definite; no certificate possible");
  }
  c.beta = std::max(max_sym_eigenvalue(c.Mmat), kBetaFloor);
  // alpha X1 X1' <= -Xi  <=>  alpha <= 1 / lambda_max(pencil(X1 X1', -Xi))
  const double mult = min_psd_multiplier(X1bar * X1bar.transpose(), -c.Xi);
  c.alpha = mult > 0.0 ? 1.0 / mult : std::numeric_limits<double>::infinity();
  return c;
}

StabilityCertificate noise_robust_certificate(const NoiseEnergyReport& report, StabilityCertificate cert) {
  cert.gamma1 = report.gamma1;
  cert.gamma2 = report.gamma2;
  cert.certified = false;
  if (!(report.gamma1 < 0.5)) {
    cert.reason = "noise energy assumption violated: gamma1 >= 0.5";
    cert.lhs = std::numeric_limits<double>::infinity();
    return cert;
  }
  if (!std::isfinite(report.gamma2)) {
    cert.reason = "noise energy assumption violated: V1 has energy outside the range of X1";
    cert.lhs = std::numeric_limits<double>::infinity();
    return cert;
  }
  if (!(cert.alpha > 0.0) || !(cert.beta > 0.0)) {
    cert.reason = "alpha and beta must be positive";
    return cert;
  }
  cert.lhs = (6.0 * report.gamma1 + 3.0 * report.gamma2) / (1.0 - 2.0 * report.gamma1);
  if (std::isinf(cert.alpha)) {
    cert.rhs = std::numeric_limits<double>::infinity();
  } else {
    cert.rhs = cert.alpha * cert.alpha / (2.0 * cert.beta * (2.0 * cert.beta + cert.alpha));
  }
  cert.certified = cert.lhs < cert.rhs;
  cert.reason = cert.certified ? "sufficient condition holds" : "sufficient condition fails (lhs >= rhs)";
  return cert;
}

GaussianBound gaussian_average_bound(double sigma, int T, int N, int n, double mu) {
  if (!(sigma >= 0.0) || T <= 0 || N <= 0 || n <= 0 || !(mu > 0.0)) {
    throw DomainError("gaussian_average_bound: sigma >= 0 and T, N, n, mu > 0 required");
  }
  const double t = T;
  GaussianBound g;
  g.bound = sigma * std::sqrt(t / N) * (1.0 + mu + std::sqrt(static_cast<double>(n) / t));
  g.confidence = 1.0 - std::exp(-t * mu * mu / 2.0);
  return g;
}

bool check_lyapunov(const Matrix& A_cl, const Matrix& P) {
  if (A_cl.rows() != A_cl.cols() || P.rows() != A_cl.rows() || P.cols() != A_cl.cols()) {
    throw DimensionError("check_lyapunov: dimension mismatch");
  }
  return max_sym_eigenvalue(A_cl * P * A_cl.transpose() - P) < -1e-12;
}

namespace {

io::json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

std::string certificate_to_json(const StabilityCertificate& cert, const NoiseEnergyReport& report) {
  io::json j;
  j["gamma1"] = finite_or_string(report.gamma1);
  j["gamma2"] = finite_or_string(report.gamma2);
  j["gamma1_ok"] = report.gamma1_ok;
  j["noise_assumption_holds"] = report.both_hold;
  j["averaged"] = report.averaged;
  j["alpha"] = finite_or_string(cert.alpha);
  j["beta"] = finite_or_string(cert.beta);
  j["lhs"] = finite_or_string(cert.lhs);
  j["rhs"] = finite_or_string(cert.rhs);
  j["certified"] = cert.certified;
  j["reason"] = cert.reason;
  if (cert.Xi.size()) j["Xi"] = io::matrix_to_json(cert.Xi);
  if (cert.Mmat.size()) j["M"] = io::matrix_to_json(cert.Mmat);
  return j.dump(2);
}

std::string certificate_report(const StabilityCertificate& cert, const NoiseEnergyReport& report) {
  std::ostringstream os;
  os << "noise energy   gamma1 = " << report.gamma1 << (report.gamma1_ok ? "  (< 0.5)" : "  (>= 0.5, violated)")
     << "\n               gamma2 = " << report.gamma2 << '\n'
     << "solution       alpha  = " << cert.alpha << "\n               beta   = " << cert.beta << '\n'
     << "condition      (6 g1 + 3 g2) / (1 - 2 g1) = " << cert.lhs << "\n               alpha^2 / (2 beta (2 beta + alpha)) = "
     << cert.rhs << '\n'
     << "verdict        " << (cert.certified ? "CERTIFIED stable" : "NOT certified") << " -- " << cert.reason << '\n';
  return os.str();
}

}  // namespace ddmr
