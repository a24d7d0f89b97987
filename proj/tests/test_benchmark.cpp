#include <doctest.h>

#include <sstream>

#include "ddmr/benchmark.hpp"
#include "ddmr/errors.hpp"
#include "support.hpp"

using namespace ddmr;
using ddmr::testing::random_matrix;

namespace {

std::string rows_without_timing(const BenchmarkReport& r) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& row : r.rows) {
    os << row.run << ',' << row.level << ',' << row.sigma << ',' << row.snr_db << ',' << row.N << ','
       << row.err_Kx << ',' << row.err_Kr << ',' << row.rho_cl << ',' << row.stable << ','
       << to_string(row.status) << '\n';
  }
  return os.str();
}

}  // namespace

TEST_CASE("SNR per channel") {
  const Matrix clean = random_matrix(3, 31, 1);
  const Vector equal = compute_snr(clean, clean);
  CHECK(equal.cwiseAbs().maxCoeff() < 1e-12);
  const Vector shifted = compute_snr(clean, clean / 10.0);
  for (int j = 0; j < 3; ++j) CHECK(shifted(j) == doctest::Approx(20.0));
  const Vector s = compute_snr((Matrix(1, 2) << 1, 2).finished(), (Matrix(1, 2) << 1, 1).finished());
  CHECK(s(0) == doctest::Approx(10.0 * std::log10(2.5)));
  CHECK(s(0) == doctest::Approx(3.979).epsilon(1e-3));
  CHECK(std::isinf(compute_snr(clean, Matrix::Zero(3, 31))(1)));
  CHECK_THROWS_AS(compute_snr(clean, Matrix::Zero(3, 30)), DimensionError);
}

TEST_CASE("gain error is the spectral norm of the difference") {
  const Matrix k = random_matrix(3, 3, 2);
  CHECK(gain_error(k, k) == 0.0);
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3.0;
  CHECK(gain_error(k + d, k) == doctest::Approx(3.0));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix a = random_matrix(2, 4, 10 + s), b = random_matrix(2, 4, 20 + s);
    const Eigen::JacobiSVD<Matrix> svd(a - b);
    CHECK(std::abs(gain_error(a, b) - svd.singularValues()(0)) < 1e-10);
  }
  CHECK_THROWS_AS(gain_error(k, Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("built-in scenario matrices and settings") {
  const auto [stable, unstable] = builtin_scenarios();
  CHECK_NOTHROW(stable.validate());
  CHECK_NOTHROW(unstable.validate());
  Eigen::EigenSolver<Matrix> es(stable.A);
  std::vector<double> ev;
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-12);
    ev.push_back(es.eigenvalues()(i).real());
  }
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(-0.2118).epsilon(1e-3));
  CHECK(ev[1] == doctest::Approx(0.3670).epsilon(1e-3));
  CHECK(ev[2] == doctest::Approx(0.9536).epsilon(1e-3));

  const auto r_un = verify_matching(StateSpaceModel(unstable.A, unstable.B), unstable.optimal_gains,
                                    ReferenceModel(unstable.A_M, unstable.B_M));
  CHECK(r_un.res_A == 0.0);
  CHECK(r_un.res_B == 0.0);
  const auto r_st = verify_matching(StateSpaceModel(stable.A, stable.B), stable.optimal_gains,
                                    ReferenceModel(stable.A_M, stable.B_M));
  CHECK(r_st.res_A <= 1e-3);
  CHECK(r_st.res_B <= 1e-3);

  CHECK(stable.T == 30);
  CHECK(stable.runs == 20);
  CHECK(stable.N_list == std::vector<int>{1, 2, 10, 100});
  CHECK(unstable.input_law.kind == InputLaw::Kind::closed_loop);
  CHECK(unstable.input_law.lo == -5.0);
  CHECK(unstable.input_law.hi == 10.0);
  CHECK(unstable.input_law.Kx0 == -Matrix::Identity(3, 3));
}

TEST_CASE("scenario JSON round trip and validation") {
  const auto [stable, unstable] = builtin_scenarios();
  for (const auto& cfg : {stable, unstable}) {
    const auto back = scenario_from_json(scenario_to_json(cfg));
    CHECK(back.A == cfg.A);
    CHECK(back.B_M == cfg.B_M);
    CHECK(back.optimal_gains.Kx == cfg.optimal_gains.Kx);
    CHECK(back.N_list == cfg.N_list);
    CHECK(back.snr_targets_db == cfg.snr_targets_db);
    CHECK(back.input_law.kind == cfg.input_law.kind);
    CHECK(back.seed == cfg.seed);
    CHECK(back.synthesis.mode == cfg.synthesis.mode);
  }
  auto bad = stable;
  bad.T = 4;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = stable;
  bad.runs = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = stable;
  bad.optimal_gains.Kx = Matrix::Zero(2, 3);
  CHECK_THROWS_AS(bad.validate(), DimensionError);
  CHECK_THROWS_AS(scenario_from_json("{\"plant\": 3}"), FormatError);
}

TEST_CASE("seeds separate streams") {
  CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
  CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
  CHECK(derive_seed(1, 2, 3, 4) != derive_seed(2, 2, 3, 4));
  const auto cfg = ddmr::testing::stable_scenario();
  CHECK(excitation_signal(cfg, 0) == excitation_signal(cfg, 0));
  CHECK(excitation_signal(cfg, 0) != excitation_signal(cfg, 1));
  CHECK(excitation_signal(cfg, 0).cwiseAbs().maxCoeff() <= 2.0);
}

TEST_CASE("Monte Carlo sweep is deterministic and thread-count independent") {
  auto cfg = ddmr::testing::unstable_scenario();
  cfg.runs = 4;
  cfg.N_list = {1, 5};
  cfg.snr_targets_db = {12.0};
  const auto a = run_monte_carlo(cfg);
  const auto b = run_monte_carlo(cfg);
  cfg.threads = 3;
  const auto c = run_monte_carlo(cfg);
  CHECK(rows_without_timing(a) == rows_without_timing(b));
  CHECK(rows_without_timing(a) == rows_without_timing(c));
  CHECK(a.rows.size() == 8);
}

TEST_CASE("aggregates are reproducible from the rows") {
  auto cfg = ddmr::testing::stable_scenario();
  cfg.runs = 6;
  cfg.N_list = {1, 10};
  cfg.snr_targets_db = {8.0, 20.0};
  const auto rep = run_monte_carlo(cfg);
  const auto again = aggregate_rows(rep.rows, rep.levels, rep.N_list);
  REQUIRE(again.size() == rep.aggregates.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    const auto& x = again[i];
    const auto& y = rep.aggregates[i];
    CHECK(x.rows == y.rows);
    CHECK(x.unstable == y.unstable);
    CHECK(x.stable + x.unstable + x.failed == x.rows);
    CHECK(x.unstable <= cfg.runs);
    CHECK((x.mean_err_Kx == y.mean_err_Kx || (std::isnan(x.mean_err_Kx) && std::isnan(y.mean_err_Kx))));
    CHECK((x.std_err_Kr == y.std_err_Kr || (std::isnan(x.std_err_Kr) && std::isnan(y.std_err_Kr))));
    CHECK((x.median_err_Kx == y.median_err_Kx || (std::isnan(x.median_err_Kx) && std::isnan(y.median_err_Kx))));
  }

  std::stringstream csv;
  write_report_csv(csv, rep);
  const auto rows = read_report_csv(csv);
  REQUIRE(rows.size() == rep.rows.size());
  const auto from_csv = aggregate_rows(rows, rep.levels, rep.N_list);
  for (std::size_t i = 0; i < from_csv.size(); ++i) {
    CHECK(from_csv[i].unstable == rep.aggregates[i].unstable);
    CHECK(from_csv[i].mean_err_Kx == doctest::Approx(rep.aggregates[i].mean_err_Kx));
  }
}

TEST_CASE("calibrated noise hits the requested SNR") {
  const auto [stable, unstable] = builtin_scenarios();
  for (auto cfg : {stable, unstable}) {
    cfg.runs = 20;
    cfg.N_list = {1};
    cfg.snr_targets_db = {7.7, 12.5, 15.9};
    const auto rep = run_monte_carlo(cfg);
    for (const auto& a : rep.aggregates) CHECK(std::abs(a.snr_mean_db - a.snr_target_db) <= 1.5);
  }
}

TEST_CASE("noiseless sweep recovers the gains in every run") {
  const auto [stable, unstable] = builtin_scenarios();
  for (auto cfg : {stable, unstable}) {
    cfg.runs = 5;
    cfg.N_list = {1, 3};
    cfg.snr_targets_db.clear();
    cfg.sigma_values = {0.0};
    cfg.optimal_gains = ddmr::testing::model_gains(cfg);
    const auto rep = run_monte_carlo(cfg);
    for (const auto& r : rep.rows) {
      CHECK(r.status == SynthesisStatus::optimal);
      CHECK(r.err_Kx <= 1e-4);
      CHECK(r.err_Kr <= 1e-4);
      CHECK(std::isinf(r.snr_db));
    }
  }
}

TEST_CASE("stable scenario: no unstable instance at N = 100") {
  auto cfg = ddmr::testing::stable_scenario();
  cfg.N_list = {1, 100};
  cfg.snr_targets_db = {12.5};
  const auto rep = run_monte_carlo(cfg);
  CHECK(rep.aggregate(0, 100).unstable == 0);
  CHECK(rep.aggregate(0, 100).failed == 0);
}

TEST_CASE("median gain error does not grow with N") {
  const auto [stable, unstable] = builtin_scenarios();
  for (auto cfg : {stable, unstable}) {
    cfg.N_list = {1, 10, 100};
    cfg.snr_targets_db = {12.5};
    const auto rep = run_monte_carlo(cfg);
    int inversions = 0;
    for (std::size_t i = 1; i < cfg.N_list.size(); ++i) {
      inversions += rep.aggregate(0, cfg.N_list[i]).median_err_Kx > rep.aggregate(0, cfg.N_list[i - 1]).median_err_Kx;
    }
    CHECK(inversions <= 1);
  }
}

TEST_CASE("independent inputs option changes the excitation per experiment") {
  auto cfg = ddmr::testing::stable_scenario();
  cfg.runs = 2;
  cfg.N_list = {4};
  cfg.snr_targets_db = {20.0};
  const auto repeated = run_monte_carlo(cfg);
  cfg.independent_inputs = true;
  const auto independent = run_monte_carlo(cfg);
  CHECK(rows_without_timing(repeated) != rows_without_timing(independent));
  for (const auto& r : independent.rows) CHECK(r.status == SynthesisStatus::optimal);
}

TEST_CASE("matching trajectories and step references") {
  const Matrix r = step_reference(3);
  CHECK(r.cols() == 120);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(2, 40) == -0.5);
  CHECK(r(1, 119) == 2.0);
  const auto cfg = ddmr::testing::unstable_scenario();
  const auto traj = matching_trajectory(cfg, cfg.optimal_gains, r);
  CHECK((traj.actual - traj.desired).cwiseAbs().maxCoeff() < 1e-10);
  std::ostringstream os;
  write_matching_csv(os, traj);
  CHECK(os.str().rfind("t,r_1,r_2,r_3,x_1,x_2,x_3,xd_1,xd_2,xd_3\n", 0) == 0);
  CHECK_THROWS_AS(step_reference(0), DomainError);
}

TEST_CASE("report exports") {
  auto cfg = ddmr::testing::stable_scenario();
  cfg.runs = 2;
  cfg.N_list = {1, 2};
  const auto rep = run_monte_carlo(cfg);
  std::ostringstream csv, curves;
  write_report_csv(csv, rep);
  CHECK(csv.str().rfind("run,sigma,snr_db,N,err_Kx,err_Kr,rho_cl,stable,status,ms\n", 0) == 0);
  write_error_curves_csv(curves, rep);
  CHECK(curves.str().find("mean_err_Kx") != std::string::npos);
  const auto j = report_summary_json(rep);
  CHECK(j.find("\"aggregates\"") != std::string::npos);
  std::stringstream bad("nope\n");
  CHECK_THROWS_AS(read_report_csv(bad), FormatError);
}
