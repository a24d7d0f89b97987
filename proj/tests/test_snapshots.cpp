#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "ddmr/errors.hpp"
#include "ddmr/snapshots.hpp"
#include "support.hpp"

using namespace ddmr;
using ddmr::testing::random_matrix;

TEST_CASE("build snapshots: direct slicing") {
  ExperimentRecord rec;
  rec.inputs = (Matrix(1, 2) << 1, 2).finished();
  rec.states_measured = (Matrix(1, 3) << 0, 1, 3).finished();
  const auto s = build_snapshots(rec);
  CHECK(s.U0 == (Matrix(1, 2) << 1, 2).finished());
  CHECK(s.X0 == (Matrix(1, 2) << 0, 1).finished());
  CHECK(s.X1 == (Matrix(1, 2) << 1, 3).finished());
  CHECK_FALSE(s.has_noise_blocks());
}

TEST_CASE("build snapshots: zero-noise oracle blocks") {
  const auto s = build_snapshots(run_experiment(ddmr::testing::stable_scenario(), 0, 0.0, 0));
  REQUIRE(s.has_noise_blocks());
  CHECK(s.V0->isZero());
  CHECK(s.V1->isZero());
  CHECK(*s.X0_clean == s.X0);
  CHECK(s.length() == 30);
  CHECK(s.U0.cols() == 30);
  CHECK(s.X1.cols() == 30);
}

TEST_CASE("build snapshots rejects inconsistent records") {
  ExperimentRecord rec;
  rec.inputs = Matrix::Ones(1, 3);
  rec.states_measured = Matrix::Ones(1, 3);
  CHECK_THROWS_AS(build_snapshots(rec), DimensionError);
}

TEST_CASE("oracle identity holds on noisy snapshots") {
  const auto s = build_snapshots(run_experiment(ddmr::testing::stable_scenario(), 1, 0.4, 0));
  CHECK((s.X0 - *s.X0_clean - *s.V0).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((s.X1 - *s.X1_clean - *s.V1).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("averaging") {
  const auto s = build_snapshots(run_experiment(ddmr::testing::stable_scenario(), 0, 0.2, 0));
  const std::vector<SnapshotMatrices> same{s, s, s};
  const auto avg = average_snapshots(same);
  CHECK((avg.X1 - s.X1).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((*avg.V0 - *s.V0).cwiseAbs().maxCoeff() < 1e-14);

  SnapshotMatrices a, b;
  a.U0 = a.X0 = a.X1 = Matrix::Constant(1, 1, 2.0);
  b.U0 = b.X0 = b.X1 = Matrix::Constant(1, 1, 4.0);
  const std::vector<SnapshotMatrices> pair{a, b};
  CHECK(average_snapshots(pair).X1(0, 0) == doctest::Approx(3.0));

  CHECK_THROWS_AS(average_snapshots(std::span<const SnapshotMatrices>()), DomainError);
  SnapshotMatrices wide;
  wide.U0 = wide.X0 = wide.X1 = Matrix::Ones(1, 2);
  const std::vector<SnapshotMatrices> mixed{a, wide};
  CHECK_THROWS_AS(average_snapshots(mixed), DimensionError);
}

TEST_CASE("averaging keeps optional blocks only when every member has them") {
  const auto cfg = ddmr::testing::stable_scenario();
  const auto with = build_snapshots(run_experiment(cfg, 0, 0.2, 0));
  const auto without = build_snapshots(run_experiment(cfg, 0, 0.2, 1).without_oracle());
  const std::vector<SnapshotMatrices> mixed{with, without};
  const auto avg = average_snapshots(mixed);
  CHECK_FALSE(avg.V0.has_value());
  CHECK_FALSE(avg.X1_clean.has_value());
}

TEST_CASE("averaged noise shrinks like 1/sqrt(N)") {
  const auto cfg = ddmr::testing::stable_scenario();
  const double sigma = 1.0;
  for (int N : {1, 25, 100}) {
    const auto avg = ddmr::testing::averaged_data(cfg, 0, sigma, N);
    const double rms = std::sqrt(avg.V0->squaredNorm() / static_cast<double>(avg.V0->size()));
    const double expected = sigma / std::sqrt(static_cast<double>(N));
    // 90 entries: the sample RMS has relative spread about 1/sqrt(180); allow 3 of those
    CHECK(std::abs(rms / expected - 1.0) < 3.0 / std::sqrt(180.0));
  }
}

TEST_CASE("shift consistency and linearity of averaging") {
  const auto cfg = ddmr::testing::stable_scenario();
  const auto s = build_snapshots(run_experiment(cfg, 2, 0.1, 0));
  CHECK(s.X1.leftCols(29) == s.X0.rightCols(29));

  std::vector<SnapshotMatrices> members, scaled;
  for (int e = 0; e < 4; ++e) {
    members.push_back(build_snapshots(run_experiment(cfg, 3, 0.5, e)));
    auto m = members.back();
    m.U0 *= 2.5;
    m.X0 *= 2.5;
    m.X1 *= 2.5;
    m.V0.reset();
    m.V1.reset();
    m.X0_clean.reset();
    m.X1_clean.reset();
    scaled.push_back(m);
  }
  const auto avg = average_snapshots(members);
  const auto avg_scaled = average_snapshots(scaled);
  CHECK((avg_scaled.X1 - 2.5 * avg.X1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((avg_scaled.U0 - 2.5 * avg.U0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank condition examples") {
  SnapshotMatrices s;
  s.U0 = Matrix::Identity(2, 2);
  s.X0 = Matrix::Identity(2, 2);
  s.X1 = Matrix::Identity(2, 2);
  auto r = check_rank_condition(s);
  CHECK(r.required == 4);
  CHECK(r.stacked_rank <= 2);
  CHECK_FALSE(r.satisfied);

  const auto sample = build_snapshots(run_experiment(ddmr::testing::stable_scenario(), 0, 0.0, 0));
  r = check_rank_condition(sample);
  CHECK(r.satisfied);
  CHECK(r.stacked_rank == 6);
  CHECK(r.singular_values.size() == 6);

  auto degenerate = sample;
  degenerate.X0.row(1).setZero();
  CHECK_FALSE(check_rank_condition(degenerate).satisfied);
}

TEST_CASE("persistent excitation examples") {
  CHECK_FALSE(check_persistent_excitation(Matrix::Constant(1, 20, 3.0), 2));
  CHECK(check_persistent_excitation(random_matrix(3, 30, 77, -2, 2), 4));
  CHECK_FALSE(check_persistent_excitation(Matrix::Zero(2, 20), 1));
  CHECK_FALSE(check_persistent_excitation(Matrix::Zero(2, 20), 3));
  CHECK_THROWS_AS(block_hankel(Matrix::Ones(1, 5), 6), DimensionError);
  CHECK_THROWS_AS(block_hankel(Matrix::Ones(1, 5), 0), DomainError);
  const Matrix h = block_hankel((Matrix(1, 4) << 1, 2, 3, 4).finished(), 2);
  CHECK(h == (Matrix(2, 3) << 1, 2, 3, 2, 3, 4).finished());
}

TEST_CASE("random controllable systems with PE inputs satisfy the rank condition") {
  int trials = 0;
  for (std::uint64_t k = 0; trials < 60; ++k) {
    const int n = 1 + static_cast<int>(k % 3);
    const int m = 1 + static_cast<int>((k / 3) % 3);
    const Matrix a = ddmr::testing::random_with_radius(n, 0.3 + 0.8 * static_cast<double>(k % 5) / 4.0, 100 + k);
    const Matrix b = random_matrix(n, m, 200 + k);
    Matrix ctrb(n, n * m);
    Matrix p = b;
    for (int i = 0; i < n; ++i) {
      ctrb.middleCols(i * m, m) = p;
      p = a * p;
    }
    if (numerical_rank(ctrb, 1e-8).rank < n) continue;
    const Matrix u = random_matrix(m, 30, 300 + k, -2, 2);
    if (!check_persistent_excitation(u, n + 1)) continue;
    const auto s = build_snapshots(
        simulate_open_loop(StateSpaceModel(a, b), u, random_matrix(n, 1, 400 + k).col(0), {}));
    const auto r = check_rank_condition(s);
    CHECK(r.satisfied);
    CHECK(r.stacked_rank <= std::min(n + m, s.length()));
    ++trials;
  }
}

TEST_CASE("snapshot JSON and CSV round trips") {
  const auto s = build_snapshots(run_experiment(ddmr::testing::unstable_scenario(), 0, 0.3, 0));
  const auto j = snapshots_from_json(snapshots_to_json(s, true));
  CHECK(j.X1 == s.X1);
  CHECK(*j.V1 == *s.V1);
  const auto plain = snapshots_from_json(snapshots_to_json(s, false));
  CHECK_FALSE(plain.V0.has_value());
  CHECK(plain.U0 == s.U0);

  const auto dir = std::filesystem::temp_directory_path() / "ddmr_snapshot_roundtrip";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_snapshot_csv_dir(dir.string(), s, true);
  const auto c = read_snapshot_csv_dir(dir.string());
  CHECK(c.X0 == s.X0);
  CHECK(*c.X0_clean == *s.X0_clean);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(snapshots_from_json("{\"U0\": [[1]]}"), FormatError);
  CHECK_THROWS_AS(snapshots_from_json("not json"), FormatError);
  CHECK_THROWS_AS(read_snapshot_csv_dir("/nonexistent/ddmr"), IoError);
}
