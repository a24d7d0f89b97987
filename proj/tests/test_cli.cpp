#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ddmr/benchmark.hpp"
#include "ddmr/certificate.hpp"
#include "ddmr/errors.hpp"
#include "ddmr/io.hpp"
#include "ddmr/sdp.hpp"
#include "support.hpp"

using namespace ddmr;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = DDMR_TEST_WORKDIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result cli(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = std::string("\"") + DDMR_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh(const std::string& name) {
  const fs::path p = kWork / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("scenarios writes the built-in configurations") {
  const auto dir = fresh("scenarios");
  const auto r = cli("scenarios --out " + q(dir));
  REQUIRE(r.code == 0);
  const auto [stable, unstable] = builtin_scenarios();
  const auto s = scenario_from_json(slurp(dir / "stable.json"));
  const auto u = scenario_from_json(slurp(dir / "unstable.json"));
  CHECK(s.A == stable.A);
  CHECK(s.B == stable.B);
  CHECK(s.A_M == stable.A_M);
  CHECK(u.A == unstable.A);
  CHECK(u.B_M == unstable.B_M);
  CHECK(s.A(0, 0) == 0.1344);
  CHECK(u.A(0, 0) == 1.01);
}

TEST_CASE("simulate and exact synthesis recover the optimal gains") {
  const auto dir = fresh("exact");
  for (const std::string name : {"stable", "unstable"}) {
    const auto csv = dir / (name + ".csv");
    REQUIRE(cli("simulate --scenario " + name + " --sigma 0 --oracle --out " + q(csv)).code == 0);
    const auto rec = [&] {
      std::ifstream in(csv);
      return read_trajectory_csv(in);
    }();
    CHECK(rec.has_oracle());
    CHECK(rec.length() == 30);

    const auto outcome = dir / (name + "_outcome.json");
    const auto r = cli("synthesize --data " + q(csv) + " --scenario " + name + " --mode exact --out " + q(outcome));
    REQUIRE(r.code == 0);
    const auto o = outcome_from_json(slurp(outcome));
    const auto cfg = name == "stable" ? ddmr::testing::stable_scenario() : ddmr::testing::unstable_scenario();
    const auto kstar = ddmr::testing::model_gains(cfg);
    CHECK(spectral_norm(o.gains.Kx - kstar.Kx) <= 1e-6);
    CHECK(spectral_norm(o.gains.Kr - kstar.Kr) <= 1e-6);
    CHECK(o.status == SynthesisStatus::optimal);
  }
}

TEST_CASE("synthesis on rank-deficient data exits 1 with a rank diagnostic") {
  const auto dir = fresh("rank");
  write(dir / "model.json", R"({"A": [[0.5, 0.2], [-0.1, 0.7]], "B": [[1.0], [0.5]]})");
  write(dir / "ref.json", R"({"A_M": [[0.3, 0.0], [0.0, 0.2]], "B_M": [[1.0, 0.0], [0.0, 0.5]]})");
  write(dir / "inputs.csv", "1.0,-0.5\n");
  REQUIRE(cli("simulate --model " + q(dir / "model.json") + " --inputs " + q(dir / "inputs.csv") +
              " --x0 1 -1 --out " + q(dir / "short.csv"))
              .code == 0);
  const auto r = cli("synthesize --data " + q(dir / "short.csv") + " --ref " + q(dir / "ref.json") +
                     " --mode exact --out " + q(dir / "o.json"));
  CHECK(r.code == 1);
  CHECK(r.err.find("rank") != std::string::npos);
  CHECK(outcome_from_json(slurp(dir / "o.json")).status == SynthesisStatus::rank_deficient);
}

TEST_CASE("infeasible matching exits 1") {
  const auto dir = fresh("infeasible");
  write(dir / "model.json", R"({"A": [[0.5, 0.2], [-0.1, 0.7]], "B": [[0.0], [0.0]]})");
  write(dir / "ref.json", R"({"A_M": [[0.3, 0.0], [0.0, 0.2]], "B_M": [[1.0, 0.0], [0.0, 0.5]]})");
  write(dir / "inputs.csv", "1.0,-0.5,0.3,1.7,-1.2,0.8,-0.9,0.1,1.1,-1.4\n");
  REQUIRE(cli("simulate --model " + q(dir / "model.json") + " --inputs " + q(dir / "inputs.csv") +
              " --x0 1 -1 --out " + q(dir / "data.csv"))
              .code == 0);
  const auto r = cli("synthesize --data " + q(dir / "data.csv") + " --ref " + q(dir / "ref.json") + " --mode exact");
  CHECK(r.code == 1);
  CHECK(r.out.find("\"infeasible\"") != std::string::npos);
}

TEST_CASE("usage and input errors exit 2 with distinct diagnostics") {
  const auto dir = fresh("errors");
  auto r = cli("synthesize --no-such-flag 3");
  CHECK(r.code == 2);
  r = cli("frobnicate");
  CHECK(r.code == 2);
  r = cli("synthesize --data " + q(dir / "missing.csv") + " --scenario stable");
  CHECK(r.code == 2);
  CHECK(r.err.find("file error") != std::string::npos);
  write(dir / "bad.json", "{ not json");
  r = cli("benchmark --config " + q(dir / "bad.json") + " --out " + q(dir / "b"));
  CHECK(r.code == 2);
  CHECK(r.err.find("malformed input") != std::string::npos);
  write(dir / "model.json", R"({"A": [[0.5, 0.2], [-0.1, 0.7]], "B": [[1.0], [0.5]]})");
  r = cli("simulate --model " + q(dir / "model.json") + " --inputs " + q(dir / "missing.csv") + " --x0 1 2 3");
  CHECK(r.code == 2);
  CHECK(r.err.find("dimension mismatch") != std::string::npos);
  r = cli("synthesize --data x.csv --scenario stable --mode nonsense");
  CHECK(r.code == 2);
}

TEST_CASE("every emitted file is re-readable") {
  const auto dir = fresh("roundtrip");
  REQUIRE(cli("simulate --scenario stable --sigma 0.05 --experiments 3 --oracle --out " + q(dir / "exps") +
              " --snapshots-out " + q(dir / "snaps"))
              .code == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "exps")) {
    std::ifstream in(e.path());
    CHECK(read_trajectory_csv(in).has_oracle());
    ++files;
  }
  CHECK(files == 3);
  const auto snap = read_snapshot_csv_dir((dir / "snaps").string());
  CHECK(snap.has_noise_blocks());

  REQUIRE(cli("synthesize --data " + q(dir / "exps") + " --scenario stable --mode averaged_sdp --out " +
              q(dir / "o.json") + " --export-sdpa " + q(dir / "p.dat-s"))
              .code == 0);
  const auto o = outcome_from_json(slurp(dir / "o.json"));
  CHECK(o.mode == SynthesisMode::averaged_sdp);
  CHECK(o.P.has_value());
  const auto sdpa = sdp::read_sdpa(slurp(dir / "p.dat-s"));
  CHECK_FALSE(sdpa.block_struct.empty());

  const auto v = cli("verify --outcome " + q(dir / "o.json") + " --data " + q(dir / "exps") +
                     " --scenario stable --out " + q(dir / "cert.json"));
  CHECK((v.code == 0 || v.code == 1));
  const auto cert = nlohmann::json::parse(slurp(dir / "cert.json"));
  CHECK(cert.contains("gamma1"));

  REQUIRE(cli("benchmark --scenario unstable --runs 2 --N-list 1 3 --snr 15 --out " + q(dir / "bench")).code == 0);
  CHECK(scenario_from_json(slurp(dir / "bench" / "scenario.json")).runs == 2);
  std::ifstream report(dir / "bench" / "report.csv");
  CHECK(read_report_csv(report).size() == 4);
  const auto summary = nlohmann::json::parse(slurp(dir / "bench" / "summary.json"));
  CHECK(summary.contains("aggregates"));
  CHECK(slurp(dir / "bench" / "error_curves.csv").find("mean_err_Kx") != std::string::npos);
  CHECK(fs::exists(dir / "bench" / "trajectories" / "matching_level0_N3.csv"));

  REQUIRE(cli("benchmark --config " + q(dir / "bench" / "scenario.json") + " --out " + q(dir / "bench2")).code == 0);
  CHECK(slurp(dir / "bench" / "report.csv").size() > 0);
}

TEST_CASE("verify exit status agrees with the certificate") {
  const auto dir = fresh("verify");
  for (const double sigma : {1e-4, 0.5}) {
    const auto data = dir / ("data_" + std::to_string(sigma));
    REQUIRE(cli("simulate --scenario stable --sigma " + std::to_string(sigma) + " --experiments 20 --oracle --out " +
                q(data))
                .code == 0);
    const auto out = dir / "o.json";
    REQUIRE(cli("synthesize --data " + q(data) + " --scenario stable --mode averaged_sdp --out " + q(out)).code == 0);
    const auto v = cli("verify --outcome " + q(out) + " --data " + q(data) + " --scenario stable --out " +
                       q(dir / "cert.json"));
    const auto cert = nlohmann::json::parse(slurp(dir / "cert.json"));
    CHECK(v.code == (cert.at("certified").get<bool>() ? 0 : 1));
    if (sigma < 1e-3) CHECK(v.code == 0);
  }
  const auto r = cli("verify --outcome " + q(dir / "absent.json") + " --data " + q(dir) + " --scenario stable");
  CHECK(r.code == 2);
}
