#include "ddmr/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "ddmr/errors.hpp"
#include "ddmr/io.hpp"
#include "ddmr/snapshots.hpp"

namespace ddmr {

namespace {

constexpr std::uint64_t kExcitationStream = 0x45584349ULL;
constexpr std::uint64_t kInitialStateStream = 0x58302020ULL;
constexpr std::uint64_t kNoiseStream = 0x4e4f4953ULL;
constexpr std::uint64_t kPilotStream = 0x50494c4fULL;
constexpr int kPilotRuns = 8;
constexpr int kCalibrationPasses = 4;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix uniform_matrix(int rows, int cols, double lo, double hi, std::uint64_t seed) {
  boost::random::mt19937_64 gen(seed);
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  Matrix out(rows, cols);
  for (int t = 0; t < cols; ++t) {
    for (int j = 0; j < rows; ++j) out(j, t) = dist(gen);
  }
  return out;
}

double mean_of(const Vector& v) {
  return v.size() ? v.mean() : std::numeric_limits<double>::quiet_NaN();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

io::json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

void ScenarioConfig::validate() const {
  const StateSpaceModel plant(A, B);
  const ReferenceModel ref(A_M, B_M);
  const int n = states();
  const int m = inputs();
  if (ref.states() != n) throw DimensionError("ScenarioConfig: reference model order differs from the plant");
  optimal_gains.validate();
  if (optimal_gains.Kx.rows() != m || optimal_gains.Kx.cols() != n || optimal_gains.Kr.rows() != m ||
      optimal_gains.Kr.cols() != B_M.cols()) {
    throw DimensionError("ScenarioConfig: optimal gains have the wrong shape");
  }
  if (T < n + m) throw DomainError("ScenarioConfig: T must be at least n + m");
  if (runs < 1) throw DomainError("ScenarioConfig: runs must be >= 1");
  if (N_list.empty()) throw DomainError("ScenarioConfig: N_list is empty");
  for (int N : N_list) {
    if (N < 1) throw DomainError("ScenarioConfig: every N must be >= 1");
  }
  if (snr_targets_db.empty() && sigma_values.empty()) {
    throw DomainError("ScenarioConfig: give at least one SNR target or sigma value");
  }
  for (double s : snr_targets_db) {
    if (!std::isfinite(s)) throw DomainError("ScenarioConfig: SNR targets must be finite");
  }
  for (double s : sigma_values) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("ScenarioConfig: sigma values must be finite and >= 0");
  }
  if (!(input_law.hi > input_law.lo)) throw DomainError("ScenarioConfig: input range must satisfy lo < hi");
  if (input_law.kind == InputLaw::Kind::closed_loop) {
    if (input_law.Kx0.rows() != m || input_law.Kx0.cols() != n || input_law.Kr0.rows() != m ||
        input_law.Kr0.cols() != n) {
      throw DimensionError("ScenarioConfig: closed-loop pre-controller gains have the wrong shape");
    }
  }
  if (!(x0_range >= 0.0)) throw DomainError("ScenarioConfig: x0_range must be >= 0");
  if (threads < 1) throw DomainError("ScenarioConfig: threads must be >= 1");
  synthesis.validate();
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  io::json j;
  j["name"] = cfg.name;
  j["plant"] = io::model_to_json(StateSpaceModel(cfg.A, cfg.B));
  j["ref_model"] = io::reference_to_json(ReferenceModel(cfg.A_M, cfg.B_M));
  j["optimal_gains"] = io::gains_to_json(cfg.optimal_gains);
  j["T"] = cfg.T;
  j["N_list"] = cfg.N_list;
  j["snr_targets_db"] = cfg.snr_targets_db;
  j["sigma_values"] = cfg.sigma_values;
  j["runs"] = cfg.runs;
  io::json law;
  law["kind"] = cfg.input_law.kind == InputLaw::Kind::open_loop ? "open_loop_uniform" : "closed_loop";
  law["lo"] = cfg.input_law.lo;
  law["hi"] = cfg.input_law.hi;
  if (cfg.input_law.kind == InputLaw::Kind::closed_loop) {
    law["K_x0"] = io::matrix_to_json(cfg.input_law.Kx0);
    law["K_r0"] = io::matrix_to_json(cfg.input_law.Kr0);
  }
  j["input_law"] = law;
  j["x0_range"] = cfg.x0_range;
  j["independent_inputs"] = cfg.independent_inputs;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  io::json syn;
  syn["mode"] = to_string(cfg.synthesis.mode);
  syn["lambda"] = cfg.synthesis.lambda;
  syn["lambda1"] = cfg.synthesis.lambda1;
  syn["dc_gain_weight"] = cfg.synthesis.dc_gain_weight;
  syn["norm"] = cfg.synthesis.norm == sdp::NormKind::l1 ? "l1" : "fro";
  syn["lmi_margin"] = cfg.synthesis.lmi_margin;
  j["synthesis"] = syn;
  return j.dump(2);
}

ScenarioConfig scenario_from_json(const std::string& text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    throw FormatError(std::string("scenario: malformed JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  try {
    cfg.name = j.value("name", std::string("scenario"));
    const auto plant = io::model_from_json(j.at("plant"));
    cfg.A = plant.A();
    cfg.B = plant.B();
    const auto ref = io::reference_from_json(j.at("ref_model"));
    cfg.A_M = ref.A();
    cfg.B_M = ref.B();
    cfg.optimal_gains = io::gains_from_json(j.at("optimal_gains"));
    cfg.T = j.value("T", cfg.T);
    if (j.contains("N_list")) cfg.N_list = j.at("N_list").get<std::vector<int>>();
    if (j.contains("snr_targets_db")) cfg.snr_targets_db = j.at("snr_targets_db").get<std::vector<double>>();
    if (j.contains("sigma_values")) cfg.sigma_values = j.at("sigma_values").get<std::vector<double>>();
    cfg.runs = j.value("runs", cfg.runs);
    const auto& law = j.at("input_law");
    const auto kind = law.at("kind").get<std::string>();
    if (kind == "open_loop_uniform" || kind == "open_loop") {
      cfg.input_law.kind = InputLaw::Kind::open_loop;
    } else if (kind == "closed_loop") {
      cfg.input_law.kind = InputLaw::Kind::closed_loop;
      cfg.input_law.Kx0 = io::matrix_from_json(law.at("K_x0"), "K_x0");
      cfg.input_law.Kr0 = io::matrix_from_json(law.at("K_r0"), "K_r0");
    } else {
      throw FormatError("scenario: unknown input_law kind \"" + kind + "\"");
    }
    cfg.input_law.lo = law.value("lo", cfg.input_law.lo);
    cfg.input_law.hi = law.value("hi", cfg.input_law.hi);
    cfg.x0_range = j.value("x0_range", cfg.x0_range);
    cfg.independent_inputs = j.value("independent_inputs", cfg.independent_inputs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.synthesis.mode = SynthesisMode::averaged_sdp;
    if (j.contains("synthesis")) {
      const auto& syn = j.at("synthesis");
      if (syn.contains("mode")) cfg.synthesis.mode = synthesis_mode_from_string(syn.at("mode").get<std::string>());
      cfg.synthesis.lambda = syn.value("lambda", cfg.synthesis.lambda);
      cfg.synthesis.lambda1 = syn.value("lambda1", cfg.synthesis.lambda1);
      cfg.synthesis.dc_gain_weight = syn.value("dc_gain_weight", cfg.synthesis.dc_gain_weight);
      const auto norm = syn.value("norm", std::string("l1"));
      if (norm == "l1") {
        cfg.synthesis.norm = sdp::NormKind::l1;
      } else if (norm == "fro" || norm == "frobenius") {
        cfg.synthesis.norm = sdp::NormKind::frobenius;
      } else {
        throw FormatError("scenario: unknown norm \"" + norm + "\"");
      }
      cfg.synthesis.lmi_margin = syn.value("lmi_margin", cfg.synthesis.lmi_margin);
    }
  } catch (const io::json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::pair<ScenarioConfig, ScenarioConfig> builtin_scenarios() {
  ScenarioConfig stable;
  stable.name = "stable_open_loop";
  stable.A.resize(3, 3);
  stable.A << 0.1344, 0.2155, -0.1084,
              0.4585, 0.0797, 0.0857,
              -0.5647, -0.3269, 0.8946;
  stable.B.resize(3, 3);
  stable.B << 0.9298, 0.9143, -0.7162,
              -0.6848, -0.0292, -0.1565,
              0.9412, 0.6006, 0.8315;
  stable.A_M = 0.2 * Matrix::Identity(3, 3);
  stable.B_M = 0.8 * Matrix::Identity(3, 3);
  stable.optimal_gains.Kx.resize(3, 3);
  stable.optimal_gains.Kx << 0.6308, -0.2920, 0.3080,
                             -0.3814, 0.4011, -0.7166,
                             0.2405, 0.4340, -0.6664;
  stable.optimal_gains.Kr.resize(3, 3);
  stable.optimal_gains.Kr << 0.0768, -1.3126, -0.1809,
                             0.4654, 1.5957, 0.7012,
                             -0.4231, 0.3332, 0.6604;
  stable.snr_targets_db = {12.5};
  stable.input_law.kind = InputLaw::Kind::open_loop;
  stable.input_law.lo = -2.0;
  stable.input_law.hi = 2.0;
  stable.seed = 2024;
  stable.synthesis.mode = SynthesisMode::averaged_sdp;

  ScenarioConfig unstable;
  unstable.name = "unstable_closed_loop";
  unstable.A.resize(3, 3);
  unstable.A << 1.01, 0.01, 0.0,
                0.01, 1.01, 0.01,
                0.0, 0.01, 1.01;
  unstable.B = Matrix::Identity(3, 3);
  unstable.A_M = 0.9 * Matrix::Identity(3, 3);
  unstable.B_M = 0.1 * Matrix::Identity(3, 3);
  unstable.optimal_gains.Kx = unstable.A_M - unstable.A;
  unstable.optimal_gains.Kr = 0.1 * Matrix::Identity(3, 3);
  unstable.snr_targets_db = {15.9, 7.7};
  unstable.input_law.kind = InputLaw::Kind::closed_loop;
  unstable.input_law.lo = -5.0;
  unstable.input_law.hi = 10.0;
  unstable.input_law.Kx0 = -Matrix::Identity(3, 3);
  unstable.input_law.Kr0 = Matrix::Identity(3, 3);
  unstable.seed = 2025;
  unstable.synthesis.mode = SynthesisMode::averaged_sdp;
  return {stable, unstable};
}

ScenarioConfig full_scale(ScenarioConfig cfg) {
  cfg.runs = 100;
  cfg.N_list = {1, 2, 10, 100, 1000};
  cfg.snr_targets_db.clear();
  for (double s = 3.0; s <= 100.0 + 1e-9; s += s < 30.0 ? 3.0 : 10.0) cfg.snr_targets_db.push_back(s);
  return cfg;
}

Vector compute_snr(const Matrix& clean, const Matrix& noise) {
  if (clean.rows() != noise.rows() || clean.cols() != noise.cols()) {
    throw DimensionError("compute_snr: clean and noise sequences differ in shape");
  }
  Vector out(clean.rows());
  for (Eigen::Index j = 0; j < clean.rows(); ++j) {
    const double es = clean.row(j).squaredNorm();
    const double en = noise.row(j).squaredNorm();
    out(j) = en == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(es / en);
  }
  return out;
}

double gain_error(const Matrix& K, const Matrix& Kstar) {
  if (K.rows() != Kstar.rows() || K.cols() != Kstar.cols()) throw DimensionError("gain_error: shape mismatch");
  return spectral_norm(K - Kstar);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

Matrix excitation_signal(const ScenarioConfig& cfg, int run) {
  const int rows = cfg.input_law.kind == InputLaw::Kind::open_loop ? cfg.inputs() : cfg.states();
  return uniform_matrix(rows, cfg.T, cfg.input_law.lo, cfg.input_law.hi,
                        derive_seed(cfg.seed, kExcitationStream, static_cast<std::uint64_t>(run)));
}

Vector initial_state(const ScenarioConfig& cfg, int run) {
  if (cfg.x0_range == 0.0) return Vector::Zero(cfg.states());
  return uniform_matrix(cfg.states(), 1, -cfg.x0_range, cfg.x0_range,
                        derive_seed(cfg.seed, kInitialStateStream, static_cast<std::uint64_t>(run)))
      .col(0);
}

namespace {

ExperimentRecord experiment_with(const ScenarioConfig& cfg, const StateSpaceModel& plant, const Matrix& excitation,
                                 const Vector& x0, double sigma, std::uint64_t noise_seed) {
  const NoiseSpec noise{sigma, noise_seed};
  if (cfg.input_law.kind == InputLaw::Kind::open_loop) return simulate_open_loop(plant, excitation, x0, noise);
  return simulate_closed_loop(plant, ControllerGains{cfg.input_law.Kx0, cfg.input_law.Kr0}, excitation, x0, noise);
}

double mean_snr(const ExperimentRecord& rec) { return mean_of(compute_snr(*rec.states_clean, *rec.noise)); }

}  // namespace

ExperimentRecord run_experiment(const ScenarioConfig& cfg, int run, double sigma, std::uint64_t stream) {
  const StateSpaceModel plant(cfg.A, cfg.B);
  return experiment_with(cfg, plant, excitation_signal(cfg, run), initial_state(cfg, run), sigma,
                         derive_seed(cfg.seed, kNoiseStream, static_cast<std::uint64_t>(run), stream));
}

double calibrate_sigma(const ScenarioConfig& cfg, double target_db) {
  if (!std::isfinite(target_db)) throw DomainError("calibrate_sigma: target must be finite");
  const StateSpaceModel plant(cfg.A, cfg.B);
  std::vector<Matrix> excitations;
  std::vector<Vector> x0s;
  for (int k = 0; k < kPilotRuns; ++k) {
    excitations.push_back(
        uniform_matrix(cfg.input_law.kind == InputLaw::Kind::open_loop ? cfg.inputs() : cfg.states(), cfg.T,
                       cfg.input_law.lo, cfg.input_law.hi, derive_seed(cfg.seed, kPilotStream, 1, k)));
    x0s.push_back(cfg.x0_range == 0.0 ? Vector(Vector::Zero(cfg.states()))
                                      : Vector(uniform_matrix(cfg.states(), 1, -cfg.x0_range, cfg.x0_range,
                                                              derive_seed(cfg.seed, kPilotStream, 2, k))
                                                   .col(0)));
  }

  // Noiseless pilot: SNR_j = 10 log10(E_j / ((T+1) sigma^2)) averaged over channels.
  double log_energy = 0.0;
  int count = 0;
  for (int k = 0; k < kPilotRuns; ++k) {
    const auto rec = experiment_with(cfg, plant, excitations[k], x0s[k], 0.0, 0);
    for (Eigen::Index j = 0; j < rec.states_clean->rows(); ++j) {
      log_energy += std::log10(rec.states_clean->row(j).squaredNorm() / (cfg.T + 1));
      ++count;
    }
  }
  double sigma = std::pow(10.0, (log_energy / count - target_db / 10.0) / 2.0);

  // Closed-loop collection feeds noise back into the clean state; correct on noisy pilots.
  for (int pass = 0; pass < kCalibrationPasses; ++pass) {
    double achieved = 0.0;
    for (int k = 0; k < kPilotRuns; ++k) {
      achieved += mean_snr(
          experiment_with(cfg, plant, excitations[k], x0s[k], sigma, derive_seed(cfg.seed, kPilotStream, 3, k)));
    }
    achieved /= kPilotRuns;
    sigma *= std::pow(10.0, (achieved - target_db) / 20.0);
  }
  return sigma;
}

std::vector<NoiseLevel> noise_levels(const ScenarioConfig& cfg) {
  std::vector<NoiseLevel> out;
  for (double target : cfg.snr_targets_db) out.push_back({calibrate_sigma(cfg, target), target});
  for (double s : cfg.sigma_values) out.push_back({s, std::numeric_limits<double>::quiet_NaN()});
  return out;
}

const Aggregate& BenchmarkReport::aggregate(int level, int N) const {
  for (const auto& a : aggregates) {
    if (a.level == level && a.N == N) return a;
  }
  throw DomainError("BenchmarkReport: no aggregate for the requested (level, N)");
}

std::vector<Aggregate> aggregate_rows(const std::vector<RunRecord>& rows, const std::vector<NoiseLevel>& levels,
                                      const std::vector<int>& N_list) {
  std::vector<Aggregate> out;
  for (int l = 0; l < static_cast<int>(levels.size()); ++l) {
    for (int N : N_list) {
      Aggregate a;
      a.level = l;
      a.sigma = levels[l].sigma;
      a.snr_target_db = levels[l].snr_target_db;
      a.N = N;
      std::vector<double> ex, er, sx, sr, snr;
      for (const auto& r : rows) {
        if (r.level != l || r.N != N) continue;
        ++a.rows;
        snr.push_back(r.snr_db);
        if (r.status != SynthesisStatus::optimal) {
          ++a.failed;
          continue;
        }
        ++a.solved;
        sx.push_back(r.err_Kx);
        sr.push_back(r.err_Kr);
        if (r.stable) {
          ++a.stable;
          ex.push_back(r.err_Kx);
          er.push_back(r.err_Kr);
        } else {
          ++a.unstable;
        }
      }
      a.snr_mean_db = mean_std(snr).first;
      std::tie(a.mean_err_Kx, a.std_err_Kx) = mean_std(ex);
      std::tie(a.mean_err_Kr, a.std_err_Kr) = mean_std(er);
      a.median_err_Kx = median_of(sx);
      a.median_err_Kr = median_of(sr);
      out.push_back(a);
    }
  }
  return out;
}

namespace {

std::vector<RunRecord> run_one(const ScenarioConfig& cfg, const StateSpaceModel& plant, const ReferenceModel& ref,
                               const std::vector<NoiseLevel>& levels, int run) {
  std::vector<RunRecord> out;
  const Matrix excitation = excitation_signal(cfg, run);
  const Vector x0 = initial_state(cfg, run);
  const int n_max = *std::max_element(cfg.N_list.begin(), cfg.N_list.end());
  for (int l = 0; l < static_cast<int>(levels.size()); ++l) {
    std::vector<SnapshotMatrices> snaps;
    std::vector<double> snrs;
    snaps.reserve(n_max);
    for (int e = 0; e < n_max; ++e) {
      const bool fresh = cfg.independent_inputs && e > 0;
      const int stream = cfg.runs + e * cfg.runs + run;
      const auto rec = experiment_with(cfg, plant, fresh ? excitation_signal(cfg, stream) : excitation,
                                       fresh ? initial_state(cfg, stream) : x0, levels[l].sigma,
                                       derive_seed(cfg.seed, kNoiseStream, static_cast<std::uint64_t>(run),
                                                   (static_cast<std::uint64_t>(l) << 32) | static_cast<std::uint64_t>(e)));
      snrs.push_back(mean_snr(rec));
      snaps.push_back(build_snapshots(rec));
    }
    for (int N : cfg.N_list) {
      RunRecord row;
      row.run = run;
      row.level = l;
      row.sigma = levels[l].sigma;
      row.N = N;
      row.snr_db = std::accumulate(snrs.begin(), snrs.begin() + N, 0.0) / N;
      const auto t0 = std::chrono::steady_clock::now();
      SynthesisOutcome outcome;
      try {
        const auto avg = average_snapshots(std::span<const SnapshotMatrices>(snaps.data(), N));
        outcome = synthesize(avg, ref, cfg.synthesis);
      } catch (const std::exception& e) {
        outcome.status = SynthesisStatus::numerical_failure;
        outcome.diagnostic = e.what();
      }
      row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      row.status = outcome.status;
      if (outcome.ok()) {
        row.gains = outcome.gains;
        row.err_Kx = gain_error(outcome.gains.Kx, cfg.optimal_gains.Kx);
        row.err_Kr = gain_error(outcome.gains.Kr, cfg.optimal_gains.Kr);
        row.rho_cl = spectral_radius(plant.A() + plant.B() * outcome.gains.Kx);
        row.stable = row.rho_cl < kUnstableThreshold;
      } else {
        row.err_Kx = row.err_Kr = row.rho_cl = std::numeric_limits<double>::quiet_NaN();
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace

BenchmarkReport run_monte_carlo(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const StateSpaceModel plant(cfg.A, cfg.B);
  const ReferenceModel ref(cfg.A_M, cfg.B_M);

  BenchmarkReport report;
  report.scenario = cfg.name;
  report.levels = noise_levels(cfg);
  report.N_list = cfg.N_list;
  report.runs = cfg.runs;

  std::vector<std::vector<RunRecord>> per_run(cfg.runs);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < cfg.runs; r = next++) per_run[r] = run_one(cfg, plant, ref, report.levels, r);
  };
  const int workers = std::min(cfg.threads, cfg.runs);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& rows : per_run) {
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }
  report.aggregates = aggregate_rows(report.rows, report.levels, report.N_list);
  report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_report_csv(std::ostream& os, const BenchmarkReport& report) {
  const auto old_precision = os.precision(17);
  os << "run,sigma,snr_db,N,err_Kx,err_Kr,rho_cl,stable,status,ms\n";
  for (const auto& r : report.rows) {
    os << r.run << ',' << r.sigma << ',' << r.snr_db << ',' << r.N << ',' << r.err_Kx << ',' << r.err_Kr << ','
       << r.rho_cl << ',' << (r.stable ? 1 : 0) << ',' << to_string(r.status) << ',' << r.ms << '\n';
  }
  os.precision(old_precision);
}

namespace {

double parse_cell(const std::string& cell) {
  if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw FormatError("report CSV: bad number \"" + cell + "\"");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("report CSV: bad number \"" + cell + "\"");
  }
}

SynthesisStatus status_from_string(const std::string& s) {
  for (auto st : {SynthesisStatus::optimal, SynthesisStatus::infeasible, SynthesisStatus::unbounded,
                  SynthesisStatus::numerical_failure, SynthesisStatus::rank_deficient}) {
    if (s == to_string(st)) return st;
  }
  throw FormatError("report CSV: unknown status \"" + s + "\"");
}

}  // namespace

std::vector<RunRecord> read_report_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "run,sigma,snr_db,N,err_Kx,err_Kr,rho_cl,stable,status,ms") {
    throw FormatError("report CSV: unexpected header");
  }
  std::vector<RunRecord> rows;
  std::vector<double> sigmas;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) throw FormatError("report CSV: expected 10 cells per row");
    RunRecord r;
    r.run = static_cast<int>(parse_cell(cells[0]));
    r.sigma = parse_cell(cells[1]);
    r.snr_db = parse_cell(cells[2]);
    r.N = static_cast<int>(parse_cell(cells[3]));
    r.err_Kx = parse_cell(cells[4]);
    r.err_Kr = parse_cell(cells[5]);
    r.rho_cl = parse_cell(cells[6]);
    r.stable = cells[7] == "1";
    r.status = status_from_string(cells[8]);
    r.ms = parse_cell(cells[9]);
    auto it = std::find(sigmas.begin(), sigmas.end(), r.sigma);
    r.level = static_cast<int>(it - sigmas.begin());
    if (it == sigmas.end()) sigmas.push_back(r.sigma);
    rows.push_back(r);
  }
  return rows;
}

std::string report_summary_json(const BenchmarkReport& report) {
  io::json j;
  j["scenario"] = report.scenario;
  j["runs"] = report.runs;
  j["N_list"] = report.N_list;
  j["total_seconds"] = report.total_seconds;
  j["unstable_threshold"] = kUnstableThreshold;
  io::json levels = io::json::array();
  for (const auto& l : report.levels) {
    levels.push_back({{"sigma", l.sigma}, {"snr_target_db", number_or_string(l.snr_target_db)}});
  }
  j["levels"] = levels;
  io::json aggs = io::json::array();
  for (const auto& a : report.aggregates) {
    aggs.push_back({{"level", a.level},
                    {"sigma", a.sigma},
                    {"snr_target_db", number_or_string(a.snr_target_db)},
                    {"snr_mean_db", number_or_string(a.snr_mean_db)},
                    {"N", a.N},
                    {"rows", a.rows},
                    {"solved", a.solved},
                    {"stable", a.stable},
                    {"unstable", a.unstable},
                    {"failed", a.failed},
                    {"mean_err_Kx", number_or_string(a.mean_err_Kx)},
                    {"std_err_Kx", number_or_string(a.std_err_Kx)},
                    {"mean_err_Kr", number_or_string(a.mean_err_Kr)},
                    {"std_err_Kr", number_or_string(a.std_err_Kr)},
                    {"median_err_Kx", number_or_string(a.median_err_Kx)},
                    {"median_err_Kr", number_or_string(a.median_err_Kr)}});
  }
  j["aggregates"] = aggs;
  return j.dump(2);
}

void write_error_curves_csv(std::ostream& os, const BenchmarkReport& report) {
  const auto old_precision = os.precision(12);
  os << "N,snr_target_db,snr_mean_db,sigma,mean_err_Kx,std_err_Kx,mean_err_Kr,std_err_Kr,stable,unstable,failed\n";
  for (int N : report.N_list) {
    for (const auto& a : report.aggregates) {
      if (a.N != N) continue;
      os << a.N << ',' << a.snr_target_db << ',' << a.snr_mean_db << ',' << a.sigma << ',' << a.mean_err_Kx << ','
         << a.std_err_Kx << ',' << a.mean_err_Kr << ',' << a.std_err_Kr << ',' << a.stable << ',' << a.unstable
         << ',' << a.failed << '\n';
    }
  }
  os.precision(old_precision);
}

Matrix step_reference(int channels, const std::vector<double>& levels, int hold) {
  if (channels < 1 || hold < 1 || levels.empty()) throw DomainError("step_reference: empty reference requested");
  Matrix r(channels, hold * static_cast<int>(levels.size()));
  for (std::size_t k = 0; k < levels.size(); ++k) {
    r.middleCols(static_cast<Eigen::Index>(k) * hold, hold).setConstant(levels[k]);
  }
  return r;
}

MatchingTrajectory matching_trajectory(const ScenarioConfig& cfg, const ControllerGains& gains, const Matrix& refs) {
  const StateSpaceModel plant(cfg.A, cfg.B);
  const ReferenceModel ref(cfg.A_M, cfg.B_M);
  MatchingTrajectory out;
  out.refs = refs;
  const Vector x0 = Vector::Zero(cfg.states());
  out.actual = *simulate_closed_loop(plant, gains, refs, x0, NoiseSpec{}).states_clean;
  out.desired = reference_response(ref, refs, x0);
  return out;
}

void write_matching_csv(std::ostream& os, const MatchingTrajectory& traj) {
  const auto old_precision = os.precision(12);
  const auto n = traj.actual.rows();
  const auto p = traj.refs.rows();
  os << 't';
  for (Eigen::Index j = 0; j < p; ++j) os << ",r_" << j + 1;
  for (Eigen::Index j = 0; j < n; ++j) os << ",x_" << j + 1;
  for (Eigen::Index j = 0; j < n; ++j) os << ",xd_" << j + 1;
  os << '\n';
  for (Eigen::Index t = 0; t < traj.actual.cols(); ++t) {
    os << t;
    for (Eigen::Index j = 0; j < p; ++j) {
      os << ',';
      if (t < traj.refs.cols()) os << traj.refs(j, t);
    }
    for (Eigen::Index j = 0; j < n; ++j) os << ',' << traj.actual(j, t);
    for (Eigen::Index j = 0; j < n; ++j) os << ',' << traj.desired(j, t);
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace ddmr
