#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddmr/benchmark.hpp"
#include "ddmr/certificate.hpp"
#include "ddmr/errors.hpp"
#include "ddmr/io.hpp"
#include "ddmr/sdp.hpp"
#include "ddmr/snapshots.hpp"
#include "ddmr/synthesis.hpp"

namespace fs = std::filesystem;
using namespace ddmr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitUsage = 2;

/// Outcome-level failure (infeasible, uncertified, rank condition); maps to exit status 1.
class Rejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ScenarioConfig load_scenario(const std::string& spec) {
  const auto [stable, unstable] = builtin_scenarios();
  if (spec == "stable") return stable;
  if (spec == "unstable") return unstable;
  return scenario_from_json(io::read_text_file(spec));
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_file(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  io::write_text_file(p.string(), text);
}

template <class Fn>
void write_stream(const fs::path& p, Fn&& fn) {
  ensure_parent(p);
  std::ofstream out(p);
  if (!out) throw IoError("cannot write file '" + p.string() + "'");
  fn(out);
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file '" + path + "'");
  return read_matrix_csv(in);
}

ExperimentRecord read_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file '" + path + "'");
  return read_trajectory_csv(in);
}

struct Dataset {
  std::vector<SnapshotMatrices> members;

  SnapshotMatrices combined() const {
    if (members.size() == 1) return members.front();
    return average_snapshots(members);
  }
  bool averaged() const { return members.size() > 1; }
};

void add_trajectory(Dataset& ds, const std::string& path, bool detrend_data) {
  auto rec = read_trajectory_file(path);
  if (detrend_data) rec = detrend(rec);
  ds.members.push_back(build_snapshots(rec));
}

/// Trajectory CSVs, directories of trajectory CSVs, snapshot CSV directories, or snapshot JSON files.
Dataset load_dataset(const std::vector<std::string>& paths, bool detrend_data) {
  if (paths.empty()) throw UsageError("no input data given (use --data)");
  Dataset ds;
  for (const auto& p : paths) {
    const fs::path path(p);
    if (fs::is_directory(path)) {
      if (fs::exists(path / "U0.csv")) {
        if (detrend_data) throw UsageError("--detrend applies to trajectory files, not snapshot directories");
        ds.members.push_back(read_snapshot_csv_dir(p));
        continue;
      }
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
      }
      if (files.empty()) throw IoError("directory '" + p + "' holds no trajectory CSV files");
      std::sort(files.begin(), files.end());
      for (const auto& f : files) add_trajectory(ds, f.string(), detrend_data);
    } else if (!fs::exists(path)) {
      throw IoError("input '" + p + "' does not exist");
    } else if (path.extension() == ".json") {
      if (detrend_data) throw UsageError("--detrend applies to trajectory files, not snapshot JSON");
      ds.members.push_back(snapshots_from_json(io::read_text_file(p)));
    } else {
      add_trajectory(ds, p, detrend_data);
    }
  }
  return ds;
}

struct SynthesisFlags {
  std::string mode = "sdp";
  double lambda = 1.0;
  double lambda1 = 0.0;
  double dc_gain_weight = 0.0;
  std::string norm = "l1";
  double lmi_margin = 1e-10;
  double exact_tolerance = 1e-6;
  bool no_rank_check = false;
  int max_iterations = 120;
  bool verbose = false;
  std::vector<CLI::Option*> options;

  void attach(CLI::App* app) {
    options.push_back(app->add_option("--mode", mode, "exact | relaxed_unstab | sdp | averaged_sdp")
                          ->check(CLI::IsMember({"exact", "relaxed_unstab", "relaxed", "sdp", "averaged_sdp",
                                                 "averaged"})));
    options.push_back(app->add_option("--lambda", lambda, "weight of the B_M matching term"));
    options.push_back(app->add_option("--lambda1", lambda1, "weight of the gain-size regularizer"));
    options.push_back(app->add_option("--dc-gain-weight", dc_gain_weight, "weight of the unit DC-gain penalty"));
    options.push_back(app->add_option("--norm", norm, "matching norm: l1 | fro")
                          ->check(CLI::IsMember({"l1", "fro", "frobenius"})));
    options.push_back(app->add_option("--lmi-margin", lmi_margin, "Lyapunov LMI margin (> 0)"));
    options.push_back(app->add_option("--exact-tolerance", exact_tolerance, "relative residual for exact mode"));
    options.push_back(app->add_flag("--no-rank-check", no_rank_check, "skip the rank([U0; X0]) = n + m gate"));
    options.push_back(app->add_option("--max-iterations", max_iterations, "interior-point iteration limit"));
    options.push_back(app->add_flag("--verbose", verbose, "print solver iterations"));
  }


  /// Overwrites every field, or (only_given) just the ones passed on the command line.
  SynthesisOptions apply(SynthesisOptions o, bool only_given = false) const {
    auto use = [&](std::size_t k) { return !only_given || options[k]->count() > 0; };
    if (use(0)) o.mode = synthesis_mode_from_string(mode);
    if (use(1)) o.lambda = lambda;
    if (use(2)) o.lambda1 = lambda1;
    if (use(3)) o.dc_gain_weight = dc_gain_weight;
    if (use(4)) o.norm = norm == "l1" ? sdp::NormKind::l1 : sdp::NormKind::frobenius;
    if (use(5)) o.lmi_margin = lmi_margin;
    if (use(6)) o.exact_tolerance = exact_tolerance;
    if (use(7)) o.require_rank_condition = !no_rank_check;
    if (use(8)) o.solver.max_iterations = max_iterations;
    if (use(9)) o.solver.verbose = verbose;
    o.validate();
    return o;
  }
};

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario;
  std::string model;
  std::string inputs;
  std::string gains;
  std::string refs;
  std::vector<double> x0;
  int run = 0;
  int T = 0;
  double sigma = 0.0;
  std::optional<double> snr;
  std::uint64_t seed = 0;
  int experiments = 1;
  bool oracle = false;
  bool detrend_data = false;
  std::string out;
  std::string snapshots_out;
};

int cmd_simulate(const SimulateArgs& a, CLI::App* app) {
  if (a.experiments < 1) throw UsageError("--experiments must be >= 1");
  const bool seed_given = app->count("--seed") > 0;
  std::vector<ExperimentRecord> records;

  if (!a.scenario.empty()) {
    if (!a.model.empty() || !a.inputs.empty() || !a.gains.empty() || !a.refs.empty()) {
      throw UsageError("--scenario cannot be combined with --model/--inputs/--gains/--refs");
    }
    auto cfg = load_scenario(a.scenario);
    if (a.T > 0) cfg.T = a.T;
    if (seed_given) cfg.seed = a.seed;
    cfg.validate();
    const double sigma = a.snr ? calibrate_sigma(cfg, *a.snr) : a.sigma;
    if (a.snr) std::cerr << "calibrated sigma = " << sigma << " for " << *a.snr << " dB\n";
    for (int e = 0; e < a.experiments; ++e) records.push_back(run_experiment(cfg, a.run, sigma, e));
  } else {
    if (a.model.empty()) throw UsageError("give --scenario or --model");
    if (a.snr) throw UsageError("--snr needs --scenario (calibration uses the scenario's excitation)");
    const auto plant = io::model_from_json(io::read_json_file(a.model));
    Vector x0 = Vector::Zero(plant.states());
    if (!a.x0.empty()) {
      if (static_cast<int>(a.x0.size()) != plant.states()) throw DimensionError("--x0 must have n entries");
      x0 = Eigen::Map<const Vector>(a.x0.data(), static_cast<Eigen::Index>(a.x0.size()));
    }
    const bool closed = !a.gains.empty();
    if (closed == a.refs.empty()) throw UsageError("closed-loop simulation needs both --gains and --refs");
    if (closed == !a.inputs.empty()) throw UsageError("give --inputs (open loop) or --gains/--refs (closed loop)");
    for (int e = 0; e < a.experiments; ++e) {
      const NoiseSpec noise{a.sigma, derive_seed(a.seed, 0x53494d55ULL, static_cast<std::uint64_t>(e))};
      if (closed) {
        const auto gains = io::gains_from_json(io::read_json_file(a.gains));
        records.push_back(simulate_closed_loop(plant, gains, read_matrix_file(a.refs), x0, noise));
      } else {
        records.push_back(simulate_open_loop(plant, read_matrix_file(a.inputs), x0, noise));
      }
    }
  }
  if (a.detrend_data) {
    for (auto& r : records) r = detrend(r);
  }

  if (!a.out.empty()) {
    if (records.size() == 1) {
      write_stream(a.out, [&](std::ostream& os) { write_trajectory_csv(os, records.front(), a.oracle); });
    } else {
      fs::create_directories(a.out);
      for (std::size_t e = 0; e < records.size(); ++e) {
        std::ostringstream name;
        name << "exp_" << std::setw(4) << std::setfill('0') << e << ".csv";
        write_stream(fs::path(a.out) / name.str(),
                     [&](std::ostream& os) { write_trajectory_csv(os, records[e], a.oracle); });
      }
    }
  }
  if (!a.snapshots_out.empty()) {
    std::vector<SnapshotMatrices> snaps;
    for (const auto& r : records) snaps.push_back(build_snapshots(r));
    fs::create_directories(a.snapshots_out);
    write_snapshot_csv_dir(a.snapshots_out, average_snapshots(snaps), a.oracle);
  }
  if (a.out.empty() && a.snapshots_out.empty()) {
    if (records.size() != 1) throw UsageError("several experiments need --out DIR or --snapshots-out DIR");
    write_trajectory_csv(std::cout, records.front(), a.oracle);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synthesize

struct SynthesizeArgs {
  std::vector<std::string> data;
  std::string ref;
  std::string scenario;
  bool detrend_data = false;
  std::string out;
  std::string export_sdpa;
  SynthesisFlags flags;
};

ReferenceModel load_reference(const std::string& ref, const std::string& scenario) {
  if (!ref.empty() && !scenario.empty()) throw UsageError("give either --ref or --scenario, not both");
  if (!ref.empty()) return io::reference_from_json(io::read_json_file(ref));
  if (!scenario.empty()) {
    const auto cfg = load_scenario(scenario);
    return ReferenceModel(cfg.A_M, cfg.B_M);
  }
  throw UsageError("a reference model is required (--ref FILE or --scenario NAME)");
}

int cmd_synthesize(const SynthesizeArgs& a) {
  const auto opts = a.flags.apply(SynthesisOptions{});
  const auto ref = load_reference(a.ref, a.scenario);
  const auto ds = load_dataset(a.data, a.detrend_data);
  const auto snap = ds.combined();

  if (!a.export_sdpa.empty()) {
    if (opts.mode != SynthesisMode::sdp && opts.mode != SynthesisMode::averaged_sdp) {
      throw UsageError("--export-sdpa needs --mode sdp or averaged_sdp");
    }
    write_file(a.export_sdpa, sdp::export_problem(build_sdp_problem(snap, ref, opts)));
  }

  const auto outcome = synthesize(snap, ref, opts);
  const auto json = outcome_to_json(outcome);
  if (a.out.empty()) {
    std::cout << json << '\n';
  } else {
    write_file(a.out, json + "\n");
    std::cout << "status " << to_string(outcome.status) << ", objective " << outcome.objective_value
              << ", experiments " << ds.members.size() << "\n";
  }
  if (!outcome.ok()) {
    throw Rejected(std::string("synthesis ") + to_string(outcome.status) + ": " + outcome.diagnostic);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string outcome;
  std::vector<std::string> data;
  std::string model;
  std::string scenario;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  const auto outcome = outcome_from_json(io::read_text_file(a.outcome));
  const auto ds = load_dataset(a.data, false);
  const auto snap = ds.combined();

  std::optional<StateSpaceModel> plant;
  if (!a.model.empty() && !a.scenario.empty()) throw UsageError("give either --model or --scenario, not both");
  if (!a.model.empty()) plant = io::model_from_json(io::read_json_file(a.model));
  if (!a.scenario.empty()) {
    const auto cfg = load_scenario(a.scenario);
    plant = StateSpaceModel(cfg.A, cfg.B);
  }

  const auto report = check_noise_energy(snap, ds.averaged());
  if (!outcome.Qx || !outcome.P) {
    throw Rejected("outcome carries no Lyapunov variables (Qx, P); synthesize with --mode sdp or averaged_sdp");
  }
  if (outcome.Qx->rows() != snap.length()) {
    throw DimensionError("outcome Qx has " + std::to_string(outcome.Qx->rows()) + " rows but the data have T = " +
                         std::to_string(snap.length()));
  }

  StabilityCertificate cert;
  try {
    cert = noise_robust_certificate(report, compute_alpha_beta(snap.X1, *outcome.Qx, *outcome.P));
  } catch (const DomainError& e) {
    cert.certified = false;
    cert.reason = e.what();
    cert.gamma1 = report.gamma1;
    cert.gamma2 = report.gamma2;
  }

  std::cout << certificate_report(cert, report);
  if (plant && outcome.gains.Kx.size() > 0) {
    const Matrix acl = plant->A() + plant->B() * outcome.gains.Kx;
    std::cout << "oracle         rho(A + B Kx) = " << spectral_radius(acl)
              << ", Lyapunov check with P: " << (check_lyapunov(acl, *outcome.P) ? "holds" : "fails") << '\n';
  }
  if (!a.out.empty()) write_file(a.out, certificate_to_json(cert, report) + "\n");
  if (!cert.certified) throw Rejected("not certified: " + cert.reason);
  return kExitOk;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkArgs {
  std::string config;
  std::string scenario;
  int runs = 0;
  std::vector<int> N_list;
  std::vector<double> snr;
  std::vector<double> sigma;
  std::uint64_t seed = 0;
  int threads = 0;
  int T = 0;
  bool full = false;
  std::string out;
  SynthesisFlags flags;
};

int cmd_benchmark(const BenchmarkArgs& a, CLI::App* app) {
  if (a.config.empty() == a.scenario.empty()) throw UsageError("give exactly one of --config FILE or --scenario NAME");
  auto cfg = load_scenario(a.config.empty() ? a.scenario : a.config);
  if (a.full) cfg = full_scale(cfg);
  if (a.runs > 0) cfg.runs = a.runs;
  if (!a.N_list.empty()) cfg.N_list = a.N_list;
  if (!a.snr.empty() || !a.sigma.empty()) {
    cfg.snr_targets_db = a.snr;
    cfg.sigma_values = a.sigma;
  }
  if (app->count("--seed")) cfg.seed = a.seed;
  if (a.threads > 0) cfg.threads = a.threads;
  if (a.T > 0) cfg.T = a.T;
  cfg.synthesis = a.flags.apply(cfg.synthesis, true);
  cfg.validate();

  const auto report = run_monte_carlo(cfg);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_file(dir / "scenario.json", scenario_to_json(cfg) + "\n");
  write_stream(dir / "report.csv", [&](std::ostream& os) { write_report_csv(os, report); });
  write_file(dir / "summary.json", report_summary_json(report) + "\n");
  write_stream(dir / "error_curves.csv", [&](std::ostream& os) { write_error_curves_csv(os, report); });

  const Matrix steps = step_reference(static_cast<int>(cfg.B_M.cols()));
  for (const auto& row : report.rows) {
    if (row.run != 0 || row.status != SynthesisStatus::optimal) continue;
    std::ostringstream name;
    name << "matching_level" << row.level << "_N" << row.N << ".csv";
    const auto traj = matching_trajectory(cfg, row.gains, steps);
    write_stream(dir / "trajectories" / name.str(), [&](std::ostream& os) { write_matching_csv(os, traj); });
  }

  std::cout << "scenario " << report.scenario << ": " << report.runs << " runs, " << report.rows.size()
            << " syntheses in " << std::fixed << std::setprecision(2) << report.total_seconds << " s\n";
  std::cout << std::setprecision(4);
  std::cout << "  target_dB  snr_dB     sigma        N  unstable  failed  median_err_Kx  median_err_Kr\n";
  for (const auto& ag : report.aggregates) {
    std::cout << "  " << std::setw(9) << ag.snr_target_db << "  " << std::setw(7) << ag.snr_mean_db << "  "
              << std::setw(10) << ag.sigma << "  " << std::setw(5) << ag.N << "  " << std::setw(8) << ag.unstable
              << "  " << std::setw(6) << ag.failed << "  " << std::setw(13) << ag.median_err_Kx << "  "
              << std::setw(13) << ag.median_err_Kr << '\n';
  }
  std::cout << "written to " << dir.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- scenarios

int cmd_scenarios(const std::string& out, bool full) {
  auto [stable, unstable] = builtin_scenarios();
  if (full) {
    stable = full_scale(stable);
    unstable = full_scale(unstable);
  }
  if (out.empty()) {
    std::cout << scenario_to_json(stable) << '\n' << scenario_to_json(unstable) << '\n';
    return kExitOk;
  }
  fs::create_directories(out);
  write_file(fs::path(out) / "stable.json", scenario_to_json(stable) + "\n");
  write_file(fs::path(out) / "unstable.json", scenario_to_json(unstable) + "\n");
  std::cout << "wrote " << (fs::path(out) / "stable.json").string() << " and "
            << (fs::path(out) / "unstable.json").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven model-reference controller synthesis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate experiments and write trajectory CSV");
  simulate->add_option("--scenario", sim.scenario, "built-in scenario (stable | unstable) or scenario JSON");
  simulate->add_option("--model", sim.model, "plant JSON {\"A\", \"B\"}");
  simulate->add_option("--inputs", sim.inputs, "open-loop input matrix CSV (m x T)");
  simulate->add_option("--gains", sim.gains, "closed-loop gains JSON {\"K_x\", \"K_r\"}");
  simulate->add_option("--refs", sim.refs, "closed-loop reference matrix CSV (n x T)");
  simulate->add_option("--x0", sim.x0, "initial state (model mode)");
  simulate->add_option("--run", sim.run, "scenario run index (selects excitation and x0)");
  simulate->add_option("--T", sim.T, "override the scenario horizon");
  simulate->add_option("--sigma", sim.sigma, "measurement noise standard deviation");
  simulate->add_option("--snr", sim.snr, "target SNR in dB (calibrates sigma; scenario mode)");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--experiments", sim.experiments, "repeated experiments with the same excitation");
  simulate->add_flag("--oracle", sim.oracle, "include clean states and noise columns");
  simulate->add_flag("--detrend", sim.detrend_data, "remove per-channel state means");
  simulate->add_option("--out", sim.out, "output CSV (one experiment) or directory (several)");
  simulate->add_option("--snapshots-out", sim.snapshots_out, "write averaged snapshot matrices to this directory");

  SynthesizeArgs syn;
  auto* synthesize_cmd = app.add_subcommand("synthesize", "design K_x, K_r from data");
  synthesize_cmd->add_option("--data", syn.data, "trajectory CSVs, directories, or snapshot JSON (averaged)")
      ->required();
  synthesize_cmd->add_option("--ref", syn.ref, "reference model JSON {\"A_M\", \"B_M\"}");
  synthesize_cmd->add_option("--scenario", syn.scenario, "take the reference model from a scenario");
  synthesize_cmd->add_flag("--detrend", syn.detrend_data, "remove per-channel state means before synthesis");
  synthesize_cmd->add_option("--out", syn.out, "outcome JSON (default: stdout)");
  synthesize_cmd->add_option("--export-sdpa", syn.export_sdpa, "also write the conic program in SDPA format");
  syn.flags.attach(synthesize_cmd);

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "check the noise-robust stability certificate");
  verify->add_option("--outcome", ver.outcome, "outcome JSON from synthesize")->required();
  verify->add_option("--data", ver.data, "the same data, with oracle columns")->required();
  verify->add_option("--model", ver.model, "oracle plant JSON for a closed-loop check");
  verify->add_option("--scenario", ver.scenario, "take the oracle plant from a scenario");
  verify->add_option("--out", ver.out, "certificate JSON");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Monte Carlo sweep over noise levels and N");
  benchmark->add_option("--config", bench.config, "scenario JSON");
  benchmark->add_option("--scenario", bench.scenario, "built-in scenario: stable | unstable");
  benchmark->add_option("--runs", bench.runs, "Monte Carlo runs");
  benchmark->add_option("--N-list", bench.N_list, "numbers of averaged experiments");
  benchmark->add_option("--snr", bench.snr, "target SNRs in dB");
  benchmark->add_option("--sigma", bench.sigma, "noise levels given directly");
  benchmark->add_option("--seed", bench.seed, "master seed");
  benchmark->add_option("--threads", bench.threads, "worker threads");
  benchmark->add_option("--T", bench.T, "experiment horizon");
  benchmark->add_flag("--full-scale", bench.full, "100 runs, N up to 1000, SNR 3..100 dB");
  benchmark->add_option("--out", bench.out, "output directory")->required();
  bench.flags.attach(benchmark);

  std::string scen_out;
  bool scen_full = false;
  auto* scenarios = app.add_subcommand("scenarios", "dump the built-in scenario configurations");
  scenarios->add_option("--out", scen_out, "output directory");
  scenarios->add_flag("--full-scale", scen_full, "emit the long-sweep settings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, simulate);
    if (*synthesize_cmd) return cmd_synthesize(syn);
    if (*verify) return cmd_verify(ver);
    if (*benchmark) return cmd_benchmark(bench, benchmark);
    if (*scenarios) return cmd_scenarios(scen_out, scen_full);
  } catch (const Rejected& e) {
    std::cerr << "ddmr: " << e.what() << '\n';
    return kExitRejected;
  } catch (const UsageError& e) {
    std::cerr << "ddmr: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "ddmr: file error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "ddmr: malformed input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    std::cerr << "ddmr: dimension mismatch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MissingOracleError& e) {
    std::cerr << "ddmr: oracle data required: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "ddmr: invalid value: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SingularityError& e) {
    std::cerr << "ddmr: singular matrix: " << e.what() << '\n';
    return kExitRejected;
  } catch (const std::exception& e) {
    std::cerr << "ddmr: error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
