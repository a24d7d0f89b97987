#include "ddmr/lti.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ddmr/errors.hpp"

namespace ddmr {

StateSpaceModel::StateSpaceModel(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols()) throw DimensionError("StateSpaceModel: A must be square");
  if (a_.rows() == 0) throw DimensionError("StateSpaceModel: empty state dimension");
  if (b_.rows() != a_.rows()) throw DimensionError("StateSpaceModel: B row count must equal A dimension");
  if (b_.cols() == 0) throw DimensionError("StateSpaceModel: B has no input columns");
  if (!a_.allFinite() || !b_.allFinite()) throw DomainError("StateSpaceModel: non-finite entries");
}

ReferenceModel::ReferenceModel(Matrix a_m, Matrix b_m) : a_(std::move(a_m)), b_(std::move(b_m)) {
  if (a_.rows() != a_.cols() || a_.rows() == 0) throw DimensionError("ReferenceModel: A_M must be square");
  if (b_.rows() != a_.rows() || b_.cols() != a_.rows()) {
    throw DimensionError("ReferenceModel: B_M must be n x n with n = dim(A_M)");
  }
  if (!a_.allFinite() || !b_.allFinite()) throw DomainError("ReferenceModel: non-finite entries");
  if (spectral_radius(a_) >= 1.0 - kStabilityTolerance) {
    throw DomainError("ReferenceModel: A_M is not Schur stable");
  }
}

void ControllerGains::validate() const {
  if (Kx.rows() != Kr.rows() || Kx.cols() != Kr.cols()) {
    throw DimensionError("ControllerGains: K_x and K_r must share dimensions");
  }
  if (!Kx.allFinite() || !Kr.allFinite()) throw DomainError("ControllerGains: non-finite entries");
}

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("NoiseSpec: sigma must be finite and >= 0");
}

void ExperimentRecord::validate() const {
  const auto t = inputs.cols();
  if (t < 1) throw DimensionError("ExperimentRecord: empty input sequence");
  if (states_measured.cols() != t + 1) {
    throw DimensionError("ExperimentRecord: state sequence must have T+1 samples");
  }
  const auto n = states_measured.rows();
  auto check = [&](const std::optional<Matrix>& m, const char* what) {
    if (m && (m->rows() != n || m->cols() != t + 1)) {
      throw DimensionError(std::string("ExperimentRecord: ") + what + " shape mismatch");
    }
  };
  check(states_clean, "clean states");
  check(noise, "noise");
  if (references && references->cols() != t) {
    throw DimensionError("ExperimentRecord: reference sequence must have T samples");
  }
  if (states_clean && noise) {
    const Matrix diff = states_measured - (*states_clean + *noise);
    const double scale = 1.0 + states_measured.cwiseAbs().maxCoeff() + noise->cwiseAbs().maxCoeff();
    if (diff.cwiseAbs().maxCoeff() > 1e-13 * scale) {
      throw DimensionError("ExperimentRecord: measured states differ from clean + noise");
    }
  }
}

ExperimentRecord ExperimentRecord::without_oracle() const {
  ExperimentRecord out = *this;
  out.states_clean.reset();
  out.noise.reset();
  return out;
}

Matrix gaussian_noise(int rows, int cols, const NoiseSpec& spec) {
  spec.validate();
  Matrix v = Matrix::Zero(rows, cols);
  if (spec.sigma == 0.0) return v;
  boost::random::mt19937_64 gen(spec.seed);
  boost::random::normal_distribution<double> dist(0.0, spec.sigma);
  for (int t = 0; t < cols; ++t) {
    for (int j = 0; j < rows; ++j) v(j, t) = dist(gen);
  }
  return v;
}

namespace {

void require_vector(const Vector& x0, int n, const char* who) {
  if (x0.size() != n) throw DimensionError(std::string(who) + ": x0 dimension mismatch");
}

}  // namespace

ExperimentRecord simulate_open_loop(const StateSpaceModel& model, const Matrix& inputs,
                                    const Vector& x0, const NoiseSpec& noise) {
  const int n = model.states();
  if (inputs.cols() < 1) throw DimensionError("simulate_open_loop: empty input sequence");
  if (inputs.rows() != model.inputs()) throw DimensionError("simulate_open_loop: input dimension mismatch");
  require_vector(x0, n, "simulate_open_loop");
  noise.validate();

  const auto t_len = inputs.cols();
  Matrix clean(n, t_len + 1);
  clean.col(0) = x0;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    clean.col(t + 1) = model.A() * clean.col(t) + model.B() * inputs.col(t);
  }
  ExperimentRecord rec;
  rec.inputs = inputs;
  rec.noise = gaussian_noise(n, static_cast<int>(t_len + 1), noise);
  rec.states_measured = clean + *rec.noise;
  rec.states_clean = std::move(clean);
  rec.seed = noise.seed;
  return rec;
}

ExperimentRecord simulate_closed_loop(const StateSpaceModel& model, const ControllerGains& gains,
                                      const Matrix& refs, const Vector& x0, const NoiseSpec& noise) {
  gains.validate();
  const int n = model.states();
  const int m = model.inputs();
  if (gains.Kx.rows() != m || gains.Kx.cols() != n) {
    throw DimensionError("simulate_closed_loop: gains must be m x n");
  }
  if (refs.rows() != n) throw DimensionError("simulate_closed_loop: references must be n-dimensional");
  if (refs.cols() < 1) throw DimensionError("simulate_closed_loop: empty reference sequence");
  require_vector(x0, n, "simulate_closed_loop");
  noise.validate();

  const auto t_len = refs.cols();
  Matrix v = gaussian_noise(n, static_cast<int>(t_len + 1), noise);
  Matrix clean(n, t_len + 1);
  Matrix u(m, t_len);
  clean.col(0) = x0;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const Vector measured = clean.col(t) + v.col(t);
    u.col(t) = gains.Kx * measured + gains.Kr * refs.col(t);
    clean.col(t + 1) = model.A() * clean.col(t) + model.B() * u.col(t);
  }
  ExperimentRecord rec;
  rec.inputs = std::move(u);
  rec.states_measured = clean + v;
  rec.states_clean = std::move(clean);
  rec.noise = std::move(v);
  rec.references = refs;
  rec.seed = noise.seed;
  return rec;
}

Matrix reference_response(const ReferenceModel& ref, const Matrix& refs, const Vector& xd0) {
  const int n = ref.states();
  if (refs.rows() != n) throw DimensionError("reference_response: references must be n-dimensional");
  require_vector(xd0, n, "reference_response");
  Matrix xd(n, refs.cols() + 1);
  xd.col(0) = xd0;
  for (Eigen::Index t = 0; t < refs.cols(); ++t) {
    xd.col(t + 1) = ref.A() * xd.col(t) + ref.B() * refs.col(t);
  }
  return xd;
}

Matrix dc_gain(const Matrix& a, const Matrix& bmap) {
  if (a.rows() != a.cols() || bmap.rows() != a.rows()) throw DimensionError("dc_gain: dimension mismatch");
  const Matrix lhs = Matrix::Identity(a.rows(), a.cols()) - a;
  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible()) throw SingularityError("dc_gain: I - A is singular");
  return lu.solve(bmap);
}

ExperimentRecord detrend(const ExperimentRecord& record) {
  record.validate();
  ExperimentRecord out = record;
  const Vector mean = record.states_measured.rowwise().mean();
  out.states_measured.colwise() -= mean;
  if (out.states_clean && out.noise) {
    // keep measured == clean + noise: shift the clean part by the same offset
    out.states_clean->colwise() -= mean;
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const ExperimentRecord& record, bool with_oracle) {
  record.validate();
  if (with_oracle && !record.has_oracle()) {
    throw MissingOracleError("write_trajectory_csv: oracle export requested but record has no oracle data");
  }
  const int m = record.input_dim();
  const int n = record.states();
  const int t_len = record.length();
  os << "t";
  for (int i = 1; i <= m; ++i) os << ",u_" << i;
  for (int i = 1; i <= n; ++i) os << ",x_" << i;
  if (with_oracle) {
    for (int i = 1; i <= n; ++i) os << ",xo_" << i;
    for (int i = 1; i <= n; ++i) os << ",v_" << i;
  }
  os << '\n';
  const auto old_precision = os.precision(17);
  for (int t = 0; t <= t_len; ++t) {
    os << t;
    for (int i = 0; i < m; ++i) {
      os << ',';
      if (t < t_len) os << record.inputs(i, t);
    }
    for (int i = 0; i < n; ++i) os << ',' << record.states_measured(i, t);
    if (with_oracle) {
      for (int i = 0; i < n; ++i) os << ',' << (*record.states_clean)(i, t);
      for (int i = 0; i < n; ++i) os << ',' << (*record.noise)(i, t);
    }
    os << '\n';
  }
  os.precision(old_precision);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  for (auto& c : cells) {
    while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
    while (!c.empty() && c.front() == ' ') c.erase(c.begin());
  }
  return cells;
}

double parse_cell(const std::string& cell, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw FormatError("trajectory CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
  }
}

}  // namespace

ExperimentRecord read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("trajectory CSV: missing header");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t") throw FormatError("trajectory CSV: header must start with 't'");
  int m = 0, n = 0, no = 0, nv = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string& h = header[i];
    const auto expect = [&](const std::string& prefix, int& count) {
      if (h != prefix + std::to_string(count + 1)) return false;
      ++count;
      return true;
    };
    if (n == 0 && no == 0 && nv == 0 && expect("u_", m)) continue;
    if (no == 0 && nv == 0 && expect("x_", n)) continue;
    if (nv == 0 && expect("xo_", no)) continue;
    if (expect("v_", nv)) continue;
    throw FormatError("trajectory CSV: unexpected column '" + h + "'");
  }
  if (m == 0 || n == 0) throw FormatError("trajectory CSV: needs at least one u_ and one x_ column");
  const bool oracle = no > 0 || nv > 0;
  if (oracle && (no != n || nv != n)) throw FormatError("trajectory CSV: oracle columns must match state count");

  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.size() < 2) throw FormatError("trajectory CSV: need at least two time steps");
  const auto t_len = static_cast<Eigen::Index>(rows.size() - 1);
  ExperimentRecord rec;
  rec.inputs.resize(m, t_len);
  rec.states_measured.resize(n, t_len + 1);
  Matrix clean(n, t_len + 1), noise(n, t_len + 1);
  for (Eigen::Index t = 0; t <= t_len; ++t) {
    const auto& r = rows[static_cast<std::size_t>(t)];
    const int line_no = static_cast<int>(t) + 2;
    if (r.size() != header.size()) {
      throw FormatError("trajectory CSV line " + std::to_string(line_no) + ": wrong number of cells");
    }
    if (parse_cell(r[0], line_no) != static_cast<double>(t)) {
      throw FormatError("trajectory CSV line " + std::to_string(line_no) + ": time index out of sequence");
    }
    std::size_t c = 1;
    for (int i = 0; i < m; ++i, ++c) {
      if (t < t_len) {
        rec.inputs(i, t) = parse_cell(r[c], line_no);
      } else if (!r[c].empty()) {
        throw FormatError("trajectory CSV: final row must leave input cells empty");
      }
    }
    for (int i = 0; i < n; ++i, ++c) rec.states_measured(i, t) = parse_cell(r[c], line_no);
    if (oracle) {
      for (int i = 0; i < n; ++i, ++c) clean(i, t) = parse_cell(r[c], line_no);
      for (int i = 0; i < n; ++i, ++c) noise(i, t) = parse_cell(r[c], line_no);
    }
  }
  if (oracle) {
    rec.states_clean = std::move(clean);
    rec.noise = std::move(noise);
  }
  rec.validate();
  return rec;
}

}  // namespace ddmr
