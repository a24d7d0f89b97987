#include "ddmr/snapshots.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ddmr/errors.hpp"
#include "ddmr/io.hpp"

namespace ddmr {

namespace fs = std::filesystem;

void SnapshotMatrices::validate() const {
  const auto t = U0.cols();
  const auto n = X0.rows();
  if (t < 1) throw DimensionError("SnapshotMatrices: no columns");
  if (X0.cols() != t || X1.cols() != t) throw DimensionError("SnapshotMatrices: blocks must share column count");
  if (X1.rows() != n) throw DimensionError("SnapshotMatrices: X0 and X1 row counts differ");
  for (const auto* b : {&V0, &V1, &X0_clean, &X1_clean}) {
    if (*b && ((*b)->rows() != n || (*b)->cols() != t)) {
      throw DimensionError("SnapshotMatrices: optional block shape mismatch");
    }
  }
}

SnapshotMatrices build_snapshots(const ExperimentRecord& record) {
  record.validate();
  const int t = record.length();
  SnapshotMatrices s;
  s.U0 = record.inputs;
  s.X0 = record.states_measured.leftCols(t);
  s.X1 = record.states_measured.rightCols(t);
  if (record.noise) {
    s.V0 = record.noise->leftCols(t);
    s.V1 = record.noise->rightCols(t);
  }
  if (record.states_clean) {
    s.X0_clean = record.states_clean->leftCols(t);
    s.X1_clean = record.states_clean->rightCols(t);
  }
  return s;
}

SnapshotMatrices average_snapshots(std::span<const SnapshotMatrices> members) {
  if (members.empty()) throw DomainError("average_snapshots: empty list");
  const SnapshotMatrices& first = members.front();
  first.validate();
  for (const auto& s : members) {
    s.validate();
    if (s.U0.rows() != first.U0.rows() || s.X0.rows() != first.X0.rows() || s.length() != first.length()) {
      throw DimensionError("average_snapshots: members differ in dimensions");
    }
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  auto mean_of = [&](auto getter) {
    Matrix acc = Matrix::Zero(getter(first).rows(), getter(first).cols());
    for (const auto& s : members) acc += getter(s);
    return Matrix(acc * inv);
  };
  auto mean_opt = [&](auto getter) -> std::optional<Matrix> {
    for (const auto& s : members) {
      if (!getter(s)) return std::nullopt;
    }
    return mean_of([&](const SnapshotMatrices& s) -> const Matrix& { return *getter(s); });
  };
  SnapshotMatrices out;
  out.U0 = mean_of([](const SnapshotMatrices& s) -> const Matrix& { return s.U0; });
  out.X0 = mean_of([](const SnapshotMatrices& s) -> const Matrix& { return s.X0; });
  out.X1 = mean_of([](const SnapshotMatrices& s) -> const Matrix& { return s.X1; });
  out.V0 = mean_opt([](const SnapshotMatrices& s) -> const std::optional<Matrix>& { return s.V0; });
  out.V1 = mean_opt([](const SnapshotMatrices& s) -> const std::optional<Matrix>& { return s.V1; });
  out.X0_clean = mean_opt([](const SnapshotMatrices& s) -> const std::optional<Matrix>& { return s.X0_clean; });
  out.X1_clean = mean_opt([](const SnapshotMatrices& s) -> const std::optional<Matrix>& { return s.X1_clean; });
  return out;
}

RankReport check_rank_condition(const SnapshotMatrices& snap, double rel_tol) {
  snap.validate();
  Matrix stacked(snap.inputs() + snap.states(), snap.length());
  stacked << snap.U0, snap.X0;
  const RankInfo info = numerical_rank(stacked, rel_tol);
  RankReport r;
  r.stacked_rank = info.rank;
  r.required = snap.inputs() + snap.states();
  r.singular_values = info.singular_values;
  r.satisfied = r.stacked_rank == r.required;
  return r;
}

Matrix block_hankel(const Matrix& inputs, int order) {
  if (order < 1) throw DomainError("block_hankel: order must be >= 1");
  const auto t = inputs.cols();
  if (order > t) throw DimensionError("block_hankel: order exceeds sequence length (no Hankel column)");
  const auto m = inputs.rows();
  const auto cols = t - order + 1;
  Matrix h(m * order, cols);
  for (int d = 0; d < order; ++d) h.middleRows(d * m, m) = inputs.middleCols(d, cols);
  return h;
}

bool check_persistent_excitation(const Matrix& inputs, int order, double rel_tol) {
  const Matrix h = block_hankel(inputs, order);
  return numerical_rank(h, rel_tol).rank == h.rows();
}

namespace {

const std::pair<const char*, std::optional<Matrix> SnapshotMatrices::*> kOptionalBlocks[] = {
    {"V0", &SnapshotMatrices::V0},
    {"V1", &SnapshotMatrices::V1},
    {"X0_clean", &SnapshotMatrices::X0_clean},
    {"X1_clean", &SnapshotMatrices::X1_clean},
};

}  // namespace

std::string snapshots_to_json(const SnapshotMatrices& snap, bool with_oracle) {
  snap.validate();
  io::json j{{"U0", io::matrix_to_json(snap.U0)},
             {"X0", io::matrix_to_json(snap.X0)},
             {"X1", io::matrix_to_json(snap.X1)}};
  if (with_oracle) {
    for (const auto& [name, member] : kOptionalBlocks) {
      if (snap.*member) j[name] = io::matrix_to_json(*(snap.*member));
    }
  }
  return j.dump(2);
}

SnapshotMatrices snapshots_from_json(const std::string& text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    throw FormatError(std::string("snapshot JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("snapshot JSON: expected an object");
  SnapshotMatrices s;
  for (const char* key : {"U0", "X0", "X1"}) {
    if (!j.contains(key)) throw FormatError(std::string("snapshot JSON: missing block ") + key);
  }
  s.U0 = io::matrix_from_json(j["U0"], "U0");
  s.X0 = io::matrix_from_json(j["X0"], "X0");
  s.X1 = io::matrix_from_json(j["X1"], "X1");
  for (const auto& [name, member] : kOptionalBlocks) {
    if (j.contains(name)) s.*member = io::matrix_from_json(j[name], name);
  }
  s.validate();
  return s;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  const auto old = os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j);
    }
    os << '\n';
  }
  os.precision(old);
}

Matrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
      } catch (const std::exception&) {
        throw FormatError("matrix CSV: bad number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw FormatError("matrix CSV: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_snapshot_csv_dir(const std::string& dir, const SnapshotMatrices& snap, bool with_oracle) {
  snap.validate();
  fs::create_directories(dir);
  auto put = [&](const std::string& name, const Matrix& m) {
    std::ofstream out(fs::path(dir) / (name + ".csv"));
    if (!out) throw IoError("cannot write " + (fs::path(dir) / (name + ".csv")).string());
    write_matrix_csv(out, m);
  };
  put("U0", snap.U0);
  put("X0", snap.X0);
  put("X1", snap.X1);
  if (with_oracle) {
    for (const auto& [name, member] : kOptionalBlocks) {
      if (snap.*member) put(name, *(snap.*member));
    }
  }
}

SnapshotMatrices read_snapshot_csv_dir(const std::string& dir) {
  auto get = [&](const std::string& name) -> std::optional<Matrix> {
    const fs::path p = fs::path(dir) / (name + ".csv");
    if (!fs::exists(p)) return std::nullopt;
    std::ifstream in(p);
    return read_matrix_csv(in);
  };
  if (!fs::is_directory(dir)) throw IoError("snapshot directory '" + dir + "' does not exist");
  SnapshotMatrices s;
  for (const char* key : {"U0", "X0", "X1"}) {
    if (!fs::exists(fs::path(dir) / (std::string(key) + ".csv"))) {
      throw FormatError("snapshot directory '" + dir + "' lacks " + key + ".csv");
    }
  }
  s.U0 = *get("U0");
  s.X0 = *get("X0");
  s.X1 = *get("X1");
  for (const auto& [name, member] : kOptionalBlocks) s.*member = get(name);
  s.validate();
  return s;
}

}  // namespace ddmr
