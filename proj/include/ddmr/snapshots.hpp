#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddmr/linalg.hpp"
#include "ddmr/lti.hpp"

namespace ddmr {

/// Data matrices of one experiment (or the average of several).
///   U0 = [u(0) .. u(T-1)],  X0 = [x(0) .. x(T-1)],  X1 = [x(1) .. x(T)]
/// plus the noise blocks V0, V1 and noiseless X0_clean, X1_clean when the
/// experiment came from a simulation.
struct SnapshotMatrices {
  Matrix U0;
  Matrix X0;
  Matrix X1;
  std::optional<Matrix> V0;
  std::optional<Matrix> V1;
  std::optional<Matrix> X0_clean;
  std::optional<Matrix> X1_clean;

  int length() const { return static_cast<int>(U0.cols()); }
  int states() const { return static_cast<int>(X0.rows()); }
  int inputs() const { return static_cast<int>(U0.rows()); }
  bool has_noise_blocks() const { return V0.has_value() && V1.has_value(); }

  /// Throws DimensionError on inconsistent shapes.
  void validate() const;
};

SnapshotMatrices build_snapshots(const ExperimentRecord& record);

/// Blockwise arithmetic mean. Optional blocks survive only when every member carries them.
/// Throws DomainError on an empty list and DimensionError on mismatched members.
SnapshotMatrices average_snapshots(std::span<const SnapshotMatrices> members);

inline constexpr double kDefaultRankTolerance = 1e-8;

struct RankReport {
  int stacked_rank = 0;
  int required = 0;
  Vector singular_values;
  bool satisfied = false;
};

/// Rank of [U0; X0] against n + m.
RankReport check_rank_condition(const SnapshotMatrices& snap, double rel_tol = kDefaultRankTolerance);

/// Block-Hankel matrix of depth `order` built from the columns of `inputs` (m*order x T-order+1).
Matrix block_hankel(const Matrix& inputs, int order);

/// True iff the depth-`order` block-Hankel matrix of the inputs has full row rank.
bool check_persistent_excitation(const Matrix& inputs, int order, double rel_tol = kDefaultRankTolerance);

/// JSON container {"U0": [[...]], "X0": ..., "X1": ..., optional "V0","V1","X0_clean","X1_clean"}.
std::string snapshots_to_json(const SnapshotMatrices& snap, bool with_oracle);
SnapshotMatrices snapshots_from_json(const std::string& text);

/// One CSV per block (plain numeric rows, no header): <dir>/U0.csv, X0.csv, X1.csv, ...
void write_snapshot_csv_dir(const std::string& dir, const SnapshotMatrices& snap, bool with_oracle);
SnapshotMatrices read_snapshot_csv_dir(const std::string& dir);

void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);

}  // namespace ddmr
