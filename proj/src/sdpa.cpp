#include <cmath>
#include <iomanip>
#include <sstream>

#include "ddmr/errors.hpp"
#include "ddmr/sdp.hpp"

namespace ddmr::sdp {

SdpaProblem to_sdpa(const ConicProblem& problem) {
  const int p = problem.scalar_count();
  SdpaProblem out;
  out.c = problem.objective();
  out.F.assign(static_cast<std::size_t>(p) + 1, {});

  auto add_dense = [&](const AffineExpr& ex_in, double margin) {
    const AffineExpr ex = ex_in.padded(p);
    const int n = ex.rows();
    out.block_struct.push_back(n);
    Matrix f0 = -Eigen::Map<const Matrix>(ex.constant_vec().data(), n, n);
    f0.diagonal().array() += margin;
    out.F[0].push_back(f0);
    for (int i = 0; i < p; ++i) {
      out.F[static_cast<std::size_t>(i) + 1].push_back(Eigen::Map<const Matrix>(ex.coefficients().col(i).data(), n, n));
    }
  };
  // rows: each scalar row r gives a_r' x + c_r >= 0
  auto add_diagonal = [&](const Matrix& coeffs, const Vector& cst) {
    const int n = static_cast<int>(cst.size());
    out.block_struct.push_back(-n);
    out.F[0].push_back(Matrix((-cst).asDiagonal()));
    for (int i = 0; i < p; ++i) out.F[static_cast<std::size_t>(i) + 1].push_back(Matrix(coeffs.col(i).asDiagonal()));
  };

  for (const auto& con : problem.psd_constraints()) add_dense(con.expr, con.margin);
  {
    int len = 0;
    for (const auto& con : problem.nonnegatives()) len += con.expr.rows() * con.expr.cols();
    if (len > 0) {
      Matrix coeffs(len, p);
      Vector cst(len);
      int r = 0;
      for (const auto& con : problem.nonnegatives()) {
        const AffineExpr ex = con.expr.padded(p);
        const int l = ex.rows() * ex.cols();
        coeffs.middleRows(r, l) = ex.coefficients();
        cst.segment(r, l) = ex.constant_vec();
        r += l;
      }
      add_diagonal(coeffs, cst);
    }
  }
  {
    int len = 0;
    for (const auto& con : problem.equalities()) len += con.expr.rows() * con.expr.cols();
    if (len > 0) {
      Matrix coeffs(2 * len, p);
      Vector cst(2 * len);
      int r = 0;
      for (const auto& con : problem.equalities()) {
        const AffineExpr ex = con.expr.padded(p);
        const int l = ex.rows() * ex.cols();
        coeffs.middleRows(r, l) = ex.coefficients();
        cst.segment(r, l) = ex.constant_vec();
        coeffs.middleRows(len + r, l) = -ex.coefficients();
        cst.segment(len + r, l) = -ex.constant_vec();
        r += l;
      }
      add_diagonal(coeffs, cst);
    }
  }
  return out;
}

std::string write_sdpa(const SdpaProblem& p, const std::string& comment) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "\"" << (comment.empty() ? "exported conic problem" : comment) << "\n";
  const std::size_t m = static_cast<std::size_t>(p.c.size());
  os << m << " = mDIM\n";
  os << p.block_struct.size() << " = nBLOCK\n";
  for (std::size_t b = 0; b < p.block_struct.size(); ++b) os << (b ? " " : "") << p.block_struct[b];
  os << " = bLOCKsTRUCT\n";
  for (std::size_t i = 0; i < m; ++i) os << (i ? " " : "") << p.c(static_cast<Eigen::Index>(i));
  os << '\n';
  for (std::size_t mat = 0; mat <= m; ++mat) {
    for (std::size_t b = 0; b < p.block_struct.size(); ++b) {
      const Matrix& f = p.F[mat][b];
      const bool diag = p.block_struct[b] < 0;
      for (Eigen::Index i = 0; i < f.rows(); ++i) {
        for (Eigen::Index j = i; j < f.cols(); ++j) {
          if (diag && i != j) continue;
          if (f(i, j) == 0.0) continue;
          os << mat << ' ' << (b + 1) << ' ' << (i + 1) << ' ' << (j + 1) << ' ' << f(i, j) << '\n';
        }
      }
    }
  }
  return os.str();
}

namespace {

/// Strip SDPA punctuation: braces, parentheses, commas become blanks; '=' starts a trailing comment.
std::string clean_line(std::string line) {
  const auto eq = line.find('=');
  if (eq != std::string::npos) line.erase(eq);
  for (char& ch : line) {
    if (ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == ',') ch = ' ';
  }
  return line;
}

}  // namespace

SdpaProblem read_sdpa(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && (line[0] == '"' || line[0] == '*')) continue;
    const std::string c = clean_line(line);
    if (c.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(c);
  }
  if (lines.size() < 4) throw FormatError("SDPA: truncated header");
  SdpaProblem p;
  std::size_t m = 0, nblocks = 0;
  {
    std::istringstream s(lines[0]);
    if (!(s >> m)) throw FormatError("SDPA: bad mDIM");
  }
  {
    std::istringstream s(lines[1]);
    if (!(s >> nblocks) || nblocks == 0) throw FormatError("SDPA: bad nBLOCK");
  }
  {
    std::istringstream s(lines[2]);
    for (std::size_t b = 0; b < nblocks; ++b) {
      int v = 0;
      if (!(s >> v) || v == 0) throw FormatError("SDPA: bad block structure");
      p.block_struct.push_back(v);
    }
  }
  std::size_t next = 3;
  {
    // cost vector may wrap over several lines
    std::vector<double> cvals;
    while (cvals.size() < m && next < lines.size()) {
      std::istringstream s(lines[next++]);
      double v;
      while (s >> v) cvals.push_back(v);
    }
    if (cvals.size() != m) throw FormatError("SDPA: cost vector length differs from mDIM");
    p.c = Eigen::Map<const Vector>(cvals.data(), static_cast<Eigen::Index>(m));
  }
  p.F.assign(m + 1, {});
  for (auto& mats : p.F) {
    for (int bs : p.block_struct) {
      const int n = std::abs(bs);
      mats.push_back(Matrix::Zero(n, n));
    }
  }
  for (; next < lines.size(); ++next) {
    std::istringstream s(lines[next]);
    long mat, blk, i, j;
    double v;
    if (!(s >> mat >> blk >> i >> j >> v)) throw FormatError("SDPA: bad entry line '" + lines[next] + "'");
    if (mat < 0 || static_cast<std::size_t>(mat) > m || blk < 1 || static_cast<std::size_t>(blk) > nblocks) {
      throw FormatError("SDPA: entry index out of range");
    }
    const int bs = p.block_struct[static_cast<std::size_t>(blk - 1)];
    const int n = std::abs(bs);
    if (i < 1 || j < 1 || i > n || j > n) throw FormatError("SDPA: entry position out of range");
    if (bs < 0 && i != j) throw FormatError("SDPA: off-diagonal entry in a diagonal block");
    Matrix& f = p.F[static_cast<std::size_t>(mat)][static_cast<std::size_t>(blk - 1)];
    f(i - 1, j - 1) = v;
    f(j - 1, i - 1) = v;
  }
  return p;
}

std::string export_problem(const ConicProblem& problem) {
  std::ostringstream comment;
  comment << "variables:";
  for (const auto& v : problem.variables()) comment << ' ' << v.name << '[' << v.rows << 'x' << v.cols << ']';
  comment << " objective offset " << std::setprecision(17) << problem.objective_offset();
  return write_sdpa(to_sdpa(problem), comment.str());
}

}  // namespace ddmr::sdp
