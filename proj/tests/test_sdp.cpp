#include <doctest.h>

#include "ddmr/errors.hpp"
#include "ddmr/sdp.hpp"
#include "ddmr/synthesis.hpp"
#include "support.hpp"

using namespace ddmr;
using namespace ddmr::sdp;

namespace {

void check_optimal_invariants(const ConicSolution& sol, const SolverOptions& opts = {}) {
  REQUIRE(sol.status == SolveStatus::optimal);
  CHECK(sol.max_equality_residual <= opts.feas_tol);
  CHECK(sol.min_psd_eigenvalue >= -opts.feas_tol);
  if (sol.has_dual_certificate) {
    CHECK(std::abs(sol.duality_gap) <= opts.opt_tol * (1.0 + std::abs(sol.objective_value)) * 10);
  }
}

}  // namespace

TEST_CASE("trace minimization over P >= I") {
  ConicProblem prob;
  const AffineExpr p = prob.add_variable("P", 2, 2, VariableKind::symmetric);
  prob.add_psd(p, 1.0, "P>=I");
  prob.add_objective(p.trace());
  const ConicSolution sol = solve(prob);
  check_optimal_invariants(sol);
  CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK((sol.values.at("P") - Matrix::Identity(2, 2)).norm() < 1e-6);
}

TEST_CASE("epigraph at the boundary of the cone") {
  ConicProblem prob;
  const AffineExpr t = prob.add_variable("t", 1, 1);
  const AffineExpr s = prob.add_variable("s", 1, 1);
  prob.add_psd(t);
  prob.add_psd(s);
  prob.add_equality(t - Matrix::Ones(1, 1) - s);
  prob.add_objective(t);
  const auto sol = solve(prob);
  check_optimal_invariants(sol);
  CHECK(sol.values.at("t")(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("inconsistent equalities are infeasible") {
  ConicProblem prob;
  const AffineExpr x = prob.add_variable("x", 1, 1);
  prob.add_equality(x - Matrix::Constant(1, 1, 1.0));
  prob.add_equality(x - Matrix::Constant(1, 1, 2.0));
  prob.add_objective(x);
  CHECK(solve(prob).status == SolveStatus::infeasible);
}

TEST_CASE("infeasible cones and unbounded objectives") {
  {
    ConicProblem prob;
    const AffineExpr x = prob.add_variable("x", 1, 1);
    prob.add_psd(x, 0.0);
    prob.add_psd(-x - Matrix::Ones(1, 1), 0.0);
    prob.add_objective(x);
    CHECK(solve(prob).status == SolveStatus::infeasible);
  }
  {
    ConicProblem prob;
    const AffineExpr x = prob.add_variable("x", 1, 1);
    prob.add_psd(x);
    prob.add_objective(-1.0 * x);
    CHECK(solve(prob).status == SolveStatus::unbounded);
  }
  {
    ConicProblem prob;
    const AffineExpr x = prob.add_variable("x", 1, 1);
    prob.add_objective(x);
    CHECK(solve(prob).status == SolveStatus::unbounded);
  }
}

TEST_CASE("norm epigraphs") {
  const Matrix target = (Matrix(1, 2) << 3, 4).finished();
  for (NormKind kind : {NormKind::l1, NormKind::frobenius}) {
    ConicProblem prob;
    const AffineExpr x = prob.add_variable("x", 1, 2);
    prob.add_equality(x * (Matrix(2, 1) << 1, 0).finished());
    prob.add_norm_objective(x - target, 1.0, kind, "fit");
    const auto sol = solve(prob);
    check_optimal_invariants(sol);
    CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(sol.values.at("x")(0, 1) == doctest::Approx(4.0).epsilon(1e-6));
  }
  ConicProblem prob;
  const AffineExpr x = prob.add_variable("x", 2, 1);
  prob.add_norm_objective(x - (Matrix(2, 1) << 1, -2).finished(), 2.0, NormKind::l1, "l1");
  prob.add_nonnegative(-1.0 * x);
  const auto sol = solve(prob);
  check_optimal_invariants(sol);
  CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("free directions resolve to the minimum-norm point") {
  ConicProblem prob;
  const AffineExpr x = prob.add_variable("x", 2, 1);
  prob.add_equality((Matrix(1, 2) << 1, 1).finished() * x - Matrix::Constant(1, 1, 2.0));
  prob.add_objective(AffineExpr::constant(Matrix::Zero(1, 1), x.width()));
  const auto sol = solve(prob);
  check_optimal_invariants(sol);
  CHECK(sol.values.at("x")(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.values.at("x")(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("malformed problems are rejected before solving") {
  ConicProblem prob;
  const AffineExpr x = prob.add_variable("x", 2, 2);
  CHECK_THROWS_AS(prob.add_psd(x), DomainError);
  CHECK_THROWS_AS(prob.add_psd(prob.add_variable("y", 2, 3)), DimensionError);
  CHECK_THROWS_AS(prob.add_variable("x", 1, 1), DomainError);
  CHECK_THROWS_AS(prob.add_objective(x), DimensionError);
  CHECK_THROWS(prob.variable("missing"));
  const AffineExpr s = prob.add_variable("S", 2, 2, VariableKind::symmetric);
  CHECK_THROWS_AS(prob.add_psd(s, -1.0), DomainError);
}

TEST_CASE("affine expression algebra") {
  ConicProblem prob;
  const AffineExpr x = prob.add_variable("X", 2, 3);
  const AffineExpr s = prob.add_variable("S", 2, 2, VariableKind::symmetric);
  Vector v = Vector::LinSpaced(prob.scalar_count(), 1.0, static_cast<double>(prob.scalar_count()));
  const auto vals = prob.unpack(v);
  const Matrix X = vals.at("X"), S = vals.at("S");
  CHECK(S == S.transpose());
  const Matrix L = ddmr::testing::random_matrix(4, 2, 1), R = ddmr::testing::random_matrix(3, 2, 2);
  CHECK((L * x * R).evaluate(v).isApprox(L * X * R));
  CHECK(x.transpose().evaluate(v) == X.transpose());
  CHECK((s - 2.0 * s).evaluate(v).isApprox(-S));
  CHECK(s.trace().evaluate(v)(0, 0) == doctest::Approx(S.trace()));
  CHECK(x.sum().evaluate(v)(0, 0) == doctest::Approx(X.sum()));
  const AffineExpr blk = AffineExpr::block({{s, x}, {x.transpose(), AffineExpr::constant(Matrix::Identity(3, 3))}});
  Matrix expected(5, 5);
  expected << S, X, X.transpose(), Matrix::Identity(3, 3);
  CHECK(blk.evaluate(v).isApprox(expected));
  CHECK(blk.asymmetry() == 0.0);
}

TEST_CASE("SDPA export: minimal file") {
  ConicProblem prob;
  const AffineExpr x = prob.add_variable("x", 1, 1);
  prob.add_psd(x);
  const std::string text = export_problem(prob);
  CHECK(text.find("= mDIM") != std::string::npos);
  const auto back = read_sdpa(text);
  CHECK(back.c.size() == 1);
  CHECK(back.block_struct == std::vector<int>{1});
}

TEST_CASE("SDPA export of the Lyapunov-constrained matching program") {
  const auto cfg = ddmr::testing::stable_scenario();
  const auto snap = build_snapshots(run_experiment(cfg, 0, 0.0, 0));
  SynthesisOptions opts;
  const auto prob = build_sdp_problem(snap, ReferenceModel(cfg.A_M, cfg.B_M), opts);
  const auto sdpa = to_sdpa(prob);
  CHECK(std::find(sdpa.block_struct.begin(), sdpa.block_struct.end(), 6) != sdpa.block_struct.end());
  CHECK(std::any_of(sdpa.block_struct.begin(), sdpa.block_struct.end(), [](int b) { return b < 0; }));
  const auto back = read_sdpa(write_sdpa(sdpa, "matching"));
  CHECK(back.block_struct == sdpa.block_struct);
  REQUIRE(back.F.size() == sdpa.F.size());
  CHECK(back.c.isApprox(sdpa.c));
  for (std::size_t i = 0; i < sdpa.F.size(); ++i) {
    for (std::size_t b = 0; b < sdpa.F[i].size(); ++b) CHECK(back.F[i][b].isApprox(sdpa.F[i][b]));
  }
  CHECK_THROWS_AS(read_sdpa("garbage"), FormatError);
}

TEST_CASE("standard form agrees with the problem: SDPA slack at the solution is PSD") {
  ConicProblem prob;
  const AffineExpr p = prob.add_variable("P", 2, 2, VariableKind::symmetric);
  const AffineExpr y = prob.add_variable("y", 1, 1);
  prob.add_psd(p, 1.0);
  prob.add_nonnegative(y - Matrix::Ones(1, 1));
  prob.add_equality(p.trace() - y - Matrix::Constant(1, 1, 2.0));
  prob.add_objective(p.trace());
  prob.add_objective(y, 3.0);
  const auto sol = solve(prob);
  check_optimal_invariants(sol);
  CHECK(sol.objective_value == doctest::Approx(6.0).epsilon(1e-6));
  const auto s = to_sdpa(prob);
  CHECK(s.c.dot(sol.x) == doctest::Approx(sol.objective_value - prob.objective_offset()).epsilon(1e-6));
  for (std::size_t b = 0; b < s.block_struct.size(); ++b) {
    Matrix slack = -s.F[0][b];
    for (Eigen::Index i = 0; i < sol.x.size(); ++i) slack += sol.x(i) * s.F[static_cast<std::size_t>(i) + 1][b];
    CHECK(min_sym_eigenvalue(slack) > -1e-7);
  }
}

TEST_CASE("independent residual recheck matches the reported values") {
  ConicProblem prob;
  const AffineExpr p = prob.add_variable("P", 3, 3, VariableKind::symmetric);
  const Matrix c = ddmr::testing::random_spd(3, 9);
  prob.add_psd(p - c);
  prob.add_objective(p.trace());
  const auto sol = solve(prob);
  check_optimal_invariants(sol);
  CHECK(sol.objective_value == doctest::Approx(c.trace()).epsilon(1e-6));
  double eq = 0, cone = 0;
  evaluate_residuals(prob, sol.x, eq, cone);
  CHECK(eq == doctest::Approx(sol.max_equality_residual));
  CHECK(cone == doctest::Approx(sol.min_psd_eigenvalue));
}
