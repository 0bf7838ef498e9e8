#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "sldp/milp.hpp"
#include "test_oracles.hpp"

using namespace sldp;
using Eigen::VectorXd;

namespace {

MilpProblem single_var_lp() {
  MilpProblem p;
  p.num_vars = 1;
  p.objective = VectorXd::Constant(1, 1.0);
  p.row_coeffs = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.row_sense = {RowSense::GreaterEqual};
  p.rhs = VectorXd::Constant(1, 2.0);
  p.lower = VectorXd::Constant(1, 0.0);
  p.upper = VectorXd::Constant(1, 10.0);
  p.integrality = {false};
  return p;
}

}  // namespace

TEST_CASE("lp: single variable bound row") {
  const LpSolution s = solve_lp(single_var_lp());
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.duals[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lp: simplex on a triangle") {
  MilpProblem p;
  p.num_vars = 2;
  p.objective = VectorXd(2);
  p.objective << -1.0, -1.0;
  p.row_coeffs = Eigen::MatrixXd(1, 2);
  p.row_coeffs << 1.0, 1.0;
  p.row_sense = {RowSense::LessEqual};
  p.rhs = VectorXd::Constant(1, 1.0);
  p.lower = VectorXd::Zero(2);
  p.upper = VectorXd::Ones(2);
  p.integrality = {false, false};
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("lp: caroe-schultz second-stage relaxation at the origin") {
  // min -16y1-19y2-23y3-28y4 s.t. 2y1+3y2+4y3+5y4 <= 5, 6y1+y2+3y3+2y4 <= 5,
  // y in [0,1]^4. Expected value frozen from the vertex-enumeration oracle:
  // y = (8/13, 1, 0, 2/13) giving -(184/13 + 19) = -431/13.
  MilpProblem p = test_oracles::caroe_second_stage_lp(VectorXd::Zero(2), 5.0, 5.0);
  const double oracle = test_oracles::vertex_enumeration_min(p);
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(oracle == doctest::Approx(-431.0 / 13.0).epsilon(1e-9));
  CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("lp: infeasible and unbounded detection") {
  MilpProblem p;
  p.num_vars = 1;
  p.objective = VectorXd::Constant(1, 1.0);
  p.row_coeffs = Eigen::MatrixXd(2, 1);
  p.row_coeffs << 1.0, 1.0;
  p.row_sense = {RowSense::GreaterEqual, RowSense::LessEqual};
  p.rhs = VectorXd(2);
  p.rhs << 1.0, 0.0;
  p.lower = VectorXd::Constant(1, -kInf);
  p.upper = VectorXd::Constant(1, kInf);
  p.integrality = {false};
  CHECK(solve_lp(p).status == SolveStatus::Infeasible);

  MilpProblem q;
  q.num_vars = 1;
  q.objective = VectorXd::Constant(1, -1.0);
  q.row_coeffs = Eigen::MatrixXd(0, 1);
  q.row_sense = {};
  q.rhs = VectorXd(0);
  q.lower = VectorXd::Constant(1, 0.0);
  q.upper = VectorXd::Constant(1, kInf);
  q.integrality = {false};
  CHECK(solve_lp(q).status == SolveStatus::Unbounded);
}

TEST_CASE("lp: malformed problems are rejected") {
  MilpProblem p = single_var_lp();
  p.lower[0] = 11.0;  // crosses the upper bound
  CHECK_THROWS_AS(solve_lp(p), MalformedProblem);
  MilpProblem q = single_var_lp();
  q.objective = VectorXd::Zero(2);
  CHECK_THROWS_AS(solve_lp(q), MalformedProblem);
}

TEST_CASE("lp: dual certificate on random instances") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 60; ++rep) {
    const MilpProblem p = test_oracles::random_milp(rng, /*force_continuous=*/true);
    const LpSolution s = solve_lp(p);
    if (s.status != SolveStatus::Optimal) continue;
    const double gap = test_oracles::duality_gap(p, s);
    CHECK(gap <= 1e-7 * (1.0 + std::abs(s.objective)));
  }
}

TEST_CASE("lp: determinism") {
  std::mt19937_64 rng(11);
  const MilpProblem p = test_oracles::random_milp(rng, true);
  const LpSolution a = solve_lp(p);
  const LpSolution b = solve_lp(p);
  REQUIRE(a.status == b.status);
  if (a.status == SolveStatus::Optimal) {
    CHECK(a.primal == b.primal);  // bitwise
    CHECK(a.objective == b.objective);
  }
}

TEST_CASE("milp: knapsack example") {
  MilpProblem p = test_oracles::caroe_second_stage_lp(VectorXd::Zero(2), 5.0, 5.0);
  for (int j = 0; j < 4; ++j) p.integrality[j] = true;
  const MilpSolution s = solve_milp(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-28.0).epsilon(1e-9));
  CHECK(s.primal[3] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.objective >= s.best_bound - 1e-7);

  const MilpSolution e = enumerate_milp(p);
  REQUIRE(e.status == SolveStatus::Optimal);
  CHECK(e.objective == doctest::Approx(-28.0).epsilon(1e-9));
}

TEST_CASE("milp: zero rhs leaves only the zero vector") {
  MilpProblem p = test_oracles::caroe_second_stage_lp(VectorXd::Zero(2), 0.0, 0.0);
  for (int j = 0; j < 4; ++j) p.integrality[j] = true;
  const MilpSolution s = solve_milp(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.objective == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("milp: oracle equivalence on random instances") {
  std::mt19937_64 rng(2024);
  int optimal_seen = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const MilpProblem p = test_oracles::random_milp(rng, false);
    const MilpSolution a = solve_milp(p);
    const MilpSolution b = enumerate_milp(p);
    REQUIRE(a.status == b.status);
    if (a.status == SolveStatus::Optimal) {
      ++optimal_seen;
      CHECK(std::abs(a.objective - b.objective) <= 1e-6);
      for (int j = 0; j < p.num_vars; ++j)
        if (p.integrality[j])
          CHECK(std::abs(a.primal[j] - std::round(a.primal[j])) <= 1e-6);
    }
  }
  CHECK(optimal_seen > 100);  // the generator mixes in some infeasible cases
}

TEST_CASE("milp: determinism") {
  std::mt19937_64 rng(5);
  const MilpProblem p = test_oracles::random_milp(rng, false);
  const MilpSolution a = solve_milp(p);
  const MilpSolution b = solve_milp(p);
  REQUIRE(a.status == b.status);
  if (a.status == SolveStatus::Optimal) CHECK(a.primal == b.primal);
}

TEST_CASE("milp: node cap") {
  MilpProblem p = test_oracles::caroe_second_stage_lp(VectorXd::Zero(2), 5.0, 5.0);
  for (int j = 0; j < 4; ++j) p.integrality[j] = true;
  SolverOptions opts;
  opts.node_cap = 1;
  CHECK_THROWS_AS(solve_milp(p, opts), NodeLimitExceeded);
}

TEST_CASE("milp: integer variables need finite bounds") {
  MilpProblem p = single_var_lp();
  p.integrality = {true};
  p.upper[0] = kInf;
  CHECK_THROWS_AS(solve_milp(p), MalformedProblem);
}

TEST_CASE("enumerate: infeasible box") {
  MilpProblem p;
  p.num_vars = 1;
  p.objective = VectorXd::Constant(1, 1.0);
  p.row_coeffs = Eigen::MatrixXd(2, 1);
  p.row_coeffs << 1.0, 1.0;
  p.row_sense = {RowSense::GreaterEqual, RowSense::LessEqual};
  p.rhs = VectorXd(2);
  p.rhs << 1.0, 0.0;
  p.lower = VectorXd::Constant(1, 0.0);
  p.upper = VectorXd::Constant(1, 1.0);
  p.integrality = {true};
  CHECK(enumerate_milp(p).status == SolveStatus::Infeasible);
}

TEST_CASE("enumerate: pure LP degenerates to solve_lp") {
  std::mt19937_64 rng(21);
  const MilpProblem p = test_oracles::random_milp(rng, true);
  const MilpSolution e = enumerate_milp(p);
  const LpSolution s = solve_lp(p);
  REQUIRE(e.status == s.status);
  if (s.status == SolveStatus::Optimal)
    CHECK(e.objective == doctest::Approx(s.objective).epsilon(1e-9));
}

TEST_CASE("enumerate: cap") {
  MilpProblem p;
  p.num_vars = 4;
  p.objective = VectorXd::Zero(4);
  p.row_coeffs = Eigen::MatrixXd(0, 4);
  p.row_sense = {};
  p.rhs = VectorXd(0);
  p.lower = VectorXd::Constant(4, 0.0);
  p.upper = VectorXd::Constant(4, 100.0);
  p.integrality = {true, true, true, true};
  SolverOptions opts;
  opts.enum_cap = 1e4;
  CHECK_THROWS_AS(enumerate_milp(p, opts), EnumerationCapExceeded);
}
