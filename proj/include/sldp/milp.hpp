#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "sldp/errors.hpp"

namespace sldp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };

enum class SolveStatus { Optimal, Infeasible, Unbounded };

/// A bounded mixed-integer linear program in dense row form (minimization).
/// Every integer variable must carry finite bounds.
struct MilpProblem {
  int num_vars = 0;
  Eigen::VectorXd objective;           // size num_vars
  Eigen::MatrixXd row_coeffs;          // rows x num_vars
  std::vector<RowSense> row_sense;     // size rows
  Eigen::VectorXd rhs;                 // size rows
  Eigen::VectorXd lower;               // size num_vars, -inf allowed
  Eigen::VectorXd upper;               // size num_vars, +inf allowed
  std::vector<bool> integrality;       // size num_vars

  int num_rows() const { return static_cast<int>(row_coeffs.rows()); }
};

struct LpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  Eigen::VectorXd primal;
  double objective = 0.0;
  Eigen::VectorXd duals;  // one per row; dObjective/dRhs convention
};

struct MilpSolution {
  SolveStatus status = SolveStatus::Infeasible;
  Eigen::VectorXd primal;
  double objective = 0.0;
  double best_bound = 0.0;
  long node_count = 0;
};

struct SolverOptions {
  double feas_tol = 1e-7;
  double int_tol = 1e-6;
  long node_cap = 2'000'000;       // branch-and-bound nodes
  double enum_cap = 1e6;           // integer lattice size for enumerate_milp
};

/// Throws MalformedProblem unless dimensions and bounds are consistent.
/// `require_integer_bounds` additionally demands finite bounds on every
/// integer variable (needed by the MILP paths).
void validate_problem(const MilpProblem& p, bool require_integer_bounds = false);

/// Bounded-variable primal simplex; integrality flags are ignored.
/// Deterministic: Dantzig pricing with a Bland's-rule fallback once a
/// degeneracy counter exceeds 2 * num_vars.
LpSolution solve_lp(const MilpProblem& p, const SolverOptions& opts = {});

/// Like solve_lp but with the variable bounds replaced; used by the
/// branch-and-bound driver so nodes do not copy the whole problem.
LpSolution solve_lp_with_bounds(const MilpProblem& p, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper,
                                const SolverOptions& opts = {});

/// Best-first branch-and-bound, most-fractional branching, ties broken by
/// lowest variable index. Globally optimal within feas_tol.
MilpSolution solve_milp(const MilpProblem& p, const SolverOptions& opts = {});

/// Exhaustive enumeration over the integer lattice (LP solve per assignment
/// when continuous variables remain). Exact; intended for tests and the
/// benchmark oracle.
MilpSolution enumerate_milp(const MilpProblem& p, const SolverOptions& opts = {});

}  // namespace sldp
