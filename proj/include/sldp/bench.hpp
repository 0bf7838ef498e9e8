#pragma once

#include <vector>

#include "sldp/engine.hpp"

namespace sldp {

/// 1-D control benchmark: minimize discounted expected displacement from zero
/// under x_t = x_{t-1} + c_t + xi_t with c_t in {-1, +1}.
struct ControlProblemSpec {
  int horizon = 8;
  double beta = 0.9;
  double x0 = 2.0;
  std::vector<double> noise = {-2.7, -2.1, -1.5, -0.9, -0.3, 0.3, 0.9, 1.5, 2.1, 2.7};
  double box_lo = -6.0;
  double box_hi = 6.0;
};

/// Rejects asymmetric noise sets. Note: the state box must absorb worst-case
/// drift (|x0| + horizon * (1 + max|xi|)) for every stage problem to stay
/// feasible; the benchmark suite widens the box accordingly.
ProblemData gen_control1d(const ControlProblemSpec& spec);

/// Stage-wise reverse-norm openings from the Lipschitz recursion with unit
/// polyhedral constants; a documentation aid, not a certified bound.
std::vector<double> control_rho_recursion(const ControlProblemSpec& spec);

/// Two-stage investment benchmark with binary recourse; omega ranges over an
/// N x N inclusive grid on [5,15]^2.
struct CaroeSchultzSpec {
  int n_points = 2;  // N in {2, 3, 6}
  bool discrete_first_stage = true;
};

ProblemData gen_caroe_schultz(const CaroeSchultzSpec& spec);

struct OracleTable {
  int stage = 0;  // table of the expected cost-to-go after this stage
  bool exact = true;
  std::vector<std::pair<Eigen::VectorXd, double>> values;
};

/// Exhaustive backward recursion. Exact for two-stage instances and for
/// longer horizons whose interior stages have integer state variables;
/// throws otherwise. The cap counts subproblem solves.
std::vector<OracleTable> exact_expected_ctg(
    const ProblemData& data, const std::vector<std::vector<Eigen::VectorXd>>& samples,
    const SolverOptions& opts = {}, double solve_cap = 1e6);

/// Expected cost-to-go at a single state (same exactness conditions).
double oracle_expected_ctg(const ProblemData& data, int stage, const Eigen::VectorXd& x,
                           const SolverOptions& opts = {}, double solve_cap = 1e6);

/// True optimal value via the same recursion, starting at the root.
double oracle_root_objective(const ProblemData& data, const SolverOptions& opts = {},
                             double solve_cap = 1e6);

/// Grid-interpolation variant for 1-D continuous states (the control
/// problem); approximate wherever interpolation enters, and labeled so.
std::vector<OracleTable> grid_expected_ctg(const ProblemData& data, double spacing,
                                           const SolverOptions& opts = {});

/// Instance plus run configuration for one benchmark experiment; shared by
/// the CLI bench runner and the acceptance suite.
struct BenchRun {
  ProblemData data;
  SldpConfig config;
};

BenchRun caroe_run(int n, bool discrete, CutFamily family);

/// Control benchmark in sampled mode. The default spec's box is widened to
/// absorb worst-case drift so every stage problem stays feasible.
BenchRun control_run(CutFamily family, const ControlProblemSpec* spec = nullptr);

}  // namespace sldp
