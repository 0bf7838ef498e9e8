#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sldp/cuts.hpp"
#include "sldp/milp.hpp"
#include "sldp/scenario_tree.hpp"

namespace sldp {

/// Per-stage MILP skeleton. Copy rows "z = incoming" are appended at assembly
/// time and are the only coupling to the ancestor; scenario deltas only touch
/// template rows. state_vars (outgoing) and copy_vars (incoming) may have
/// different dimensions; a terminal stage may have no outgoing state at all.
struct StageTemplate {
  MilpProblem base;
  std::vector<int> state_vars;
  std::vector<int> copy_vars;
  Eigen::VectorXd state_lo, state_hi;  // box of the outgoing state
  double lipschitz = 0.0;              // Lipschitz constant of the immediate cost
  std::string name;
};

void validate_template(const StageTemplate& t);

/// Stage MILP with scenario deltas applied, copy rows fixing z = incoming,
/// one epigraph variable bounded below by the pool floor, and per-cut rows:
/// plain epigraph rows for opening = 0, the big-M absolute-value gadget
/// (two continuous + one binary per state dimension) otherwise.
struct AssembledStage {
  MilpProblem milp;
  int alpha_col = -1;
  int copy_row_begin = -1;
  int num_copy = 0;
  struct EncodedCut {
    int pool_index;
    int epi_row;
    int u_col0 = -1;  // d pairs (u+, u-) and d binaries follow when gadget
    int z_col0 = -1;
    bool gadget = false;
  };
  std::vector<EncodedCut> encoded;
  const StageTemplate* templ = nullptr;
};

AssembledStage assemble_stage(const StageTemplate& templ, const Scenario& scen,
                              const Eigen::VectorXd& incoming, const CutPool& pool);

struct StageSolution {
  Eigen::VectorXd primal;      // over template variables plus assembly extras
  Eigen::VectorXd state;       // outgoing state values
  double objective = 0.0;      // immediate cost + epigraph value
  double alpha = 0.0;          // epigraph value at the optimum
  Eigen::VectorXd copy_duals;  // filled when requested
  long bnb_nodes = 0;
};

/// Solves the assembled stage MILP; throws StageInfeasible on infeasibility
/// (recourse violation). When `want_duals`, re-solves the LP with integers
/// fixed at their optimal values and extracts the copy-row duals.
StageSolution solve_stage(const StageTemplate& templ, const Scenario& scen,
                          const Eigen::VectorXd& incoming, const CutPool& pool,
                          const SolverOptions& opts = {}, bool want_duals = false);

/// Value of the L1-augmented Lagrangian MILP
///   min f + pool + lambda'(center - z) + rho * |z - center|_1
/// with the copy rows dropped and z ranging over its template bounds.
double lagrangian_stage_value(const StageTemplate& templ, const Scenario& scen,
                              const CutPool& pool, const Eigen::VectorXd& center,
                              const Eigen::VectorXd& lambda, double rho,
                              const SolverOptions& opts = {});

}  // namespace sldp
