#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "sldp/errors.hpp"
#include "sldp/milp.hpp"

namespace sldp {

struct StageTemplate;
struct Scenario;

enum class CutFamily { ReverseNorm, StrengthenedBenders, StrengthenedAugBenders };

std::string to_string(CutFamily f);

/// Unified Lipschitz cut: x -> value + slope'(x - center) - opening * |x - center|_1.
/// slope = 0 gives a reverse-norm cut, opening = 0 a linear Benders cut.
struct Cut {
  Eigen::VectorXd center;
  double value = 0.0;
  Eigen::VectorXd slope;
  double opening = 0.0;
  // provenance
  CutFamily family = CutFamily::ReverseNorm;
  int stage = 0;
  long node = -1;
  int iteration = 0;
};

double evaluate(const Cut& cut, const Eigen::VectorXd& x);

/// Append-only pool of cuts plus the constant floor M_n; the pool value is
/// max(floor, max over cuts).
struct CutPool {
  std::vector<Cut> cuts;
  double floor = 0.0;
  int stage = 0;
  long node = -1;

  // Assembly cache: indices of cuts that contribute to the pool maximum,
  // valid while cuts.size() == encode_cache_size. Owned by a single run;
  // not synchronized.
  mutable std::vector<int> encode_cache;
  mutable size_t encode_cache_size = static_cast<size_t>(-1);
};

double evaluate_pool(const CutPool& pool, const Eigen::VectorXd& x);

/// Reverse-norm cut at `center` from probability-weighted successor values.
Cut reverse_norm_cut(const std::vector<std::pair<double, double>>& successor_values,
                     const Eigen::VectorXd& center, double rho);

/// Probability-weighted aggregation of same-center cuts into one cut for the
/// expected cost-to-go.
Cut aggregate(const std::vector<std::pair<double, Cut>>& successor_cuts);

struct RhoSchedule {
  double rho0 = 1.0;
  double gamma = 1.0;
  int period = 10;
  double rho_max = kInf;
};

/// rho_k = min(rho0 * gamma^floor(k / period), rho_max), k counted from 0.
double rho_schedule(int iteration, const RhoSchedule& cfg);

/// Copy-row duals of the stage problem at `center`: MILP solve, integer
/// variables fixed at their optimal values, then the LP duals of the copy rows.
Eigen::VectorXd copy_row_duals(const StageTemplate& templ, const Scenario& scen,
                               const CutPool& pool, const Eigen::VectorXd& center,
                               const SolverOptions& opts = {});

/// Benders cut with LP-relaxation slope and Lagrangian-MILP intercept.
Cut strengthened_benders_cut(const StageTemplate& templ, const Scenario& scen,
                             const CutPool& pool, const Eigen::VectorXd& center,
                             const SolverOptions& opts = {});

/// Augmented variant: intercept from the L1-augmented Lagrangian MILP at the
/// given multiplier and opening.
Cut strengthened_aug_benders_cut(const StageTemplate& templ, const Scenario& scen,
                                 const CutPool& pool, const Eigen::VectorXd& center,
                                 const Eigen::VectorXd& lambda, double rho,
                                 const SolverOptions& opts = {});

}  // namespace sldp
