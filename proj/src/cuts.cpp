#include <cmath>

#include "sldp/cuts.hpp"
#include "sldp/stage.hpp"

namespace sldp {

std::string to_string(CutFamily f) {
  switch (f) {
    case CutFamily::ReverseNorm: return "reverse_norm";
    case CutFamily::StrengthenedBenders: return "strengthened_benders";
    case CutFamily::StrengthenedAugBenders: return "strengthened_aug_benders";
  }
  return "unknown";
}

double evaluate(const Cut& cut, const Eigen::VectorXd& x) {
  const Eigen::VectorXd diff = x - cut.center;
  return cut.value + cut.slope.dot(diff) - cut.opening * diff.lpNorm<1>();
}

double evaluate_pool(const CutPool& pool, const Eigen::VectorXd& x) {
  double best = pool.floor;
  for (const Cut& c : pool.cuts) best = std::max(best, evaluate(c, x));
  return best;
}

Cut reverse_norm_cut(const std::vector<std::pair<double, double>>& successor_values,
                     const Eigen::VectorXd& center, double rho) {
  if (!(rho > 0.0)) throw Error("reverse-norm cut needs rho > 0");
  double psum = 0.0, v = 0.0;
  for (const auto& [q, val] : successor_values) {
    psum += q;
    v += q * val;
  }
  if (std::abs(psum - 1.0) > 1e-9)
    throw ProbabilityMismatch("successor probabilities do not sum to 1");
  Cut cut;
  cut.center = center;
  cut.value = v;
  cut.slope = Eigen::VectorXd::Zero(center.size());
  cut.opening = rho;
  cut.family = CutFamily::ReverseNorm;
  return cut;
}

Cut aggregate(const std::vector<std::pair<double, Cut>>& successor_cuts) {
  if (successor_cuts.empty()) throw Error("nothing to aggregate");
  const Cut& first = successor_cuts.front().second;
  Cut out;
  out.center = first.center;
  out.slope = Eigen::VectorXd::Zero(first.center.size());
  out.family = first.family;
  out.stage = first.stage;
  out.node = first.node;
  out.iteration = first.iteration;
  double psum = 0.0;
  for (const auto& [q, c] : successor_cuts) {
    if (c.center.size() != first.center.size() ||
        (c.center - first.center).lpNorm<Eigen::Infinity>() > 1e-12)
      throw CenterMismatch("aggregated cuts must share their center");
    psum += q;
    out.value += q * c.value;
    out.slope += q * c.slope;
    out.opening += q * c.opening;
  }
  if (std::abs(psum - 1.0) > 1e-9)
    throw ProbabilityMismatch("aggregation weights do not sum to 1");
  return out;
}

double rho_schedule(int iteration, const RhoSchedule& cfg) {
  if (!(cfg.rho0 > 0.0)) throw Error("rho schedule needs rho0 > 0");
  if (!(cfg.gamma >= 1.0)) throw Error("rho schedule needs gamma >= 1");
  if (cfg.period <= 0) throw Error("rho schedule needs a positive period");
  const double level = std::floor(static_cast<double>(iteration) / cfg.period);
  return std::min(cfg.rho0 * std::pow(cfg.gamma, level), cfg.rho_max);
}

Eigen::VectorXd copy_row_duals(const StageTemplate& templ, const Scenario& scen,
                               const CutPool& pool, const Eigen::VectorXd& center,
                               const SolverOptions& opts) {
  return solve_stage(templ, scen, center, pool, opts, /*want_duals=*/true).copy_duals;
}

Cut strengthened_benders_cut(const StageTemplate& templ, const Scenario& scen,
                             const CutPool& pool, const Eigen::VectorXd& center,
                             const SolverOptions& opts) {
  Cut cut = strengthened_aug_benders_cut(
      templ, scen, pool, center, copy_row_duals(templ, scen, pool, center, opts), 0.0,
      opts);
  cut.family = CutFamily::StrengthenedBenders;
  return cut;
}

Cut strengthened_aug_benders_cut(const StageTemplate& templ, const Scenario& scen,
                                 const CutPool& pool, const Eigen::VectorXd& center,
                                 const Eigen::VectorXd& lambda, double rho,
                                 const SolverOptions& opts) {
  Cut cut;
  cut.center = center;
  cut.value = lagrangian_stage_value(templ, scen, pool, center, lambda, rho, opts);
  cut.slope = lambda;
  cut.opening = rho;
  cut.family = CutFamily::StrengthenedAugBenders;
  return cut;
}

}  // namespace sldp
