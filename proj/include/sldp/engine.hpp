#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sldp/cuts.hpp"
#include "sldp/scenario_tree.hpp"
#include "sldp/stage.hpp"

namespace sldp {

enum class Mode { FullTree, Sampled };
enum class PoolScope { Auto, PerNode, PerStage };

/// A multistage instance: one template and one scenario list per stage, plus
/// the root's incoming state.
struct ProblemData {
  std::vector<StageTemplate> templates;
  StagewiseScenarios scenarios;
  Eigen::VectorXd initial_state;
  std::string name;

  int horizon() const { return static_cast<int>(templates.size()); }
};

void validate_problem_data(const ProblemData& data);

struct SldpConfig {
  Mode mode = Mode::FullTree;
  CutFamily family = CutFamily::StrengthenedAugBenders;
  std::vector<double> rho;        // reverse-norm opening per stage (broadcasts)
  RhoSchedule schedule;           // augmented-Benders opening per iteration
  double delta = 0.0;             // sampled-mode stabilization radius
  std::vector<double> floor;      // pool floor M_n per stage (broadcasts)
  int max_iterations = 100;
  double stop_tol = 0.0;          // 0 disables the stall rule
  int stop_window = 5;
  std::uint64_t seed = 0;
  int sim_samples = 0;
  PoolScope pool_scope = PoolScope::Auto;
  SolverOptions solver;
  long tree_node_cap = 100000;
};

struct IterationRecord {
  int iteration = 0;
  double lower_bound = 0.0;
  long cuts_added = 0;
  long stage_solves = 0;
  double wall_ms = 0.0;
  std::vector<std::pair<long, Eigen::VectorXd>> forward_states;  // (node|stage, x)
};

struct PolicyStats {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

struct RunResult {
  std::vector<IterationRecord> iterations;
  std::vector<CutPool> pools;  // per node or per stage, by scope
  PoolScope scope = PoolScope::PerNode;
  PolicyStats policy;
  std::string termination;
  std::vector<std::string> warnings;
  long total_stage_solves = 0;
  double total_wall_ms = 0.0;

  double final_lower_bound() const {
    return iterations.empty() ? -kInf : iterations.back().lower_bound;
  }
};

/// Full scenario pass: forward over every node stage by stage, backward from
/// stage T-1 to 1 adding one aggregated cut per node per iteration.
RunResult run_full(const ScenarioTree& tree, const ProblemData& data,
                   const SldpConfig& cfg);

/// Sampled pass over a materialized tree: one path per iteration,
/// delta-stabilized forward states, cuts only along the path.
RunResult run_sampled(const ScenarioTree& tree, const ProblemData& data,
                      const SldpConfig& cfg);

/// Sampled pass over the implicit stagewise-independent tree; cut pools and
/// state histories attach to stages.
RunResult run_sampled_lazy(const ProblemData& data, const SldpConfig& cfg);

/// Snaps `candidate` to the nearest history point when closer than delta in
/// L1 (ties to the lowest index); otherwise appends and returns the candidate.
Eigen::VectorXd stabilize_state(const Eigen::VectorXd& candidate,
                                std::vector<Eigen::VectorXd>& history, double delta);

/// Monte-Carlo policy evaluation with the given pools; pass the tree for
/// per-node pools, nullptr for per-stage pools.
PolicyStats simulate_policy(const ProblemData& data, const std::vector<CutPool>& pools,
                            PoolScope scope, const ScenarioTree* tree, int n_samples,
                            std::uint64_t seed, const SolverOptions& opts = {});

struct ReverseCutResult {
  Eigen::VectorXd x;
  std::vector<double> nu;  // nondecreasing optimal-value approximations
  double final_gap = kInf;
  CutPool pool;
  int iterations = 0;
};

/// Deterministic reverse cut method: minimizes f(x) + g(x) over the MILP
/// feasible set of `f_and_set` where g is only available through the oracle.
ReverseCutResult reverse_cut_minimize(
    const MilpProblem& f_and_set, const std::vector<int>& state_vars,
    const std::function<double(const Eigen::VectorXd&)>& g_oracle, double rho,
    double eps, double floor_value, int max_iterations = 10000,
    const SolverOptions& opts = {});

}  // namespace sldp
