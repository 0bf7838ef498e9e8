#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "sldp/errors.hpp"

namespace sldp {

/// One realization of the stage randomness: sparse deltas applied to the
/// stage template's rhs and objective.
struct Scenario {
  double prob = 1.0;
  std::vector<std::pair<int, double>> rhs_delta;  // (row, delta)
  std::vector<std::pair<int, double>> obj_delta;  // (var, delta)
};

/// Per-stage scenario lists for a stagewise-independent process; stage 1 must
/// hold exactly one scenario.
using StagewiseScenarios = std::vector<std::vector<Scenario>>;

struct TreeNode {
  int ancestor = -1;  // -1 for the root
  int stage = 1;
  std::vector<int> successors;
  double prob = 1.0;  // transition probability from the ancestor
  int payload = 0;    // scenario index within the node's stage
};

struct ScenarioTree {
  std::vector<TreeNode> nodes;
  int horizon = 0;
  bool stagewise_independent = false;

  int root() const { return 0; }
  int num_nodes() const { return static_cast<int>(nodes.size()); }
};

/// Structural and probabilistic consistency checks; throws on violation.
void validate_tree(const ScenarioTree& tree);

/// Full product tree over per-stage scenario lists. Refuses to materialize
/// more than `node_cap` nodes.
ScenarioTree build_stagewise_tree(const StagewiseScenarios& scenarios,
                                  long node_cap = 100000);

/// Number of nodes build_stagewise_tree would create.
double stagewise_node_count(const StagewiseScenarios& scenarios);

/// Uniform draw in [0,1) that is stable across platforms.
double canonical_uniform(std::mt19937_64& rng);

/// Root-to-leaf node path drawn by the transition probabilities.
std::vector<int> sample_path(const ScenarioTree& tree, std::mt19937_64& rng);

/// Scenario-index path (one entry per stage) through the implicit
/// stagewise-independent tree; stage 1 is always scenario 0.
std::vector<int> sample_path_lazy(const StagewiseScenarios& scenarios,
                                  std::mt19937_64& rng);

/// Payloads along a lazy path plus the successor payload list at each step.
struct LazyPathView {
  std::vector<int> payloads;                        // one per stage
  std::vector<std::vector<int>> successor_payloads; // per stage; empty at leaf
  std::vector<std::vector<double>> successor_probs;
};
LazyPathView lazy_node_view(const StagewiseScenarios& scenarios,
                            const std::vector<int>& path);

}  // namespace sldp
