#include <cmath>
#include <string>

#include "sldp/scenario_tree.hpp"

namespace sldp {

namespace {

void check_stage_probs(const std::vector<Scenario>& stage, int t) {
  double sum = 0.0;
  for (const Scenario& s : stage) {
    if (s.prob <= 0.0)
      throw ProbabilityMismatch("stage " + std::to_string(t) +
                                " has a nonpositive probability");
    sum += s.prob;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ProbabilityMismatch("stage " + std::to_string(t) +
                              " probabilities sum to " + std::to_string(sum));
}

}  // namespace

void validate_tree(const ScenarioTree& tree) {
  if (tree.nodes.empty()) throw Error("empty scenario tree");
  if (tree.nodes[0].ancestor != -1 || tree.nodes[0].stage != 1)
    throw Error("node 0 must be the stage-1 root");
  for (int i = 1; i < tree.num_nodes(); ++i) {
    const TreeNode& nd = tree.nodes[i];
    if (nd.ancestor < 0 || nd.ancestor >= tree.num_nodes())
      throw Error("node " + std::to_string(i) + " has an invalid ancestor");
    if (nd.ancestor >= i) throw Error("ancestors must precede successors");
    if (nd.stage != tree.nodes[nd.ancestor].stage + 1)
      throw Error("node " + std::to_string(i) + " breaks the stage recursion");
  }
  for (int i = 0; i < tree.num_nodes(); ++i) {
    const TreeNode& nd = tree.nodes[i];
    if (nd.stage > tree.horizon) throw Error("node beyond the horizon");
    if (nd.successors.empty()) continue;
    double sum = 0.0;
    for (int m : nd.successors) {
      if (m <= i || m >= tree.num_nodes() || tree.nodes[m].ancestor != i)
        throw Error("successor list of node " + std::to_string(i) + " is inconsistent");
      if (tree.nodes[m].prob <= 0.0)
        throw ProbabilityMismatch("transition probability must be positive");
      sum += tree.nodes[m].prob;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ProbabilityMismatch("transition probabilities of node " + std::to_string(i) +
                                " sum to " + std::to_string(sum));
  }
}

double stagewise_node_count(const StagewiseScenarios& scenarios) {
  double count = 0.0, layer = 1.0;
  for (const auto& stage : scenarios) {
    layer *= static_cast<double>(stage.size());
    count += layer;
  }
  return count;
}

ScenarioTree build_stagewise_tree(const StagewiseScenarios& scenarios, long node_cap) {
  if (scenarios.empty()) throw Error("at least one stage required");
  if (scenarios[0].size() != 1)
    throw ProbabilityMismatch("stage 1 must have exactly one scenario");
  for (size_t t = 0; t < scenarios.size(); ++t) {
    if (scenarios[t].empty()) throw Error("stage with no scenarios");
    check_stage_probs(scenarios[t], static_cast<int>(t) + 1);
  }
  if (stagewise_node_count(scenarios) > static_cast<double>(node_cap))
    throw NodeCapExceeded("materialized tree would exceed the node cap");

  ScenarioTree tree;
  tree.horizon = static_cast<int>(scenarios.size());
  tree.stagewise_independent = true;
  tree.nodes.push_back(TreeNode{-1, 1, {}, 1.0, 0});
  std::vector<int> frontier{0};
  for (int t = 2; t <= tree.horizon; ++t) {
    std::vector<int> next;
    for (int parent : frontier) {
      for (size_t s = 0; s < scenarios[t - 1].size(); ++s) {
        const int id = tree.num_nodes();
        tree.nodes.push_back(
            TreeNode{parent, t, {}, scenarios[t - 1][s].prob, static_cast<int>(s)});
        tree.nodes[parent].successors.push_back(id);
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }
  return tree;
}

double canonical_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace {

int pick_index(const std::vector<double>& probs, double u) {
  double cum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

std::vector<int> sample_path(const ScenarioTree& tree, std::mt19937_64& rng) {
  std::vector<int> path{tree.root()};
  int n = tree.root();
  while (!tree.nodes[n].successors.empty()) {
    const auto& succ = tree.nodes[n].successors;
    std::vector<double> probs(succ.size());
    for (size_t i = 0; i < succ.size(); ++i) probs[i] = tree.nodes[succ[i]].prob;
    n = succ[pick_index(probs, canonical_uniform(rng))];
    path.push_back(n);
  }
  return path;
}

std::vector<int> sample_path_lazy(const StagewiseScenarios& scenarios,
                                  std::mt19937_64& rng) {
  std::vector<int> path{0};
  for (size_t t = 1; t < scenarios.size(); ++t) {
    std::vector<double> probs(scenarios[t].size());
    for (size_t i = 0; i < probs.size(); ++i) probs[i] = scenarios[t][i].prob;
    path.push_back(pick_index(probs, canonical_uniform(rng)));
  }
  return path;
}

LazyPathView lazy_node_view(const StagewiseScenarios& scenarios,
                            const std::vector<int>& path) {
  if (path.size() != scenarios.size()) throw Error("path length != horizon");
  LazyPathView view;
  view.payloads = path;
  view.successor_payloads.resize(path.size());
  view.successor_probs.resize(path.size());
  for (size_t t = 0; t + 1 < scenarios.size(); ++t) {
    for (size_t s = 0; s < scenarios[t + 1].size(); ++s) {
      view.successor_payloads[t].push_back(static_cast<int>(s));
      view.successor_probs[t].push_back(scenarios[t + 1][s].prob);
    }
  }
  return view;
}

}  // namespace sldp
