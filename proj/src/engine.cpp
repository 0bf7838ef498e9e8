#include <chrono>
#include <cmath>

#include "sldp/engine.hpp"

namespace sldp {

namespace {

double per_stage(const std::vector<double>& v, int stage, const char* what) {
  if (v.empty()) throw Error(std::string(what) + " not configured");
  if (v.size() == 1) return v[0];
  if (stage < 1 || stage > static_cast<int>(v.size()))
    throw Error(std::string(what) + " has no entry for stage " + std::to_string(stage));
  return v[stage - 1];
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

// Shared driver for the full-tree and sampled variants. Pools (and, in
// sampled mode, state histories) attach to nodes or to stages; stage scope is
// only sound for stagewise-independent trees.
class Engine {
 public:
  Engine(const ProblemData& data, const SldpConfig& cfg, const ScenarioTree* tree,
         bool lazy)
      : data_(data), cfg_(cfg), tree_(tree), lazy_(lazy), rng_(cfg.seed) {
    validate_problem_data(data);
    horizon_ = data.horizon();
    if (lazy_) {
      scope_ = PoolScope::PerStage;
      if (cfg.pool_scope == PoolScope::PerNode)
        throw Error("per-node pools require a materialized tree");
    } else {
      validate_tree(*tree_);
      if (tree_->horizon != horizon_) throw Error("tree horizon != template count");
      scope_ = cfg.pool_scope == PoolScope::Auto ? PoolScope::PerNode : cfg.pool_scope;
      if (scope_ == PoolScope::PerStage && !tree_->stagewise_independent)
        throw Error("stage-shared pools need a stagewise-independent tree");
    }
    const int pool_count = scope_ == PoolScope::PerStage
                               ? horizon_
                               : tree_->num_nodes();
    pools_.resize(pool_count);
    for (int i = 0; i < pool_count; ++i) {
      const int stage = scope_ == PoolScope::PerStage ? i + 1 : tree_->nodes[i].stage;
      pools_[i].stage = stage;
      pools_[i].node = scope_ == PoolScope::PerStage ? -1 : i;
      pools_[i].floor =
          stage >= horizon_ ? 0.0 : per_stage(cfg.floor, stage, "floor");
    }
    if (cfg.mode == Mode::Sampled) {
      histories_.resize(pool_count);
      if (cfg.delta == 0.0)
        warnings_.push_back("delta = 0 in sampled mode: no epsilon guarantee");
      if (cfg.delta < 0.0) throw Error("delta must be nonnegative");
    }
  }

  RunResult run() {
    RunResult result;
    result.scope = scope_;
    result.warnings = warnings_;
    const auto run_start = std::chrono::steady_clock::now();
    double prev_lb = -kInf;
    for (int k = 1; k <= cfg_.max_iterations; ++k) {
      const auto iter_start = std::chrono::steady_clock::now();
      solves_this_iter_ = 0;
      cuts_this_iter_ = 0;

      IterationRecord rec;
      rec.iteration = k;
      rec.lower_bound = cfg_.mode == Mode::FullTree ? forward_full(rec) : forward_sampled(rec);
      if (rec.lower_bound < prev_lb - 1e-9)
        throw Error("lower bound decreased at iteration " + std::to_string(k));
      prev_lb = rec.lower_bound;

      if (cfg_.mode == Mode::FullTree)
        backward_full(k);
      else
        backward_sampled(k);

      rec.cuts_added = cuts_this_iter_;
      rec.stage_solves = solves_this_iter_;
      rec.wall_ms = elapsed_ms(iter_start);
      result.total_stage_solves += solves_this_iter_;
      result.iterations.push_back(std::move(rec));

      if (stalled(result.iterations)) {
        result.termination = "stalled";
        break;
      }
    }
    if (result.termination.empty()) result.termination = "max_iterations";
    result.pools = pools_;
    result.total_wall_ms = elapsed_ms(run_start);
    return result;
  }

 private:
  bool stalled(const std::vector<IterationRecord>& iters) const {
    if (cfg_.stop_tol <= 0.0) return false;
    const int w = cfg_.stop_window;
    const int k = static_cast<int>(iters.size());
    if (k <= w) return false;
    const double now = iters[k - 1].lower_bound;
    const double before = iters[k - 1 - w].lower_bound;
    return now - before < cfg_.stop_tol * (1.0 + std::abs(now));
  }

  const Scenario& scenario_at(int stage, int payload) const {
    return data_.scenarios[stage - 1][payload];
  }

  CutPool& pool_for_node(int node) {
    return scope_ == PoolScope::PerStage ? pools_[tree_->nodes[node].stage - 1]
                                         : pools_[node];
  }

  StageSolution solve(int stage, const Scenario& scen, const Eigen::VectorXd& incoming,
                      const CutPool& pool, bool want_duals) {
    ++solves_this_iter_;
    return solve_stage(data_.templates[stage - 1], scen, incoming, pool, cfg_.solver,
                       want_duals);
  }

  // Builds the family-specific cut for successor (stage, scenario) at the
  // given center, re-solving with the successor's current pool.
  Cut successor_cut(int stage, const Scenario& scen, const CutPool& pool,
                    const Eigen::VectorXd& center, int iteration) {
    const StageTemplate& templ = data_.templates[stage - 1];
    switch (cfg_.family) {
      case CutFamily::ReverseNorm: {
        const StageSolution sol = solve(stage, scen, center, pool, false);
        Cut c;
        c.center = center;
        c.value = sol.objective;
        c.slope = Eigen::VectorXd::Zero(center.size());
        c.opening = per_stage(cfg_.rho, stage - 1, "rho");
        c.family = CutFamily::ReverseNorm;
        return c;
      }
      case CutFamily::StrengthenedBenders: {
        const StageSolution sol = solve(stage, scen, center, pool, true);
        ++solves_this_iter_;
        Cut c;
        c.center = center;
        c.value =
            lagrangian_stage_value(templ, scen, pool, center, sol.copy_duals, 0.0,
                                   cfg_.solver);
        c.slope = sol.copy_duals;
        c.opening = 0.0;
        c.family = CutFamily::StrengthenedBenders;
        return c;
      }
      case CutFamily::StrengthenedAugBenders: {
        const double rho = rho_schedule(iteration - 1, cfg_.schedule);
        const StageSolution sol = solve(stage, scen, center, pool, true);
        ++solves_this_iter_;
        Cut c;
        c.center = center;
        c.value = lagrangian_stage_value(templ, scen, pool, center, sol.copy_duals, rho,
                                         cfg_.solver);
        c.slope = sol.copy_duals;
        c.opening = rho;
        c.family = CutFamily::StrengthenedAugBenders;
        return c;
      }
    }
    throw Error("unknown cut family");
  }

  // --- full-tree mode -------------------------------------------------

  double forward_full(IterationRecord& rec) {
    states_.assign(tree_->num_nodes(), Eigen::VectorXd());
    const int last_stage = std::max(1, horizon_ - 1);
    double lb = -kInf;
    for (int n = 0; n < tree_->num_nodes(); ++n) {
      const TreeNode& nd = tree_->nodes[n];
      if (nd.stage > last_stage) continue;
      const Eigen::VectorXd& incoming =
          n == tree_->root() ? data_.initial_state : states_[nd.ancestor];
      const StageSolution sol =
          solve(nd.stage, scenario_at(nd.stage, nd.payload), incoming,
                pool_for_node(n), false);
      states_[n] = sol.state;
      if (n == tree_->root()) lb = sol.objective;
      rec.forward_states.emplace_back(n, sol.state);
    }
    return lb;
  }

  void backward_full(int k) {
    for (int t = horizon_ - 1; t >= 1; --t) {
      for (int n = 0; n < tree_->num_nodes(); ++n) {
        const TreeNode& nd = tree_->nodes[n];
        if (nd.stage != t) continue;
        add_cut_for(n, states_[n], k);
      }
    }
  }

  void add_cut_for(int node, const Eigen::VectorXd& center, int k) {
    const TreeNode& nd = tree_->nodes[node];
    std::vector<std::pair<double, Cut>> parts;
    parts.reserve(nd.successors.size());
    for (int m : nd.successors) {
      const TreeNode& md = tree_->nodes[m];
      parts.emplace_back(md.prob, successor_cut(md.stage, scenario_at(md.stage, md.payload),
                                                pool_for_node(m), center, k));
    }
    push_cut(pool_for_node(node), parts, nd.stage, scope_ == PoolScope::PerStage ? -1 : node, k);
  }

  void push_cut(CutPool& pool, const std::vector<std::pair<double, Cut>>& parts,
                int stage, long node, int k) {
    Cut cut = aggregate(parts);
    cut.stage = stage;
    cut.node = node;
    cut.iteration = k;
    pool.cuts.push_back(std::move(cut));
    ++cuts_this_iter_;
  }

  // --- sampled mode ----------------------------------------------------

  double forward_sampled(IterationRecord& rec) {
    path_.clear();
    path_states_.assign(horizon_ + 1, Eigen::VectorXd());
    if (lazy_)
      path_ = sample_path_lazy(data_.scenarios, rng_);
    else
      path_ = sample_path(*tree_, rng_);

    double lb = -kInf;
    Eigen::VectorXd incoming = data_.initial_state;
    const int last_stage = std::max(1, horizon_ - 1);
    for (int t = 1; t <= last_stage; ++t) {
      const int ref = path_[t - 1];  // scenario index (lazy) or node id
      const int payload = lazy_ ? ref : tree_->nodes[ref].payload;
      const int slot = pool_slot(t, ref);
      const StageSolution sol =
          solve(t, scenario_at(t, payload), incoming, pools_[slot], false);
      if (t == 1) lb = sol.objective;
      const Eigen::VectorXd x =
          stabilize_state(sol.state, histories_[slot], cfg_.delta);
      path_states_[t] = x;
      incoming = x;
      rec.forward_states.emplace_back(lazy_ ? t : ref, x);
    }
    return lb;
  }

  int pool_slot(int stage, int ref) const {
    return scope_ == PoolScope::PerStage ? stage - 1 : ref;
  }

  void backward_sampled(int k) {
    for (int t = horizon_ - 1; t >= 1; --t) {
      const int ref = path_[t - 1];
      const Eigen::VectorXd& center = path_states_[t];
      std::vector<std::pair<double, Cut>> parts;
      if (lazy_) {
        const auto& succ = data_.scenarios[t];  // stage t+1 scenarios
        for (size_t s = 0; s < succ.size(); ++s)
          parts.emplace_back(succ[s].prob,
                             successor_cut(t + 1, succ[s], pools_[pool_slot(t + 1, 0)],
                                           center, k));
      } else {
        for (int m : tree_->nodes[ref].successors) {
          const TreeNode& md = tree_->nodes[m];
          parts.emplace_back(md.prob,
                             successor_cut(md.stage, scenario_at(md.stage, md.payload),
                                           pools_[pool_slot(md.stage, m)], center, k));
        }
      }
      push_cut(pools_[pool_slot(t, ref)], parts, t,
               scope_ == PoolScope::PerStage ? -1 : ref, k);
    }
  }

  const ProblemData& data_;
  const SldpConfig& cfg_;
  const ScenarioTree* tree_;
  bool lazy_;
  std::mt19937_64 rng_;
  int horizon_ = 0;
  PoolScope scope_ = PoolScope::PerNode;
  std::vector<CutPool> pools_;
  std::vector<std::vector<Eigen::VectorXd>> histories_;
  std::vector<Eigen::VectorXd> states_;       // full mode, by node
  std::vector<int> path_;                     // sampled mode
  std::vector<Eigen::VectorXd> path_states_;  // sampled mode, by stage
  std::vector<std::string> warnings_;
  long solves_this_iter_ = 0;
  long cuts_this_iter_ = 0;
};

}  // namespace

void validate_problem_data(const ProblemData& data) {
  const int horizon = data.horizon();
  if (horizon == 0) throw Error("problem has no stages");
  if (static_cast<int>(data.scenarios.size()) != horizon)
    throw Error("scenario stages != template stages");
  if (data.scenarios[0].size() != 1)
    throw ProbabilityMismatch("stage 1 must have exactly one scenario");
  for (int t = 1; t <= horizon; ++t) {
    const StageTemplate& templ = data.templates[t - 1];
    validate_template(templ);
    double sum = 0.0;
    for (const Scenario& s : data.scenarios[t - 1]) {
      if (s.prob <= 0.0) throw ProbabilityMismatch("nonpositive scenario probability");
      sum += s.prob;
      for (const auto& [row, delta] : s.rhs_delta) {
        (void)delta;
        if (row < 0 || row >= templ.base.num_rows())
          throw MalformedProblem("scenario rhs delta row out of range");
      }
      for (const auto& [var, delta] : s.obj_delta) {
        (void)delta;
        if (var < 0 || var >= templ.base.num_vars)
          throw MalformedProblem("scenario obj delta var out of range");
      }
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ProbabilityMismatch("stage " + std::to_string(t) +
                                " probabilities sum to " + std::to_string(sum));
    if (t > 1) {
      const StageTemplate& prev = data.templates[t - 2];
      if (templ.copy_vars.size() != prev.state_vars.size())
        throw MalformedProblem("copy dimension of stage " + std::to_string(t) +
                               " != state dimension of stage " + std::to_string(t - 1));
    }
  }
  if (data.initial_state.size() !=
      static_cast<Eigen::Index>(data.templates[0].copy_vars.size()))
    throw MalformedProblem("initial state dimension != root copy dimension");
}

RunResult run_full(const ScenarioTree& tree, const ProblemData& data,
                   const SldpConfig& cfg) {
  if (cfg.mode != Mode::FullTree) throw Error("run_full requires FullTree mode");
  Engine engine(data, cfg, &tree, false);
  return engine.run();
}

RunResult run_sampled(const ScenarioTree& tree, const ProblemData& data,
                      const SldpConfig& cfg) {
  if (cfg.mode != Mode::Sampled) throw Error("run_sampled requires Sampled mode");
  Engine engine(data, cfg, &tree, false);
  return engine.run();
}

RunResult run_sampled_lazy(const ProblemData& data, const SldpConfig& cfg) {
  if (cfg.mode != Mode::Sampled) throw Error("run_sampled_lazy requires Sampled mode");
  Engine engine(data, cfg, nullptr, true);
  return engine.run();
}

Eigen::VectorXd stabilize_state(const Eigen::VectorXd& candidate,
                                std::vector<Eigen::VectorXd>& history, double delta) {
  double best = kInf;
  int best_idx = -1;
  for (size_t i = 0; i < history.size(); ++i) {
    const double dist = (candidate - history[i]).lpNorm<1>();
    if (dist < best) {  // strict: ties keep the lowest index
      best = dist;
      best_idx = static_cast<int>(i);
    }
  }
  if (best_idx >= 0 && best < delta) return history[best_idx];
  history.push_back(candidate);
  return candidate;
}

PolicyStats simulate_policy(const ProblemData& data, const std::vector<CutPool>& pools,
                            PoolScope scope, const ScenarioTree* tree, int n_samples,
                            std::uint64_t seed, const SolverOptions& opts) {
  validate_problem_data(data);
  if (scope == PoolScope::PerNode && tree == nullptr)
    throw Error("per-node pools require the tree");
  const int horizon = data.horizon();
  std::mt19937_64 rng(seed);
  std::vector<double> costs;
  costs.reserve(std::max(n_samples, 0));
  CutPool leaf_pool;  // empty, floor 0
  for (int s = 0; s < n_samples; ++s) {
    std::vector<int> path = scope == PoolScope::PerNode
                                ? sample_path(*tree, rng)
                                : sample_path_lazy(data.scenarios, rng);
    Eigen::VectorXd incoming = data.initial_state;
    double cost = 0.0;
    for (int t = 1; t <= horizon; ++t) {
      const int ref = path[t - 1];
      const int payload =
          scope == PoolScope::PerNode ? tree->nodes[ref].payload : ref;
      const CutPool& pool = scope == PoolScope::PerNode
                                ? pools[ref]
                                : (t < horizon ? pools[t - 1] : leaf_pool);
      const StageSolution sol = solve_stage(
          data.templates[t - 1], data.scenarios[t - 1][payload], incoming, pool, opts);
      cost += sol.objective - sol.alpha;  // true immediate cost only
      incoming = sol.state;
    }
    costs.push_back(cost);
  }
  PolicyStats stats;
  stats.samples = static_cast<int>(costs.size());
  if (costs.empty()) return stats;
  double mean = 0.0;
  for (double c : costs) mean += c;
  mean /= costs.size();
  double var = 0.0;
  for (double c : costs) var += (c - mean) * (c - mean);
  stats.mean = mean;
  stats.std_error = costs.size() > 1
                        ? std::sqrt(var / (static_cast<double>(costs.size()) *
                                           (costs.size() - 1.0)))
                        : 0.0;
  return stats;
}

ReverseCutResult reverse_cut_minimize(
    const MilpProblem& f_and_set, const std::vector<int>& state_vars,
    const std::function<double(const Eigen::VectorXd&)>& g_oracle, double rho,
    double eps, double floor_value, int max_iterations, const SolverOptions& opts) {
  if (!(rho > 0.0)) throw Error("reverse cut method needs rho > 0");
  if (eps < 0.0) throw Error("stopping tolerance must be nonnegative");
  StageTemplate wrapper;
  wrapper.base = f_and_set;
  wrapper.state_vars = state_vars;
  const int d = static_cast<int>(state_vars.size());
  wrapper.state_lo.resize(d);
  wrapper.state_hi.resize(d);
  for (int j = 0; j < d; ++j) {
    wrapper.state_lo[j] = f_and_set.lower[state_vars[j]];
    wrapper.state_hi[j] = f_and_set.upper[state_vars[j]];
  }
  validate_template(wrapper);

  ReverseCutResult out;
  out.pool.floor = floor_value;
  const Scenario blank;
  const Eigen::VectorXd no_incoming(0);
  for (int k = 1; k <= max_iterations; ++k) {
    const StageSolution sol =
        solve_stage(wrapper, blank, no_incoming, out.pool, opts);
    out.nu.push_back(sol.objective);
    out.iterations = k;
    double g_val = kInf;
    try {
      g_val = g_oracle(sol.state);
    } catch (const std::exception& e) {
      throw OracleFailure(std::string("value oracle threw: ") + e.what());
    }
    if (!std::isfinite(g_val)) throw OracleFailure("value oracle returned a non-finite value");
    out.final_gap = g_val - sol.alpha;
    out.x = sol.state;
    if (out.final_gap <= eps) return out;
    Cut cut;
    cut.center = sol.state;
    cut.value = g_val;
    cut.slope = Eigen::VectorXd::Zero(d);
    cut.opening = rho;
    cut.family = CutFamily::ReverseNorm;
    cut.iteration = k;
    out.pool.cuts.push_back(std::move(cut));
  }
  throw Error("reverse cut method hit the iteration cap before reaching eps");
}

}  // namespace sldp
