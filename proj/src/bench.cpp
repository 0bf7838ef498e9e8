#include <algorithm>
#include <cmath>
#include <map>

#include "sldp/bench.hpp"

namespace sldp {

namespace {

void check_symmetric(const std::vector<double>& noise) {
  if (noise.empty()) throw Error("noise set must be nonempty");
  std::vector<double> sorted = noise;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  for (size_t i = 0; i < n; ++i)
    if (std::abs(sorted[i] + sorted[n - 1 - i]) > 1e-12)
      throw Error("noise set must be symmetric about 0");
}

}  // namespace

ProblemData gen_control1d(const ControlProblemSpec& spec) {
  if (spec.horizon < 1) throw Error("horizon must be at least 1");
  if (spec.beta < 0.0) throw Error("beta must be nonnegative");
  if (spec.box_lo >= spec.box_hi) throw Error("state box is empty");
  check_symmetric(spec.noise);

  ProblemData data;
  data.name = "control1d";
  const int T = spec.horizon;
  for (int t = 1; t <= T; ++t) {
    StageTemplate st;
    st.name = "control_stage_" + std::to_string(t);
    MilpProblem& p = st.base;
    // variables: x (state), z (copy), b (control bit, c = 2b - 1), s+, s-
    p.num_vars = 5;
    const double w = std::pow(spec.beta, t - 1);
    p.objective.resize(5);
    p.objective << 0.0, 0.0, 0.0, w, w;
    p.lower.resize(5);
    p.upper.resize(5);
    p.lower << spec.box_lo, spec.box_lo, 0.0, 0.0, 0.0;
    p.upper << spec.box_hi, spec.box_hi, 1.0, kInf, kInf;
    p.integrality = {false, false, true, false, false};
    p.row_coeffs = Eigen::MatrixXd::Zero(2, 5);
    p.rhs.resize(2);
    // x - z - 2b = xi - 1   (dynamics, xi enters through the rhs delta)
    p.row_coeffs(0, 0) = 1.0;
    p.row_coeffs(0, 1) = -1.0;
    p.row_coeffs(0, 2) = -2.0;
    p.rhs[0] = -1.0;
    // s+ - s- - x = 0       (|x| split)
    p.row_coeffs(1, 3) = 1.0;
    p.row_coeffs(1, 4) = -1.0;
    p.row_coeffs(1, 0) = -1.0;
    p.rhs[1] = 0.0;
    p.row_sense = {RowSense::Equal, RowSense::Equal};
    st.state_vars = {0};
    st.copy_vars = {1};
    st.state_lo = Eigen::VectorXd::Constant(1, spec.box_lo);
    st.state_hi = Eigen::VectorXd::Constant(1, spec.box_hi);
    st.lipschitz = w;
    data.templates.push_back(std::move(st));

    std::vector<Scenario> stage_scens;
    if (t == 1) {
      stage_scens.push_back(Scenario{});  // xi = 0 at the root
    } else {
      const double prob = 1.0 / static_cast<double>(spec.noise.size());
      for (double xi : spec.noise) {
        Scenario s;
        s.prob = prob;
        s.rhs_delta = {{0, xi}};
        stage_scens.push_back(std::move(s));
      }
    }
    data.scenarios.push_back(std::move(stage_scens));
  }
  data.initial_state = Eigen::VectorXd::Constant(1, spec.x0);
  return data;
}

std::vector<double> control_rho_recursion(const ControlProblemSpec& spec) {
  const int T = spec.horizon;
  std::vector<double> rho(T, 0.0);
  for (int t = T - 1; t >= 1; --t) {
    const double l_next = std::pow(spec.beta, t);  // stage t+1 immediate constant
    rho[t - 1] = l_next + (t + 1 <= T - 1 ? rho[t] : 0.0);
  }
  return rho;
}

ProblemData gen_caroe_schultz(const CaroeSchultzSpec& spec) {
  const int n = spec.n_points;
  if (n < 2) throw Error("need at least two grid points per axis");

  ProblemData data;
  data.name = std::string("caroe_n") + std::to_string(n) +
              (spec.discrete_first_stage ? "_int" : "_cont");
  {
    StageTemplate st;
    st.name = "caroe_first_stage";
    MilpProblem& p = st.base;
    p.num_vars = 2;
    p.objective.resize(2);
    p.objective << -1.5, -4.0;
    p.lower = Eigen::VectorXd::Zero(2);
    p.upper = Eigen::VectorXd::Constant(2, 5.0);
    p.integrality = {spec.discrete_first_stage, spec.discrete_first_stage};
    p.row_coeffs = Eigen::MatrixXd::Zero(0, 2);
    p.rhs.resize(0);
    st.state_vars = {0, 1};
    st.state_lo = Eigen::VectorXd::Zero(2);
    st.state_hi = Eigen::VectorXd::Constant(2, 5.0);
    st.lipschitz = 4.0;
    data.templates.push_back(std::move(st));
    data.scenarios.push_back({Scenario{}});
  }
  {
    StageTemplate st;
    st.name = "caroe_second_stage";
    MilpProblem& p = st.base;
    // variables: y1..y4 binary, z1 z2 copies of the first-stage decision
    p.num_vars = 6;
    p.objective.resize(6);
    p.objective << -16.0, -19.0, -23.0, -28.0, 0.0, 0.0;
    p.lower = Eigen::VectorXd::Zero(6);
    p.upper.resize(6);
    p.upper << 1.0, 1.0, 1.0, 1.0, 5.0, 5.0;
    p.integrality = {true, true, true, true, false, false};
    p.row_coeffs = Eigen::MatrixXd::Zero(2, 6);
    p.row_coeffs.row(0) << 2.0, 3.0, 4.0, 5.0, 1.0, 0.0;
    p.row_coeffs.row(1) << 6.0, 1.0, 3.0, 2.0, 0.0, 1.0;
    p.rhs = Eigen::VectorXd::Zero(2);  // omega enters through the deltas
    p.row_sense = {RowSense::LessEqual, RowSense::LessEqual};
    st.state_vars = {};
    st.copy_vars = {4, 5};
    st.state_lo.resize(0);
    st.state_hi.resize(0);
    st.lipschitz = 0.0;
    data.templates.push_back(std::move(st));

    std::vector<Scenario> stage_scens;
    const double prob = 1.0 / static_cast<double>(n) / static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double w1 = 5.0 + 10.0 * i / (n - 1);
        const double w2 = 5.0 + 10.0 * j / (n - 1);
        Scenario s;
        s.prob = prob;
        s.rhs_delta = {{0, w1}, {1, w2}};
        stage_scens.push_back(std::move(s));
      }
    }
    data.scenarios.push_back(std::move(stage_scens));
  }
  data.initial_state.resize(0);
  return data;
}

namespace {

// Backward recursion over the tree implied by stagewise scenarios, exact as
// long as every interior stage carries integer state variables.
class BackwardOracle {
 public:
  BackwardOracle(const ProblemData& data, const SolverOptions& opts, double cap)
      : data_(data), opts_(opts), cap_(cap) {
    validate_problem_data(data);
  }

  double qbar(int stage, const Eigen::VectorXd& x) {
    const int T = data_.horizon();
    if (stage >= T) return 0.0;
    double v = 0.0;
    for (const Scenario& s : data_.scenarios[stage]) v += s.prob * qnode(stage + 1, s, x);
    return v;
  }

  double qnode(int stage, const Scenario& scen, const Eigen::VectorXd& incoming) {
    const int T = data_.horizon();
    const StageTemplate& templ = data_.templates[stage - 1];
    CutPool empty;
    if (stage == T) {
      AssembledStage a = assemble_stage(templ, scen, incoming, empty);
      bump();
      const MilpSolution sol = enumerate_milp(a.milp, opts_);
      if (sol.status != SolveStatus::Optimal)
        throw Error("oracle leaf subproblem not optimal");
      return sol.objective;
    }
    // Interior stage: enumerate the integer state lattice.
    const int d = static_cast<int>(templ.state_vars.size());
    for (int j : templ.state_vars)
      if (!templ.base.integrality[j])
        throw Error("exact oracle needs integer interior states");
    std::vector<long> lo(d), hi(d), cur(d);
    for (int j = 0; j < d; ++j) {
      lo[j] = static_cast<long>(std::ceil(templ.base.lower[templ.state_vars[j]] - 1e-9));
      hi[j] = static_cast<long>(std::floor(templ.base.upper[templ.state_vars[j]] + 1e-9));
      cur[j] = lo[j];
    }
    double best = kInf;
    while (true) {
      AssembledStage a = assemble_stage(templ, scen, incoming, empty);
      Eigen::VectorXd xhat(d);
      for (int j = 0; j < d; ++j) {
        xhat[j] = static_cast<double>(cur[j]);
        a.milp.lower[templ.state_vars[j]] = xhat[j];
        a.milp.upper[templ.state_vars[j]] = xhat[j];
      }
      bump();
      const MilpSolution sol = enumerate_milp(a.milp, opts_);
      if (sol.status == SolveStatus::Optimal)
        best = std::min(best, sol.objective + qbar_memo(stage, cur));
      int j = 0;
      for (; j < d; ++j) {
        if (cur[j] < hi[j]) {
          ++cur[j];
          break;
        }
        cur[j] = lo[j];
      }
      if (j == d || d == 0) break;
    }
    if (!std::isfinite(best)) throw Error("oracle stage subproblem infeasible");
    return best;
  }

 private:
  double qbar_memo(int stage, const std::vector<long>& lattice) {
    const auto key = std::make_pair(stage, lattice);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Eigen::VectorXd x(lattice.size());
    for (size_t j = 0; j < lattice.size(); ++j) x[j] = static_cast<double>(lattice[j]);
    const double v = qbar(stage, x);
    memo_.emplace(key, v);
    return v;
  }

  void bump() {
    if (++solves_ > cap_) throw EnumerationCapExceeded("oracle solve cap exceeded");
  }

  const ProblemData& data_;
  SolverOptions opts_;
  double cap_;
  double solves_ = 0;
  std::map<std::pair<int, std::vector<long>>, double> memo_;
};

bool stages_exact(const ProblemData& data, int from_stage) {
  for (int t = from_stage; t <= data.horizon() - 1; ++t) {
    const StageTemplate& templ = data.templates[t - 1];
    for (int j : templ.state_vars)
      if (!templ.base.integrality[j]) return false;
  }
  return true;
}

}  // namespace

std::vector<OracleTable> exact_expected_ctg(
    const ProblemData& data, const std::vector<std::vector<Eigen::VectorXd>>& samples,
    const SolverOptions& opts, double solve_cap) {
  BackwardOracle oracle(data, opts, solve_cap);
  std::vector<OracleTable> tables;
  const int T = data.horizon();
  for (int t = 1; t <= T - 1 && t <= static_cast<int>(samples.size()); ++t) {
    OracleTable table;
    table.stage = t;
    table.exact = stages_exact(data, t + 1);
    if (!table.exact) throw Error("exact oracle needs integer interior states");
    for (const Eigen::VectorXd& x : samples[t - 1])
      table.values.emplace_back(x, oracle.qbar(t, x));
    tables.push_back(std::move(table));
  }
  return tables;
}

double oracle_expected_ctg(const ProblemData& data, int stage, const Eigen::VectorXd& x,
                           const SolverOptions& opts, double solve_cap) {
  BackwardOracle oracle(data, opts, solve_cap);
  return oracle.qbar(stage, x);
}

double oracle_root_objective(const ProblemData& data, const SolverOptions& opts,
                             double solve_cap) {
  BackwardOracle oracle(data, opts, solve_cap);
  return oracle.qnode(1, data.scenarios[0][0], data.initial_state);
}

std::vector<OracleTable> grid_expected_ctg(const ProblemData& data, double spacing,
                                           const SolverOptions& opts) {
  const int T = data.horizon();
  for (const StageTemplate& templ : data.templates)
    if (templ.state_vars.size() != 1)
      throw Error("grid oracle supports 1-D states only");
  if (!(spacing > 0.0)) throw Error("grid spacing must be positive");

  // Tables are built backwards; each stage's values interpolate the next.
  std::vector<OracleTable> tables(T - 1);
  std::vector<double> grid_next;
  std::vector<double> val_next;

  const auto interp = [&](double x) {
    if (grid_next.empty()) return 0.0;
    if (x <= grid_next.front()) return val_next.front();
    if (x >= grid_next.back()) return val_next.back();
    const auto it = std::upper_bound(grid_next.begin(), grid_next.end(), x);
    const size_t hi = static_cast<size_t>(it - grid_next.begin());
    const double t = (x - grid_next[hi - 1]) / (grid_next[hi] - grid_next[hi - 1]);
    return (1.0 - t) * val_next[hi - 1] + t * val_next[hi];
  };

  // Value of one stage problem at a given incoming state with the next
  // stage's interpolated table as the continuation: enumerate the integer
  // assignments, LP for the continuous part, read off the outgoing state.
  const auto stage_value = [&](int stage, const Scenario& scen, double incoming) {
    const StageTemplate& templ = data.templates[stage - 1];
    CutPool empty;
    Eigen::VectorXd in(1);
    in[0] = incoming;
    AssembledStage a = assemble_stage(templ, scen, in, empty);
    std::vector<int> ints;
    for (int j = 0; j < a.milp.num_vars; ++j)
      if (a.milp.integrality[j]) ints.push_back(j);
    std::vector<long> lo(ints.size()), hi(ints.size()), cur;
    double lattice = 1.0;
    for (size_t k = 0; k < ints.size(); ++k) {
      lo[k] = static_cast<long>(std::ceil(a.milp.lower[ints[k]] - 1e-9));
      hi[k] = static_cast<long>(std::floor(a.milp.upper[ints[k]] + 1e-9));
      lattice *= static_cast<double>(hi[k] - lo[k] + 1);
    }
    if (lattice > 1e5) throw EnumerationCapExceeded("grid oracle lattice too large");
    cur = lo;
    double best = kInf;
    Eigen::VectorXd xlo = a.milp.lower, xhi = a.milp.upper;
    while (true) {
      for (size_t k = 0; k < ints.size(); ++k)
        xlo[ints[k]] = xhi[ints[k]] = static_cast<double>(cur[k]);
      const LpSolution lp = solve_lp_with_bounds(a.milp, xlo, xhi, opts);
      if (lp.status == SolveStatus::Optimal) {
        const double xout = lp.primal[templ.state_vars[0]];
        best = std::min(best, lp.objective +
                                  (stage < T ? interp(xout) : 0.0));
      }
      size_t k = 0;
      for (; k < ints.size(); ++k) {
        if (cur[k] < hi[k]) {
          ++cur[k];
          break;
        }
        cur[k] = lo[k];
      }
      if (k == ints.size()) break;
    }
    return best;
  };

  for (int t = T - 1; t >= 1; --t) {
    const double lo = data.templates[t - 1].state_lo[0];
    const double hi = data.templates[t - 1].state_hi[0];
    std::vector<double> grid;
    for (double x = lo; x <= hi + 1e-9; x += spacing) grid.push_back(x);
    std::vector<double> vals(grid.size(), 0.0);
    for (size_t i = 0; i < grid.size(); ++i) {
      double v = 0.0;
      for (const Scenario& s : data.scenarios[t]) v += s.prob * stage_value(t + 1, s, grid[i]);
      vals[i] = v;
    }
    OracleTable table;
    table.stage = t;
    table.exact = false;  // interpolation enters
    for (size_t i = 0; i < grid.size(); ++i) {
      Eigen::VectorXd x(1);
      x[0] = grid[i];
      table.values.emplace_back(x, vals[i]);
    }
    tables[t - 1] = std::move(table);
    grid_next = std::move(grid);
    val_next = std::move(vals);
  }
  return tables;
}

BenchRun caroe_run(int n, bool discrete, CutFamily family) {
  BenchRun run;
  run.data = gen_caroe_schultz(CaroeSchultzSpec{n, discrete});
  SldpConfig& c = run.config;
  c.mode = Mode::FullTree;
  c.family = family;
  c.floor = {-86.0};  // the recourse value can never drop below taking all y
  c.seed = 1;
  switch (family) {
    case CutFamily::StrengthenedBenders:
      c.max_iterations = 100;
      c.stop_tol = 1e-9;
      c.stop_window = 8;
      break;
    case CutFamily::StrengthenedAugBenders:
      c.max_iterations = 200;
      c.schedule = RhoSchedule{32.0, 2.0, 8, 512.0};
      c.stop_tol = 1e-10;
      c.stop_window = 20;
      break;
    case CutFamily::ReverseNorm:
      c.max_iterations = 200;
      c.rho = {50.0};
      c.stop_tol = 1e-10;
      c.stop_window = 12;
      break;
  }
  return run;
}

BenchRun control_run(CutFamily family, const ControlProblemSpec* spec_in) {
  ControlProblemSpec spec = spec_in ? *spec_in : ControlProblemSpec{};
  if (spec_in == nullptr) {
    double worst = std::abs(spec.x0);
    double max_noise = 0.0;
    for (double v : spec.noise) max_noise = std::max(max_noise, std::abs(v));
    worst += spec.horizon * (1.0 + max_noise);
    spec.box_lo = -std::ceil(worst);
    spec.box_hi = std::ceil(worst);
  }
  BenchRun run;
  run.data = gen_control1d(spec);
  SldpConfig& c = run.config;
  c.mode = Mode::Sampled;
  c.family = family;
  c.floor = {0.0};
  c.delta = 0.1;
  c.max_iterations = 100;
  c.seed = 17;
  c.rho = control_rho_recursion(spec);
  if (family == CutFamily::StrengthenedAugBenders)
    c.schedule = RhoSchedule{0.6, 2.0, 10, 16.0};
  return run;
}

}  // namespace sldp
