#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

#include "sldp/milp.hpp"

namespace sldp {

namespace {

struct Decision {
  int var;
  double lo, hi;
  std::shared_ptr<const Decision> parent;
};

struct Node {
  double bound;  // LP bound of the parent (root: -inf)
  long id;
  std::shared_ptr<const Decision> chain;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;                                // FIFO among ties
  }
};

void apply_chain(const Decision* d, Eigen::VectorXd& lo, Eigen::VectorXd& hi) {
  for (; d != nullptr; d = d->parent.get()) {
    lo[d->var] = std::max(lo[d->var], d->lo);
    hi[d->var] = std::min(hi[d->var], d->hi);
  }
}

}  // namespace

MilpSolution enumerate_milp(const MilpProblem& p, const SolverOptions& opts) {
  validate_problem(p, true);
  const int n = p.num_vars;
  std::vector<int> ints;
  for (int j = 0; j < n; ++j)
    if (p.integrality[j]) ints.push_back(j);
  const bool pure_int = static_cast<int>(ints.size()) == n;

  std::vector<long> lo(ints.size()), hi(ints.size());
  double lattice = 1.0;
  for (size_t k = 0; k < ints.size(); ++k) {
    lo[k] = static_cast<long>(std::ceil(p.lower[ints[k]] - opts.int_tol));
    hi[k] = static_cast<long>(std::floor(p.upper[ints[k]] + opts.int_tol));
    if (hi[k] < lo[k]) {
      MilpSolution s;
      s.status = SolveStatus::Infeasible;
      return s;
    }
    lattice *= static_cast<double>(hi[k] - lo[k] + 1);
    if (lattice > opts.enum_cap)
      throw EnumerationCapExceeded("integer lattice larger than enumeration cap");
  }

  MilpSolution best;
  best.status = SolveStatus::Infeasible;
  best.objective = kInf;
  best.best_bound = kInf;

  std::vector<long> cur(lo);
  Eigen::VectorXd xlo = p.lower, xhi = p.upper;
  Eigen::VectorXd x(n);
  const int rows = p.num_rows();
  while (true) {
    ++best.node_count;
    if (pure_int) {
      for (size_t k = 0; k < ints.size(); ++k) x[ints[k]] = static_cast<double>(cur[k]);
      bool feas = true;
      for (int i = 0; i < rows && feas; ++i) {
        const double lhs = p.row_coeffs.row(i).dot(x);
        const double tol = opts.feas_tol * (1.0 + std::abs(p.rhs[i]));
        switch (p.row_sense[i]) {
          case RowSense::LessEqual: feas = lhs <= p.rhs[i] + tol; break;
          case RowSense::Equal: feas = std::abs(lhs - p.rhs[i]) <= tol; break;
          case RowSense::GreaterEqual: feas = lhs >= p.rhs[i] - tol; break;
        }
      }
      if (feas) {
        const double obj = p.objective.dot(x);
        if (best.status != SolveStatus::Optimal || obj < best.objective) {
          best.status = SolveStatus::Optimal;
          best.objective = obj;
          best.primal = x;
        }
      }
    } else {
      for (size_t k = 0; k < ints.size(); ++k)
        xlo[ints[k]] = xhi[ints[k]] = static_cast<double>(cur[k]);
      LpSolution lp = solve_lp_with_bounds(p, xlo, xhi, opts);
      if (lp.status == SolveStatus::Unbounded) {
        best.status = SolveStatus::Unbounded;
        return best;
      }
      if (lp.status == SolveStatus::Optimal &&
          (best.status != SolveStatus::Optimal || lp.objective < best.objective)) {
        best.status = SolveStatus::Optimal;
        best.objective = lp.objective;
        best.primal = lp.primal;
      }
    }
    // odometer
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
  if (best.status == SolveStatus::Optimal) best.best_bound = best.objective;
  return best;
}

MilpSolution solve_milp(const MilpProblem& p, const SolverOptions& opts) {
  validate_problem(p, true);
  const int n = p.num_vars;
  std::vector<int> ints;
  for (int j = 0; j < n; ++j)
    if (p.integrality[j]) ints.push_back(j);

  MilpSolution best;
  best.status = SolveStatus::Infeasible;
  best.objective = kInf;
  best.node_count = 0;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push({-kInf, next_id++, nullptr});

  Eigen::VectorXd lo(n), hi(n);
  bool saw_unbounded = false;
  double best_open_bound = -kInf;

  const auto gap_eps = [&]() {
    return best.status == SolveStatus::Optimal ? 1e-9 * (1.0 + std::abs(best.objective))
                                               : 0.0;
  };

  const auto try_incumbent = [&](const LpSolution& lp) {
    if (lp.status != SolveStatus::Optimal) return;
    if (best.status == SolveStatus::Optimal && lp.objective >= best.objective) return;
    best.status = SolveStatus::Optimal;
    best.objective = lp.objective;
    best.primal = lp.primal;
  };

  // Rounding dive: fix every integer variable to the nearest lattice point of
  // the fractional solution and re-solve the continuous part.
  const auto rounding_dive = [&](const Eigen::VectorXd& frac) {
    Eigen::VectorXd dlo = lo, dhi = hi;
    for (int j : ints) {
      const double v = std::clamp(std::round(frac[j]), lo[j], hi[j]);
      dlo[j] = dhi[j] = v;
    }
    try_incumbent(solve_lp_with_bounds(p, dlo, dhi, opts));
  };

  while (!open.empty()) {
    const Node node = open.top();
    open.pop();
    best_open_bound = node.bound;
    if (best.status == SolveStatus::Optimal && node.bound >= best.objective - gap_eps())
      break;  // best-first: every remaining node is at least as bad
    if (++best.node_count > opts.node_cap)
      throw NodeLimitExceeded("branch-and-bound node cap exceeded");

    lo = p.lower;
    hi = p.upper;
    apply_chain(node.chain.get(), lo, hi);
    bool crossed = false;
    for (int j : ints)
      if (lo[j] > hi[j]) { crossed = true; break; }
    if (crossed) continue;

    LpSolution lp = solve_lp_with_bounds(p, lo, hi, opts);
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      saw_unbounded = true;
      break;
    }
    if (best.status == SolveStatus::Optimal && lp.objective >= best.objective - gap_eps())
      continue;

    int branch_var = -1;
    double branch_score = opts.int_tol;
    for (int j : ints) {
      const double f = std::abs(lp.primal[j] - std::round(lp.primal[j]));
      if (f > branch_score) {
        branch_score = f;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      try_incumbent(lp);
      continue;
    }

    if (node.id == 0 || best.node_count % 16 == 0) rounding_dive(lp.primal);

    const double v = lp.primal[branch_var];
    auto down = std::make_shared<const Decision>(
        Decision{branch_var, -kInf, std::floor(v), node.chain});
    auto up = std::make_shared<const Decision>(
        Decision{branch_var, std::ceil(v), kInf, node.chain});
    open.push({lp.objective, next_id++, down});
    open.push({lp.objective, next_id++, up});
  }

  if (saw_unbounded) {
    best.status = SolveStatus::Unbounded;
    return best;
  }
  if (best.status != SolveStatus::Optimal) {
    best.best_bound = kInf;
    return best;
  }
  best.best_bound = open.empty() ? best.objective : std::min(best.objective, best_open_bound);
  return best;
}

}  // namespace sldp
