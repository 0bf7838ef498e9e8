#include <algorithm>
#include <cmath>

#include "sldp/stage.hpp"

namespace sldp {

void validate_template(const StageTemplate& t) {
  validate_problem(t.base, true);
  const int n = t.base.num_vars;
  const int d = static_cast<int>(t.state_vars.size());
  if (t.state_lo.size() != d || t.state_hi.size() != d)
    throw MalformedProblem("state box size != state dimension");
  std::vector<bool> seen(n, false);
  for (int j : t.state_vars) {
    if (j < 0 || j >= n || seen[j]) throw MalformedProblem("bad state variable index");
    seen[j] = true;
  }
  for (int j : t.copy_vars) {
    if (j < 0 || j >= n || seen[j]) throw MalformedProblem("bad copy variable index");
    seen[j] = true;
    if (t.base.integrality[j])
      throw MalformedProblem("copy variables must be continuous");
  }
  for (int k = 0; k < d; ++k) {
    if (!std::isfinite(t.state_lo[k]) || !std::isfinite(t.state_hi[k]) ||
        t.state_lo[k] > t.state_hi[k])
      throw MalformedProblem("state box must be finite and ordered");
  }
}

namespace {

// Exact maximum over [lo, hi] of the one-dimensional piece
//   a (x - ca) - oa |x - ca| - b (x - cb) + ob |x - cb|,
// attained at an endpoint or at one of the two kinks.
double pair_dim_max(double lo, double hi, double ca, double a, double oa, double cb,
                    double b, double ob) {
  double best = -kInf;
  const double pts[4] = {lo, hi, std::clamp(ca, lo, hi), std::clamp(cb, lo, hi)};
  for (double x : pts) {
    const double term = a * (x - ca) - oa * std::abs(x - ca) - b * (x - cb) +
                        ob * std::abs(x - cb);
    best = std::max(best, term);
  }
  return best;
}

// Pointwise dominance of cut a by cut b over the box. The difference is a sum
// of per-dimension piecewise-linear terms, so its exact maximum separates.
bool dominated_by(const Cut& a, const Cut& b, const Eigen::VectorXd& lo,
                  const Eigen::VectorXd& hi) {
  double gap = a.value - b.value;
  for (Eigen::Index j = 0; j < a.center.size(); ++j)
    gap += pair_dim_max(lo[j], hi[j], a.center[j], a.slope[j], a.opening, b.center[j],
                        b.slope[j], b.opening);
  return gap <= 0.0;
}

bool below_floor(const Cut& a, double floor, const Eigen::VectorXd& lo,
                 const Eigen::VectorXd& hi) {
  double peak = a.value;
  for (Eigen::Index j = 0; j < a.center.size(); ++j)
    peak += pair_dim_max(lo[j], hi[j], a.center[j], a.slope[j], a.opening, 0.0, 0.0, 0.0);
  return peak <= floor;
}

// Evaluation set on which the pool maximum is piecewise linear: the integer
// state lattice when every state variable is integral, or, in one continuous
// dimension, the centers, the box ends and all pairwise piece crossings.
std::vector<Eigen::VectorXd> envelope_points(const StageTemplate& templ,
                                             const std::vector<Cut>& cuts,
                                             double floor) {
  const int d = static_cast<int>(templ.state_vars.size());
  std::vector<Eigen::VectorXd> points;
  bool all_int = d > 0;
  for (int j : templ.state_vars) all_int = all_int && templ.base.integrality[j];
  if (all_int) {
    double lattice = 1.0;
    std::vector<long> lo(d), hi(d), cur(d);
    for (int j = 0; j < d; ++j) {
      lo[j] = static_cast<long>(std::ceil(templ.base.lower[templ.state_vars[j]] - 1e-9));
      hi[j] = static_cast<long>(std::floor(templ.base.upper[templ.state_vars[j]] + 1e-9));
      if (hi[j] < lo[j]) return points;
      lattice *= static_cast<double>(hi[j] - lo[j] + 1);
      cur[j] = lo[j];
    }
    if (lattice > 4096.0) return points;
    while (true) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x[j] = static_cast<double>(cur[j]);
      points.push_back(std::move(x));
      int j = 0;
      for (; j < d; ++j) {
        if (cur[j] < hi[j]) {
          ++cur[j];
          break;
        }
        cur[j] = lo[j];
      }
      if (j == d) break;
    }
    return points;
  }
  if (d != 1 || cuts.size() > 96) return points;
  const double lo = templ.state_lo[0], hi = templ.state_hi[0];
  std::vector<double> xs{lo, hi};
  struct Line {
    double slope, y0;
  };
  std::vector<Line> lines{{0.0, floor}};
  for (const Cut& c : cuts) {
    xs.push_back(std::clamp(c.center[0], lo, hi));
    const double s_left = c.slope[0] + c.opening;
    const double s_right = c.slope[0] - c.opening;
    lines.push_back({s_left, c.value - s_left * c.center[0]});
    lines.push_back({s_right, c.value - s_right * c.center[0]});
  }
  for (size_t i = 0; i < lines.size(); ++i)
    for (size_t j = i + 1; j < lines.size(); ++j) {
      const double ds = lines[i].slope - lines[j].slope;
      if (std::abs(ds) < 1e-12) continue;
      const double x = (lines[j].y0 - lines[i].y0) / ds;
      if (x > lo && x < hi) xs.push_back(x);
    }
  points.reserve(xs.size());
  for (double x : xs) points.push_back(Eigen::VectorXd::Constant(1, x));
  return points;
}

// Indices of pool cuts that actually contribute to the pool maximum on the
// feasible state set; dropped cuts are implied by the kept ones, so the
// assembled epigraph is unchanged. Results are cached per pool size.
std::vector<int> contributing_cuts(const StageTemplate& templ, const CutPool& pool) {
  const size_t k = pool.cuts.size();
  if (pool.encode_cache_size == k) return pool.encode_cache;
  const Eigen::VectorXd& lo = templ.state_lo;
  const Eigen::VectorXd& hi = templ.state_hi;

  std::vector<bool> drop(k, false);
  for (size_t i = 0; i < k; ++i) {
    if (below_floor(pool.cuts[i], pool.floor, lo, hi)) {
      drop[i] = true;
      continue;
    }
    for (size_t j = 0; j < k && !drop[i]; ++j) {
      if (j == i || drop[j]) continue;
      if (!dominated_by(pool.cuts[i], pool.cuts[j], lo, hi)) continue;
      // Mutual domination means identical functions: keep the earlier one.
      if (dominated_by(pool.cuts[j], pool.cuts[i], lo, hi) && j > i) continue;
      drop[i] = true;
    }
  }

  std::vector<int> survivors;
  for (size_t i = 0; i < k; ++i)
    if (!drop[i]) survivors.push_back(static_cast<int>(i));

  std::vector<Cut> surviving;
  surviving.reserve(survivors.size());
  for (int i : survivors) surviving.push_back(pool.cuts[i]);
  const std::vector<Eigen::VectorXd> points =
      envelope_points(templ, surviving, pool.floor);
  std::vector<int> kept;
  if (points.empty()) {
    kept = survivors;
  } else {
    // Newest first: a cut is kept only if it rises above the kept envelope
    // somewhere on the evaluation set.
    std::vector<double> env(points.size(), pool.floor);
    std::vector<char> keep(survivors.size(), 0);
    for (int s = static_cast<int>(survivors.size()) - 1; s >= 0; --s) {
      const Cut& c = pool.cuts[survivors[s]];
      bool contributes = false;
      for (size_t p = 0; p < points.size(); ++p)
        if (evaluate(c, points[p]) > env[p]) {
          contributes = true;
          break;
        }
      if (!contributes) continue;
      keep[s] = 1;
      for (size_t p = 0; p < points.size(); ++p)
        env[p] = std::max(env[p], evaluate(c, points[p]));
    }
    for (size_t s = 0; s < survivors.size(); ++s)
      if (keep[s]) kept.push_back(survivors[s]);
  }
  pool.encode_cache = kept;
  pool.encode_cache_size = k;
  return kept;
}

AssembledStage assemble_core(const StageTemplate& templ, const Scenario& scen,
                             const Eigen::VectorXd* incoming, const CutPool& pool) {
  const MilpProblem& base = templ.base;
  const int n0 = base.num_vars;
  const int r0 = base.num_rows();
  const int d = static_cast<int>(templ.state_vars.size());
  const int dc = static_cast<int>(templ.copy_vars.size());

  if (!std::isfinite(pool.floor)) throw Error("pool floor must be finite");
  if (incoming != nullptr && incoming->size() != dc)
    throw MalformedProblem("incoming state dimension != copy dimension");

  const double box_scale =
      templ.state_hi.size() > 0 ? templ.state_hi.cwiseAbs().maxCoeff() : 0.0;
  const double box_tol = 1e-9 * (1.0 + box_scale);
  for (const Cut& c : pool.cuts) {
    if (c.center.size() != d) throw MalformedProblem("cut center dimension mismatch");
    if (c.slope.size() != d) throw MalformedProblem("cut slope dimension mismatch");
    for (int j = 0; j < d; ++j)
      if (c.center[j] < templ.state_lo[j] - box_tol ||
          c.center[j] > templ.state_hi[j] + box_tol)
        throw CenterOutsideBox("cut center outside the state box");
  }

  const std::vector<int> kept = contributing_cuts(templ, pool);
  int n_gadget = 0;
  for (int i : kept)
    if (pool.cuts[i].opening > 0.0 && d > 0) ++n_gadget;

  const int cols = n0 + 1 + 3 * d * n_gadget;
  const int rows = r0 + (incoming ? dc : 0) +
                   static_cast<int>(kept.size()) + 3 * d * n_gadget;

  AssembledStage out;
  out.templ = &templ;
  out.alpha_col = n0;
  out.num_copy = incoming ? dc : 0;
  MilpProblem& p = out.milp;
  p.num_vars = cols;
  p.objective = Eigen::VectorXd::Zero(cols);
  p.objective.head(n0) = base.objective;
  p.lower = Eigen::VectorXd::Zero(cols);
  p.upper = Eigen::VectorXd::Zero(cols);
  p.lower.head(n0) = base.lower;
  p.upper.head(n0) = base.upper;
  p.integrality.assign(cols, false);
  for (int j = 0; j < n0; ++j) p.integrality[j] = base.integrality[j];
  p.row_coeffs = Eigen::MatrixXd::Zero(rows, cols);
  p.row_sense.assign(rows, RowSense::Equal);
  p.rhs = Eigen::VectorXd::Zero(rows);
  if (r0 > 0) {
    p.row_coeffs.topLeftCorner(r0, n0) = base.row_coeffs;
    p.rhs.head(r0) = base.rhs;
    for (int i = 0; i < r0; ++i) p.row_sense[i] = base.row_sense[i];
  }
  for (const auto& [row, delta] : scen.rhs_delta) {
    if (row < 0 || row >= r0) throw MalformedProblem("scenario rhs delta row out of range");
    p.rhs[row] += delta;
  }
  for (const auto& [var, delta] : scen.obj_delta) {
    if (var < 0 || var >= n0) throw MalformedProblem("scenario obj delta var out of range");
    p.objective[var] += delta;
  }

  // epigraph variable
  p.objective[out.alpha_col] = 1.0;
  p.lower[out.alpha_col] = pool.floor;
  p.upper[out.alpha_col] = kInf;

  int row = r0;
  if (incoming) {
    out.copy_row_begin = row;
    for (int j = 0; j < dc; ++j, ++row) {
      p.row_coeffs(row, templ.copy_vars[j]) = 1.0;
      p.row_sense[row] = RowSense::Equal;
      p.rhs[row] = (*incoming)[j];
    }
  }

  int col = n0 + 1;
  for (int i : kept) {
    const Cut& c = pool.cuts[i];
    AssembledStage::EncodedCut enc;
    enc.pool_index = i;
    const double intercept = c.value - c.slope.dot(c.center);
    if (c.opening > 0.0 && d > 0) {
      enc.gadget = true;
      enc.u_col0 = col;
      enc.z_col0 = col + 2 * d;
      for (int j = 0; j < d; ++j) {
        const double big_m = templ.state_hi[j] - templ.state_lo[j];
        const int up = col + 2 * j, un = col + 2 * j + 1, zb = enc.z_col0 + j;
        p.lower[up] = 0.0;
        p.upper[up] = big_m;
        p.lower[un] = 0.0;
        p.upper[un] = big_m;
        p.lower[zb] = 0.0;
        p.upper[zb] = 1.0;
        p.integrality[zb] = true;
        // u+ - u- = x - center
        p.row_coeffs(row, up) = 1.0;
        p.row_coeffs(row, un) = -1.0;
        p.row_coeffs(row, templ.state_vars[j]) = -1.0;
        p.row_sense[row] = RowSense::Equal;
        p.rhs[row] = -c.center[j];
        ++row;
        // u+ <= M z
        p.row_coeffs(row, up) = 1.0;
        p.row_coeffs(row, zb) = -big_m;
        p.row_sense[row] = RowSense::LessEqual;
        p.rhs[row] = 0.0;
        ++row;
        // u- <= M (1 - z)
        p.row_coeffs(row, un) = 1.0;
        p.row_coeffs(row, zb) = big_m;
        p.row_sense[row] = RowSense::LessEqual;
        p.rhs[row] = big_m;
        ++row;
      }
      // alpha - slope'x + rho * sum(u+ + u-) >= value - slope'center
      p.row_coeffs(row, out.alpha_col) = 1.0;
      for (int j = 0; j < d; ++j) {
        p.row_coeffs(row, templ.state_vars[j]) -= c.slope[j];
        p.row_coeffs(row, col + 2 * j) += c.opening;
        p.row_coeffs(row, col + 2 * j + 1) += c.opening;
      }
      p.row_sense[row] = RowSense::GreaterEqual;
      p.rhs[row] = intercept;
      enc.epi_row = row;
      ++row;
      col += 3 * d;
    } else {
      // linear cut: alpha - slope'x >= value - slope'center
      p.row_coeffs(row, out.alpha_col) = 1.0;
      for (int j = 0; j < d; ++j) p.row_coeffs(row, templ.state_vars[j]) -= c.slope[j];
      p.row_sense[row] = RowSense::GreaterEqual;
      p.rhs[row] = intercept;
      enc.epi_row = row;
      ++row;
    }
    out.encoded.push_back(enc);
  }
  return out;
}

}  // namespace

AssembledStage assemble_stage(const StageTemplate& templ, const Scenario& scen,
                              const Eigen::VectorXd& incoming, const CutPool& pool) {
  return assemble_core(templ, scen, &incoming, pool);
}

StageSolution solve_stage(const StageTemplate& templ, const Scenario& scen,
                          const Eigen::VectorXd& incoming, const CutPool& pool,
                          const SolverOptions& opts, bool want_duals) {
  AssembledStage a = assemble_stage(templ, scen, incoming, pool);
  MilpSolution sol = solve_milp(a.milp, opts);
  if (sol.status == SolveStatus::Infeasible)
    throw StageInfeasible("stage problem infeasible (recourse violation) at stage " +
                              std::to_string(pool.stage) + ", node " +
                              std::to_string(pool.node),
                          pool.stage, pool.node);
  if (sol.status == SolveStatus::Unbounded)
    throw Error("stage problem unbounded; check bounds and floors");

  StageSolution out;
  out.primal = sol.primal;
  out.objective = sol.objective;
  out.alpha = sol.primal[a.alpha_col];
  out.bnb_nodes = sol.node_count;
  const int d = static_cast<int>(templ.state_vars.size());
  out.state.resize(d);
  for (int j = 0; j < d; ++j) out.state[j] = sol.primal[templ.state_vars[j]];

  // Post-solve invariants: the gadget recovers the exact L1 distance and the
  // epigraph equals the pool value at the outgoing state.
  for (const auto& enc : a.encoded) {
    if (!enc.gadget) continue;
    const Cut& c = pool.cuts[enc.pool_index];
    double usum = 0.0;
    for (int j = 0; j < 2 * d; ++j) usum += sol.primal[enc.u_col0 + j];
    const double norm = (out.state - c.center).lpNorm<1>();
    if (std::abs(usum - norm) > 1e-6)
      throw Error("absolute-value encoding violated at a stage optimum");
  }
  const double pool_val = evaluate_pool(pool, out.state);
  if (std::abs(out.alpha - pool_val) > 1e-6)
    throw Error("epigraph value disagrees with the cut pool at the stage optimum");

  if (want_duals) {
    Eigen::VectorXd lo = a.milp.lower, hi = a.milp.upper;
    for (int j = 0; j < a.milp.num_vars; ++j)
      if (a.milp.integrality[j])
        lo[j] = hi[j] = std::round(sol.primal[j]);
    LpSolution lp = solve_lp_with_bounds(a.milp, lo, hi, opts);
    if (lp.status != SolveStatus::Optimal)
      throw Error("fixed-integer LP re-solve failed");
    out.copy_duals = lp.duals.segment(a.copy_row_begin, a.num_copy);
  }
  return out;
}

double lagrangian_stage_value(const StageTemplate& templ, const Scenario& scen,
                              const CutPool& pool, const Eigen::VectorXd& center,
                              const Eigen::VectorXd& lambda, double rho,
                              const SolverOptions& opts) {
  const int dc = static_cast<int>(templ.copy_vars.size());
  if (lambda.size() != dc) throw MalformedProblem("multiplier dimension != copy dimension");
  if (center.size() != dc) throw MalformedProblem("center dimension != copy dimension");
  if (!(rho >= 0.0) || !lambda.allFinite())
    throw MalformedProblem("invalid augmented Lagrangian parameters");

  AssembledStage a = assemble_core(templ, scen, nullptr, pool);
  MilpProblem p = std::move(a.milp);
  for (int j = 0; j < dc; ++j) p.objective[templ.copy_vars[j]] -= lambda[j];

  if (rho > 0.0 && dc > 0) {
    // L1 term via nonnegative splits in the objective; no binaries needed
    // since the term is minimized with positive weight.
    const int n_old = p.num_vars, r_old = p.num_rows();
    p.num_vars += 2 * dc;
    p.objective.conservativeResize(p.num_vars);
    p.lower.conservativeResize(p.num_vars);
    p.upper.conservativeResize(p.num_vars);
    p.integrality.resize(p.num_vars, false);
    p.row_coeffs.conservativeResize(r_old + dc, p.num_vars);
    p.row_coeffs.rightCols(2 * dc).setZero();
    p.row_coeffs.bottomRows(dc).setZero();
    p.rhs.conservativeResize(r_old + dc);
    for (int j = 0; j < dc; ++j) {
      const int wp = n_old + 2 * j, wn = n_old + 2 * j + 1;
      p.objective[wp] = rho;
      p.objective[wn] = rho;
      p.lower[wp] = p.lower[wn] = 0.0;
      p.upper[wp] = p.upper[wn] = kInf;
      const int row = r_old + j;
      p.row_coeffs(row, wp) = 1.0;
      p.row_coeffs(row, wn) = -1.0;
      p.row_coeffs(row, templ.copy_vars[j]) = -1.0;
      p.row_sense.push_back(RowSense::Equal);
      p.rhs[row] = -center[j];
    }
  }

  MilpSolution sol = solve_milp(p, opts);
  if (sol.status == SolveStatus::Infeasible)
    throw StageInfeasible("copy-relaxed stage problem infeasible", pool.stage, pool.node);
  if (sol.status == SolveStatus::Unbounded)
    throw Error("copy-relaxed stage problem unbounded");
  return sol.objective + lambda.dot(center);
}

}  // namespace sldp
