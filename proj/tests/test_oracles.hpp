// Test-only oracles, kept independent of the solver paths they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sldp/milp.hpp"

namespace test_oracles {

using sldp::MilpProblem;
using sldp::RowSense;

// Carøe-Schultz second stage as a standalone problem in the four y variables,
// with the incoming state folded into the rhs. Continuous bounds by default.
inline MilpProblem caroe_second_stage_lp(const Eigen::VectorXd& x, double w1, double w2) {
  MilpProblem p;
  p.num_vars = 4;
  p.objective = Eigen::VectorXd(4);
  p.objective << -16.0, -19.0, -23.0, -28.0;
  p.row_coeffs = Eigen::MatrixXd(2, 4);
  p.row_coeffs << 2.0, 3.0, 4.0, 5.0, 6.0, 1.0, 3.0, 2.0;
  p.row_sense = {RowSense::LessEqual, RowSense::LessEqual};
  p.rhs = Eigen::VectorXd(2);
  p.rhs << w1 - x[0], w2 - x[1];
  p.lower = Eigen::VectorXd::Zero(4);
  p.upper = Eigen::VectorXd::Ones(4);
  p.integrality = {false, false, false, false};
  return p;
}

// Brute-force LP minimum by enumerating all candidate active sets (rows as
// equalities plus finite bounds). Only suitable for tiny, bounded LPs.
inline double vertex_enumeration_min(const MilpProblem& p) {
  const int n = p.num_vars;
  struct Plane {
    Eigen::VectorXd a;
    double b;
  };
  std::vector<Plane> planes;
  for (int i = 0; i < p.num_rows(); ++i)
    planes.push_back({p.row_coeffs.row(i).transpose(), p.rhs[i]});
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
    if (std::isfinite(p.lower[j])) planes.push_back({e, p.lower[j]});
    if (std::isfinite(p.upper[j])) planes.push_back({e, p.upper[j]});
  }
  const int m = static_cast<int>(planes.size());
  std::vector<int> pick(n);
  double best = std::numeric_limits<double>::infinity();

  const auto feasible = [&](const Eigen::VectorXd& x) {
    for (int i = 0; i < p.num_rows(); ++i) {
      const double lhs = p.row_coeffs.row(i).dot(x);
      const double tol = 1e-9 * (1.0 + std::abs(p.rhs[i]));
      switch (p.row_sense[i]) {
        case RowSense::LessEqual:
          if (lhs > p.rhs[i] + tol) return false;
          break;
        case RowSense::Equal:
          if (std::abs(lhs - p.rhs[i]) > tol) return false;
          break;
        case RowSense::GreaterEqual:
          if (lhs < p.rhs[i] - tol) return false;
          break;
      }
    }
    for (int j = 0; j < n; ++j)
      if (x[j] < p.lower[j] - 1e-9 || x[j] > p.upper[j] + 1e-9) return false;
    return true;
  };

  // iterate over all n-subsets of planes
  std::vector<int> idx(n);
  for (int j = 0; j < n; ++j) idx[j] = j;
  while (true) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (int j = 0; j < n; ++j) {
      a.row(j) = planes[idx[j]].a.transpose();
      b[j] = planes[idx[j]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(b);
      if (feasible(x)) best = std::min(best, p.objective.dot(x));
    }
    // next combination
    int j = n - 1;
    while (j >= 0 && idx[j] == m - n + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int k = j + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
  return best;
}

// Random desk-scale instance; a mix of integer and continuous variables with
// finite bounds, random rows and senses. Some draws are infeasible on purpose.
inline MilpProblem random_milp(std::mt19937_64& rng, bool force_continuous) {
  std::uniform_int_distribution<int> nd(3, 8), rd(2, 4), coef(-3, 3), rhsd(-4, 8);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  MilpProblem p;
  p.num_vars = nd(rng);
  const int n = p.num_vars;
  p.objective = Eigen::VectorXd(n);
  p.lower = Eigen::VectorXd(n);
  p.upper = Eigen::VectorXd(n);
  p.integrality.assign(n, false);
  for (int j = 0; j < n; ++j) {
    p.objective[j] = coef(rng);
    const bool is_int = !force_continuous && ud(rng) < 0.6;
    p.integrality[j] = is_int;
    if (is_int) {
      const int lo = std::uniform_int_distribution<int>(-2, 0)(rng);
      const int hi = std::uniform_int_distribution<int>(0, 3)(rng);
      p.lower[j] = lo;
      p.upper[j] = hi;
    } else {
      p.lower[j] = ud(rng) < 0.5 ? -5.0 : 0.0;
      p.upper[j] = ud(rng) < 0.5 ? 3.0 : 8.0;
    }
  }
  const int rows = rd(rng);
  p.row_coeffs = Eigen::MatrixXd(rows, n);
  p.rhs = Eigen::VectorXd(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < n; ++j) p.row_coeffs(i, j) = coef(rng);
    p.rhs[i] = rhsd(rng);
    const double u = ud(rng);
    p.row_sense.push_back(u < 0.5 ? RowSense::LessEqual
                                  : (u < 0.8 ? RowSense::GreaterEqual : RowSense::Equal));
  }
  return p;
}

// Optimality certificate: duality gap reconstructed from the returned row
// duals and sign-based bound picks.
inline double duality_gap(const MilpProblem& p, const sldp::LpSolution& s) {
  const Eigen::VectorXd& y = s.duals;
  double dual_obj = y.dot(p.rhs);
  const double tol = 1e-9;
  for (int j = 0; j < p.num_vars; ++j) {
    const double dj = p.objective[j] - p.row_coeffs.col(j).dot(y);
    if (dj > tol) {
      if (!std::isfinite(p.lower[j])) return sldp::kInf;
      dual_obj += dj * p.lower[j];
    } else if (dj < -tol) {
      if (!std::isfinite(p.upper[j])) return sldp::kInf;
      dual_obj += dj * p.upper[j];
    }
  }
  for (int i = 0; i < p.num_rows(); ++i) {
    const double ds = -y[i];  // slack reduced cost
    switch (p.row_sense[i]) {
      case RowSense::LessEqual:
        if (ds < -tol) return sldp::kInf;  // would need the +inf bound
        break;
      case RowSense::GreaterEqual:
        if (ds > tol) return sldp::kInf;
        break;
      case RowSense::Equal:
        break;
    }
  }
  return std::abs(s.objective - dual_obj);
}

}  // namespace test_oracles
