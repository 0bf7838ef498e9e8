#include <algorithm>
#include <cmath>

#include "sldp/milp.hpp"

namespace sldp {

void validate_problem(const MilpProblem& p, bool require_integer_bounds) {
  const int n = p.num_vars;
  if (n < 0) throw MalformedProblem("num_vars must be nonnegative");
  if (p.objective.size() != n) throw MalformedProblem("objective length != num_vars");
  if (p.lower.size() != n || p.upper.size() != n)
    throw MalformedProblem("bound vectors must have length num_vars");
  if (static_cast<int>(p.integrality.size()) != n)
    throw MalformedProblem("integrality flags must have length num_vars");
  if (p.row_coeffs.rows() != static_cast<Eigen::Index>(p.row_sense.size()) ||
      p.row_coeffs.rows() != p.rhs.size())
    throw MalformedProblem("row count mismatch between coefficients, senses and rhs");
  if (p.row_coeffs.cols() != n && p.num_rows() > 0)
    throw MalformedProblem("row coefficient length != num_vars");
  for (int j = 0; j < n; ++j) {
    if (std::isnan(p.lower[j]) || std::isnan(p.upper[j]))
      throw MalformedProblem("NaN bound");
    if (p.lower[j] > p.upper[j])
      throw MalformedProblem("lower > upper for variable " + std::to_string(j));
    if (p.integrality[j] && require_integer_bounds &&
        (!std::isfinite(p.lower[j]) || !std::isfinite(p.upper[j])))
      throw MalformedProblem("integer variable " + std::to_string(j) +
                             " must have finite bounds");
  }
}

namespace {

enum VStat : signed char { kLower = 0, kUpper = 1, kBasic = 2, kFreeZero = 3 };

// Bounded-variable primal simplex on the computational form [A I] X = b.
// Slack bounds encode the row sense; an explicit dense inverse of the basis
// is maintained and refactorized periodically.
class Simplex {
 public:
  Simplex(const MilpProblem& p, const Eigen::VectorXd& lo, const Eigen::VectorXd& up,
          const SolverOptions& opts)
      : p_(p), opts_(opts), m_(p.num_rows()), n_(p.num_vars), big_(n_ + m_) {
    lo_.resize(big_);
    up_.resize(big_);
    lo_.head(n_) = lo;
    up_.head(n_) = up;
    for (int i = 0; i < m_; ++i) {
      switch (p.row_sense[i]) {
        case RowSense::LessEqual:
          lo_[n_ + i] = 0.0;
          up_[n_ + i] = kInf;
          break;
        case RowSense::Equal:
          lo_[n_ + i] = 0.0;
          up_[n_ + i] = 0.0;
          break;
        case RowSense::GreaterEqual:
          lo_[n_ + i] = -kInf;
          up_[n_ + i] = 0.0;
          break;
      }
    }
    cost_ = Eigen::VectorXd::Zero(big_);
    cost_.head(n_) = p.objective;
  }

  LpSolution solve() {
    init_basis();
    LpSolution out;
    const long iter_cap = 200000 + 200L * big_;
    long iter = 0;
    bool retried_infeasible = false;
    while (true) {
      if (++iter > iter_cap) throw Error("simplex iteration limit reached");
      const bool phase1 = any_infeasible();
      price(phase1);
      const int j = choose_entering();
      if (j < 0) {
        if (!phase1) break;  // optimal and feasible
        // Phase-1 optimum with residual infeasibility: refresh the factors
        // once to rule out drift, then declare infeasibility.
        if (!retried_infeasible) {
          retried_infeasible = true;
          factorize();
          compute_basic_values();
          continue;
        }
        out.status = SolveStatus::Infeasible;
        return out;
      }
      if (!step(j, phase1)) {
        out.status = SolveStatus::Unbounded;
        return out;
      }
    }
    out.status = SolveStatus::Optimal;
    out.primal = xval_.head(n_);
    out.objective = p_.objective.dot(out.primal);
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
    out.duals = binv_.transpose() * cb;
    return out;
  }

 private:
  Eigen::VectorXd column(int j) const {
    if (j < n_) return p_.row_coeffs.col(j);
    return Eigen::VectorXd::Unit(m_, j - n_);
  }

  double bound_value(int j) const {
    switch (stat_[j]) {
      case kLower: return lo_[j];
      case kUpper: return up_[j];
      default: return 0.0;  // free at zero
    }
  }

  void init_basis() {
    stat_.assign(big_, kLower);
    basic_.resize(m_);
    xval_ = Eigen::VectorXd::Zero(big_);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j]))
        stat_[j] = kLower;
      else if (std::isfinite(up_[j]))
        stat_[j] = kUpper;
      else
        stat_[j] = kFreeZero;
      xval_[j] = bound_value(j);
    }
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      stat_[n_ + i] = kBasic;
    }
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    compute_basic_values();
    pivots_since_factor_ = 0;
    degenerate_pivots_ = 0;
    bland_ = false;
  }

  void factorize() {
    if (m_ == 0) return;
    Eigen::MatrixXd b(m_, m_);
    for (int i = 0; i < m_; ++i) b.col(i) = column(basic_[i]);
    binv_ = b.partialPivLu().inverse();
    if (!binv_.allFinite()) throw Error("singular basis encountered");
    pivots_since_factor_ = 0;
  }

  void compute_basic_values() {
    Eigen::VectorXd r = p_.rhs;
    if (m_ > 0 && n_ > 0) {
      Eigen::VectorXd xn = Eigen::VectorXd::Zero(n_);
      for (int j = 0; j < n_; ++j)
        if (stat_[j] != kBasic) xn[j] = xval_[j] = bound_value(j);
      r.noalias() -= p_.row_coeffs * xn;
    }
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      if (stat_[s] != kBasic) {
        xval_[s] = bound_value(s);
        r[i] -= xval_[s];
      }
    }
    if (m_ > 0) {
      Eigen::VectorXd xb = binv_ * r;
      for (int i = 0; i < m_; ++i) xval_[basic_[i]] = xb[i];
    }
  }

  double viol_tol(int j) const {
    const double s = std::min(std::isfinite(lo_[j]) ? std::abs(lo_[j]) : 0.0,
                              std::isfinite(up_[j]) ? std::abs(up_[j]) : 0.0);
    return opts_.feas_tol * (1.0 + s);
  }

  bool any_infeasible() const {
    for (int i = 0; i < m_; ++i) {
      const int k = basic_[i];
      const double t = viol_tol(k);
      if (xval_[k] < lo_[k] - t || xval_[k] > up_[k] + t) return true;
    }
    return false;
  }

  void price(bool phase1) {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) {
      const int k = basic_[i];
      if (phase1) {
        const double t = viol_tol(k);
        if (xval_[k] < lo_[k] - t)
          cb[i] = -1.0;
        else if (xval_[k] > up_[k] + t)
          cb[i] = 1.0;
        else
          cb[i] = 0.0;
      } else {
        cb[i] = cost_[k];
      }
    }
    y_ = m_ > 0 ? Eigen::VectorXd(binv_.transpose() * cb) : Eigen::VectorXd(0);
    dj_.resize(big_);
    if (n_ > 0) {
      dj_.head(n_) = (phase1 ? Eigen::VectorXd(Eigen::VectorXd::Zero(n_))
                             : Eigen::VectorXd(cost_.head(n_)));
      if (m_ > 0) dj_.head(n_).noalias() -= p_.row_coeffs.transpose() * y_;
    }
    for (int i = 0; i < m_; ++i) dj_[n_ + i] = -y_[i];
  }

  // Returns entering column or -1; sets dir_.
  int choose_entering() {
    const double tol = 1e-9 * (1.0 + cost_.cwiseAbs().maxCoeff());
    int best = -1;
    double best_score = tol;
    for (int j = 0; j < big_; ++j) {
      if (stat_[j] == kBasic) continue;
      if (lo_[j] == up_[j]) continue;  // fixed
      double score = 0.0;
      int dir = 0;
      if (stat_[j] == kLower) {
        if (dj_[j] < -tol) { score = -dj_[j]; dir = 1; }
      } else if (stat_[j] == kUpper) {
        if (dj_[j] > tol) { score = dj_[j]; dir = -1; }
      } else {  // free at zero
        if (std::abs(dj_[j]) > tol) { score = std::abs(dj_[j]); dir = dj_[j] < 0 ? 1 : -1; }
      }
      if (dir == 0) continue;
      if (bland_) { dir_ = dir; return j; }
      if (score > best_score) {
        best_score = score;
        best = j;
        dir_ = dir;
      }
    }
    return best;
  }

  // One ratio-test step for entering column j. Returns false on unboundedness.
  bool step(int j, bool phase1) {
    Eigen::VectorXd w = m_ > 0 ? Eigen::VectorXd(binv_ * column(j)) : Eigen::VectorXd(0);
    const double sigma = dir_;

    double t_enter = kInf;
    if (stat_[j] == kLower && std::isfinite(up_[j])) t_enter = up_[j] - lo_[j];
    if (stat_[j] == kUpper && std::isfinite(lo_[j])) t_enter = up_[j] - lo_[j];

    double t_block = kInf;
    int leave_pos = -1;
    signed char leave_stat = kLower;
    double leave_w = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (std::abs(w[i]) <= 1e-11) continue;
      const double rate = -sigma * w[i];
      const int k = basic_[i];
      const double cur = xval_[k];
      const double t = viol_tol(k);
      double target = kInf;
      signed char tstat = kLower;
      if (phase1 && cur < lo_[k] - t) {
        if (rate > 0) { target = lo_[k]; tstat = kLower; }
      } else if (phase1 && cur > up_[k] + t) {
        if (rate < 0) { target = up_[k]; tstat = kUpper; }
      } else {
        if (rate > 0 && std::isfinite(up_[k])) { target = up_[k]; tstat = kUpper; }
        if (rate < 0 && std::isfinite(lo_[k])) { target = lo_[k]; tstat = kLower; }
      }
      if (!std::isfinite(target)) continue;
      double ratio = (target - cur) / rate;
      if (ratio < 0) ratio = 0;
      const bool better =
          ratio < t_block - 1e-12 ||
          (ratio < t_block + 1e-12 &&
           (bland_ ? (leave_pos < 0 || k < basic_[leave_pos])
                   : std::abs(w[i]) > std::abs(leave_w)));
      if (better) {
        t_block = ratio;
        leave_pos = i;
        leave_stat = tstat;
        leave_w = w[i];
      }
    }

    if (!std::isfinite(t_block) && !std::isfinite(t_enter)) {
      if (phase1) throw Error("phase-1 ratio test found no blocking bound");
      return false;  // unbounded
    }

    const bool flip = t_enter <= t_block;
    const double tstep = flip ? t_enter : t_block;

    xval_[j] = (stat_[j] == kBasic ? xval_[j] : bound_value(j)) + sigma * tstep;
    for (int i = 0; i < m_; ++i) xval_[basic_[i]] -= sigma * w[i] * tstep;

    if (flip) {
      stat_[j] = sigma > 0 ? kUpper : kLower;
      xval_[j] = bound_value(j);
    } else {
      const int r = leave_pos;
      const double piv = w[r];
      if (std::abs(piv) < 1e-9 && pivots_since_factor_ > 0) {
        // Numerically unsafe pivot: rebuild the factors and retry the whole
        // iteration from scratch.
        factorize();
        compute_basic_values();
        return true;
      }
      if (std::abs(piv) < 1e-12) throw Error("numerically singular pivot");
      const int lv = basic_[r];
      stat_[lv] = leave_stat;
      xval_[lv] = leave_stat == kLower ? lo_[lv] : up_[lv];
      basic_[r] = j;
      stat_[j] = kBasic;
      Eigen::VectorXd wmask = w;
      wmask[r] = 0.0;
      binv_.row(r) /= piv;
      binv_.noalias() -= wmask * binv_.row(r);
      if (++pivots_since_factor_ >= 64) {
        factorize();
        compute_basic_values();
      }
    }

    if (tstep <= 1e-12 && ++degenerate_pivots_ > 2 * big_) bland_ = true;
    return true;
  }

  const MilpProblem& p_;
  SolverOptions opts_;
  int m_, n_, big_;
  Eigen::VectorXd lo_, up_, cost_, xval_, y_, dj_;
  std::vector<signed char> stat_;
  std::vector<int> basic_;
  Eigen::MatrixXd binv_;
  int dir_ = 1;
  int pivots_since_factor_ = 0;
  long degenerate_pivots_ = 0;
  bool bland_ = false;
};

}  // namespace

LpSolution solve_lp_with_bounds(const MilpProblem& p, const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, const SolverOptions& opts) {
  Simplex s(p, lower, upper, opts);
  return s.solve();
}

LpSolution solve_lp(const MilpProblem& p, const SolverOptions& opts) {
  validate_problem(p);
  return solve_lp_with_bounds(p, p.lower, p.upper, opts);
}

}  // namespace sldp
