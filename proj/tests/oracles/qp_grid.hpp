// Independent reference minimizer for the tiny safety-filter QPs: a
// dense coarse grid over the input set followed by walk-and-shrink
// pattern search (full 3^m - 1 stencil). The slack variable is
// eliminated in closed form. Infeasible points score +inf, so the
// search never leaves the feasible set; seeds include the most-feasible
// point of each row so thin feasible slivers are not missed.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "iccbf/qp.hpp"

namespace iccbf::testing {

struct GridResult {
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u;
  bool feasible = false;
};

// Optimal eps for fixed u: the slack enters rows with coefficient one and
// the objective as p*eps^2, so eps* = max(0, largest row violation).
inline double slack_for(const iccbf::QpProblem& p, const Eigen::VectorXd& u) {
  if (p.slack_index < 0) return 0.0;
  double eps = 0.0;
  for (int i = 0; i < p.rows_a.rows(); ++i) {
    const double a_eps = p.rows_a(i, p.slack_index);
    if (a_eps <= 0.0) continue;
    double au = 0.0;
    for (int k = 0; k < p.n_u; ++k) au += p.rows_a(i, k) * u[k];
    eps = std::max(eps, (p.rows_b[i] - au) / a_eps);
  }
  return eps;
}

inline bool grid_feasible(const iccbf::QpProblem& p, const Eigen::VectorXd& x, double tol) {
  for (int i = 0; i < p.rows_a.rows(); ++i) {
    if (p.rows_a.row(i).dot(x) < p.rows_b[i] - tol) return false;
  }
  if (p.ball_radius > 0.0 && x.head(p.n_u).norm() > p.ball_radius + tol) return false;
  return true;
}

inline double grid_objective(const iccbf::QpProblem& p, const Eigen::VectorXd& u) {
  const int n = static_cast<int>(p.g.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x.head(p.n_u) = u;
  if (p.slack_index >= 0) x[p.slack_index] = slack_for(p, u);
  if (!grid_feasible(p, x, 1e-12)) return std::numeric_limits<double>::infinity();
  return 0.5 * x.dot(p.H * x) + p.g.dot(x) + p.c0;
}

inline void grid_consider(const iccbf::QpProblem& p, const Eigen::VectorXd& u,
                          GridResult& best) {
  const double obj = grid_objective(p, u);
  if (obj < best.objective) {
    best.objective = obj;
    best.u = u;
    best.feasible = true;
  }
}

inline void grid_scan(const iccbf::QpProblem& p, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi, int pts, GridResult& best) {
  const int m = p.n_u;
  Eigen::VectorXd u(m);
  std::vector<int> idx(m, 0);
  while (true) {
    for (int k = 0; k < m; ++k) {
      u[k] = pts == 1 ? lo[k] : lo[k] + (hi[k] - lo[k]) * idx[k] / double(pts - 1);
    }
    grid_consider(p, u, best);
    int c = 0;
    while (c < m && ++idx[c] == pts) idx[c++] = 0;
    if (c == m) break;
  }
}

// Coarse dense scan, feasibility seeds, then pattern search shrinking the
// step from 0.25*u_max down to ~1e-8*u_max.
inline GridResult grid_minimize(const iccbf::QpProblem& p, double u_max, int pts = 101) {
  const int m = p.n_u;
  GridResult best;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, -u_max);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(m, u_max);
  grid_scan(p, lo, hi, pts, best);

  grid_consider(p, Eigen::VectorXd::Zero(m), best);
  for (int i = 0; i < p.rows_a.rows(); ++i) {
    Eigen::VectorXd a = p.rows_a.row(i).head(m).transpose();
    const double an = a.norm();
    if (an < 1e-14) continue;
    // Least-norm point on the row boundary and the most-feasible point of
    // the input set for this row.
    Eigen::VectorXd proj = a * (p.rows_b[i] / (an * an));
    grid_consider(p, proj, best);
    Eigen::VectorXd extreme(m);
    if (p.ball_radius > 0.0) {
      extreme = a * (p.ball_radius / an);
    } else {
      for (int k = 0; k < m; ++k) extreme[k] = a[k] >= 0.0 ? u_max : -u_max;
    }
    grid_consider(p, extreme, best);
  }
  if (!best.feasible) return best;

  // Walk-and-shrink pattern search over the full 3^m - 1 stencil.
  double step = 0.25 * u_max;
  while (step > 1e-8 * u_max) {
    bool improved = true;
    int walk_budget = 4000;
    while (improved && walk_budget-- > 0) {
      improved = false;
      Eigen::VectorXd trial = best.u;
      std::vector<int> d(m, -1);
      while (true) {
        bool all_zero = true;
        for (int k = 0; k < m; ++k) {
          trial[k] = best.u[k] + d[k] * step;
          if (d[k] != 0) all_zero = false;
        }
        if (!all_zero) {
          const double obj = grid_objective(p, trial);
          if (obj < best.objective - 1e-300) {
            best.objective = obj;
            best.u = trial;
            improved = true;
            break;
          }
        }
        int c = 0;
        while (c < m && ++d[c] == 2) d[c++] = -1;
        if (c == m) break;
      }
    }
    step *= 0.4;
  }
  return best;
}

}  // namespace iccbf::testing
