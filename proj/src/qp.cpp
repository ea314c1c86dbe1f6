#include "iccbf/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "json.hpp"

namespace iccbf {

namespace {

constexpr double kDualTol = 1e-9;

struct Candidate {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // per row, zero for inactive rows
  double objective = 0.0;
};

double objective_of(const QpProblem& p, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(p.H * x) + p.g.dot(x) + p.c0;
}

// Solve min 0.5 x'Hx + g'x with the rows in `active` tight, H PD.
// Returns x and the active-row multipliers, or nullopt if the KKT
// system is singular (dependent rows).
std::optional<Candidate> solve_eq_kkt(const QpProblem& p, const Eigen::MatrixXd& H,
                                      const std::vector<int>& active) {
  const int n = static_cast<int>(p.g.size());
  const int m = static_cast<int>(active.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
  Eigen::VectorXd rhs(n + m);
  kkt.topLeftCorner(n, n) = H;
  rhs.head(n) = -p.g;
  for (int k = 0; k < m; ++k) {
    kkt.block(n + k, 0, 1, n) = p.rows_a.row(active[k]);
    kkt.block(0, n + k, n, 1) = -p.rows_a.row(active[k]).transpose();
    rhs[n + k] = p.rows_b[active[k]];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::VectorXd sol = lu.solve(rhs);
  Candidate c;
  c.x = sol.head(n);
  c.lambda = Eigen::VectorXd::Zero(p.rows_a.rows());
  for (int k = 0; k < m; ++k) c.lambda[active[k]] = sol[n + k];
  return c;
}

bool primal_feasible(const QpProblem& p, const Eigen::VectorXd& x, double tol) {
  for (int i = 0; i < p.rows_a.rows(); ++i) {
    if (p.rows_a.row(i).dot(x) < p.rows_b[i] - tol) return false;
  }
  return true;
}

// Exhaustive active-set search: every subset of at most n rows is a
// candidate working set. With H positive definite this is complete, so
// an empty candidate list certifies infeasibility.
std::optional<Candidate> solve_polyhedral(const QpProblem& p, const Eigen::MatrixXd& H) {
  const int n = static_cast<int>(p.g.size());
  const int n_rows = static_cast<int>(p.rows_a.rows());
  const double ftol = kQpFeasTol;

  std::optional<Candidate> best;
  std::vector<int> active;
  // Subsets enumerated by bitmask; popcount limited to n.
  for (uint32_t mask = 0; mask < (1u << n_rows); ++mask) {
    if (std::popcount(mask) > n) continue;
    active.clear();
    for (int i = 0; i < n_rows; ++i) {
      if (mask & (1u << i)) active.push_back(i);
    }
    auto cand = solve_eq_kkt(p, H, active);
    if (!cand) continue;
    bool dual_ok = true;
    for (int i : active) {
      if (cand->lambda[i] < -kDualTol * (1.0 + std::abs(cand->lambda[i]))) {
        dual_ok = false;
        break;
      }
    }
    if (!dual_ok || !primal_feasible(p, cand->x, ftol)) continue;
    cand->objective = objective_of(p, cand->x);
    if (!best || cand->objective < best->objective) best = std::move(cand);
  }
  return best;
}

double kkt_residual(const QpProblem& p, const Candidate& c, double ball_lambda) {
  Eigen::VectorXd grad = p.H * c.x + p.g;
  for (int i = 0; i < p.rows_a.rows(); ++i) {
    grad -= c.lambda[i] * p.rows_a.row(i).transpose();
  }
  if (ball_lambda != 0.0) {
    grad.head(p.n_u) += 2.0 * ball_lambda * c.x.head(p.n_u);
  }
  double res = grad.lpNorm<Eigen::Infinity>();
  for (int i = 0; i < p.rows_a.rows(); ++i) {
    const double slack = p.rows_a.row(i).dot(c.x) - p.rows_b[i];
    res = std::max(res, std::abs(c.lambda[i] * slack));
    res = std::max(res, std::max(0.0, -slack));
    res = std::max(res, std::max(0.0, -c.lambda[i]));
  }
  if (p.ball_radius > 0.0) {
    const double un = c.x.head(p.n_u).norm();
    res = std::max(res, std::max(0.0, un - p.ball_radius));
    res = std::max(res, std::abs(ball_lambda * (un * un - p.ball_radius * p.ball_radius)));
  }
  return res;
}

}  // namespace

QpSolution solve(const QpProblem& problem) {
  QpSolution out;
  const int n = static_cast<int>(problem.g.size());
  if (n == 0 || problem.H.rows() != n || problem.H.cols() != n ||
      problem.rows_a.cols() != n) {
    out.status = QpStatus::kSolverFailure;
    out.detail = "malformed problem";
    return out;
  }

  auto finish = [&](const Candidate& c, double ball_lambda) {
    out.u = c.x.head(problem.n_u);
    out.eps = problem.slack_index >= 0 ? c.x[problem.slack_index] : 0.0;
    out.objective = objective_of(problem, c.x);
    out.kkt_residual = kkt_residual(problem, c, ball_lambda);
    out.status = QpStatus::kOptimal;
    if (!out.u.allFinite() || !std::isfinite(out.objective) ||
        out.kkt_residual > kQpKktTol) {
      out.status = QpStatus::kSolverFailure;
      out.detail = "kkt residual check failed";
    }
  };

  auto base = solve_polyhedral(problem, problem.H);
  if (problem.ball_radius <= 0.0) {
    if (!base) {
      out.status = QpStatus::kInfeasible;
      return out;
    }
    finish(*base, 0.0);
    return out;
  }

  // 2-norm ball on the u block: 1D dual search over the ball multiplier.
  // ||u(lambda)|| is nonincreasing in lambda, so bisection applies.
  const double r = problem.ball_radius;
  if (!base) {
    out.status = QpStatus::kInfeasible;
    return out;
  }
  if (base->x.head(problem.n_u).norm() <= r * (1.0 + 1e-12)) {
    finish(*base, 0.0);
    return out;
  }

  auto solve_at = [&](double lambda) -> std::optional<Candidate> {
    Eigen::MatrixXd H = problem.H;
    H.topLeftCorner(problem.n_u, problem.n_u) +=
        2.0 * lambda * Eigen::MatrixXd::Identity(problem.n_u, problem.n_u);
    return solve_polyhedral(problem, H);
  };

  double lo = 0.0, hi = 1.0;
  std::optional<Candidate> at_hi;
  for (int it = 0; it < 120; ++it) {
    at_hi = solve_at(hi);
    if (!at_hi) {
      out.status = QpStatus::kInfeasible;
      return out;
    }
    if (at_hi->x.head(problem.n_u).norm() <= r) break;
    lo = hi;
    hi *= 8.0;
    if (hi > 1e18) {
      // Minimum-norm point of the row polyhedron lies outside the ball.
      out.status = QpStatus::kInfeasible;
      return out;
    }
  }
  Candidate final_cand = *at_hi;
  double final_lambda = hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto cand = solve_at(mid);
    if (!cand) {
      out.status = QpStatus::kInfeasible;
      return out;
    }
    if (cand->x.head(problem.n_u).norm() <= r) {
      hi = mid;
      final_cand = std::move(*cand);
      final_lambda = mid;
    } else {
      lo = mid;
    }
  }
  finish(final_cand, final_lambda);
  return out;
}

std::string describe_solve(const QpProblem& problem, const QpSolution& solution) {
  nlohmann::json j;
  j["n_u"] = problem.n_u;
  j["ball_radius"] = problem.ball_radius;
  auto rows = nlohmann::json::array();
  for (int i = 0; i < problem.rows_a.rows(); ++i) {
    auto a = nlohmann::json::array();
    for (int k = 0; k < problem.rows_a.cols(); ++k) a.push_back(problem.rows_a(i, k));
    rows.push_back({{"a", a}, {"b", problem.rows_b[i]}});
  }
  j["rows"] = rows;
  switch (solution.status) {
    case QpStatus::kOptimal: j["status"] = "optimal"; break;
    case QpStatus::kInfeasible: j["status"] = "infeasible"; break;
    case QpStatus::kSolverFailure: j["status"] = "solver_failure"; break;
  }
  auto u = nlohmann::json::array();
  for (int i = 0; i < solution.u.size(); ++i) u.push_back(solution.u[i]);
  j["u_star"] = u;
  j["eps"] = solution.eps;
  j["kkt_residual"] = solution.kkt_residual;
  j["objective"] = solution.objective;
  return j.dump();
}

namespace {

void append_input_rows(QpProblem& p, InputSet input_set, double u_max) {
  if (input_set == InputSet::kEuclideanBall && p.n_u > 1) {
    p.ball_radius = u_max;
    return;
  }
  // Scalar interval and sup box expand to per-axis rows; a 1D ball is the
  // same interval.
  const int n = static_cast<int>(p.g.size());
  const int start = static_cast<int>(p.rows_a.rows());
  p.rows_a.conservativeResize(start + 2 * p.n_u, n);
  p.rows_b.conservativeResize(start + 2 * p.n_u);
  for (int i = 0; i < p.n_u; ++i) {
    p.rows_a.row(start + 2 * i).setZero();
    p.rows_a(start + 2 * i, i) = 1.0;
    p.rows_b[start + 2 * i] = -u_max;
    p.rows_a.row(start + 2 * i + 1).setZero();
    p.rows_a(start + 2 * i + 1, i) = -1.0;
    p.rows_b[start + 2 * i + 1] = -u_max;
  }
}

void append_barrier_row(QpProblem& p, const BarrierRow& row) {
  const int n = static_cast<int>(p.g.size());
  const int i = static_cast<int>(p.rows_a.rows());
  p.rows_a.conservativeResize(i + 1, n);
  p.rows_b.conservativeResize(i + 1);
  p.rows_a.row(i).setZero();
  p.rows_a.row(i).head(row.lg.size()) = row.lg.transpose();
  p.rows_b[i] = row.margin - row.lf - row.theta * row.b_value;
}

}  // namespace

QpProblem build_iccbf_qp(const BarrierRow& row, InputSet input_set, double u_max) {
  QpProblem p;
  const int m = static_cast<int>(row.lg.size());
  p.n_u = m;
  p.H = 2.0 * Eigen::MatrixXd::Identity(m, m);
  p.g = Eigen::VectorXd::Zero(m);
  p.rows_a.resize(0, m);
  p.rows_b.resize(0);
  append_barrier_row(p, row);
  append_input_rows(p, input_set, u_max);
  return p;
}

QpProblem build_clf_iccbf_qp(const BarrierRow& row, const ClfRow& clf, double slack_weight,
                             InputSet input_set, double u_max) {
  QpProblem p;
  const int m = static_cast<int>(row.lg.size());
  const int n = m + 1;
  p.n_u = m;
  p.slack_index = m;
  p.H = Eigen::MatrixXd::Zero(n, n);
  p.H.topLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
  p.H(m, m) = 2.0 * slack_weight;
  p.g = Eigen::VectorXd::Zero(n);
  p.rows_a.resize(0, n);
  p.rows_b.resize(0);
  append_barrier_row(p, row);
  // CLF row L_f V + L_g V u <= -c_V V + eps, relaxed by the slack.
  {
    const int i = static_cast<int>(p.rows_a.rows());
    p.rows_a.conservativeResize(i + 1, n);
    p.rows_b.conservativeResize(i + 1);
    p.rows_a.row(i).setZero();
    p.rows_a.row(i).head(m) = -clf.lg.transpose();
    p.rows_a(i, m) = 1.0;
    p.rows_b[i] = clf.lf + clf.c_v * clf.v_value;
  }
  // eps >= 0
  {
    const int i = static_cast<int>(p.rows_a.rows());
    p.rows_a.conservativeResize(i + 1, n);
    p.rows_b.conservativeResize(i + 1);
    p.rows_a.row(i).setZero();
    p.rows_a(i, m) = 1.0;
    p.rows_b[i] = 0.0;
  }
  append_input_rows(p, input_set, u_max);
  return p;
}

QpProblem build_filter_qp(const std::vector<BarrierRow>& rows, const Eigen::VectorXd& u_rl,
                          double u_max) {
  QpProblem p;
  const int m = static_cast<int>(u_rl.size());
  p.n_u = m;
  p.H = 2.0 * Eigen::MatrixXd::Identity(m, m);
  p.g = -2.0 * u_rl;
  p.c0 = u_rl.squaredNorm();
  p.rows_a.resize(0, m);
  p.rows_b.resize(0);
  for (const auto& row : rows) append_barrier_row(p, row);
  append_input_rows(p, InputSet::kSupBox, u_max);
  return p;
}

}  // namespace iccbf
