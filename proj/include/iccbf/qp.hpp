// Small dense convex QP solver and the per-step safety-filter
// formulations (ICCBF-QP, CLF-ICCBF-QP with slack, minimal-deviation
// filter). Problems have at most 4 variables (u up to 3D plus one slack)
// and a handful of affine rows plus one input-norm bound.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace iccbf {

enum class InputSet {
  kScalarInterval,  // |u| <= u_max (1D)
  kEuclideanBall,   // ||u||_2 <= u_max
  kSupBox,          // ||u||_inf <= u_max
};

enum class QpStatus { kOptimal, kInfeasible, kSolverFailure };

struct QpProblem {
  // Objective 0.5 x' H x + g' x + c0 over x = (u [, eps]).
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double c0 = 0.0;
  int n_u = 0;             // leading control variables
  int slack_index = -1;    // index of eps, -1 if absent
  // Affine rows a' x >= b (includes CLF row in >= form, slack
  // nonnegativity, and box/interval bounds).
  Eigen::MatrixXd rows_a;  // one row per constraint
  Eigen::VectorXd rows_b;
  // 2-norm ball on the u block, if positive.
  double ball_radius = 0.0;
};

struct QpSolution {
  Eigen::VectorXd u;
  double eps = 0.0;
  QpStatus status = QpStatus::kSolverFailure;
  double kkt_residual = 0.0;
  double objective = 0.0;
  std::string detail;
};

// Global optimum of the convex program or an infeasibility certificate.
// Deterministic for identical inputs.
QpSolution solve(const QpProblem& problem);

constexpr double kQpFeasTol = 1e-8;
constexpr double kQpKktTol = 1e-6;

// One JSON line describing a solve, for the optional debug dump.
std::string describe_solve(const QpProblem& problem, const QpSolution& solution);

// Terminal ICCBF row data at the current state.
struct BarrierRow {
  Eigen::VectorXd lg;   // L_g b_N(x), one entry per control
  double lf = 0.0;      // L_f b_N(x)
  double b_value = 0.0; // b_N(x)
  double theta = 0.0;   // terminal gain theta_N
  double margin = 0.0;  // nu_hat
};

struct ClfRow {
  Eigen::VectorXd lg;   // L_g V(x)
  double lf = 0.0;      // L_f V(x)
  double v_value = 0.0; // V(x)
  double c_v = 0.0;
};

// min ||u||^2 subject to the barrier row and the input bound.
QpProblem build_iccbf_qp(const BarrierRow& row, InputSet input_set, double u_max);

// min 0.5||u||^2 + p eps^2 with the barrier row and the relaxed CLF row.
QpProblem build_clf_iccbf_qp(const BarrierRow& row, const ClfRow& clf, double slack_weight,
                             InputSet input_set, double u_max);

// min ||u - u_rl||^2 with several barrier rows and a box input bound.
QpProblem build_filter_qp(const std::vector<BarrierRow>& rows, const Eigen::VectorXd& u_rl,
                          double u_max);

}  // namespace iccbf
