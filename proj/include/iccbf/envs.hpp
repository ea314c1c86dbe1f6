// The three control-affine benchmark systems (cruise control, planar
// docking with a rotating port, 3D inspection under Clohessy-Wiltshire
// dynamics), ZOH propagation, hidden-parameter sampling and the state /
// thrust noise models.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "iccbf/qp.hpp"
#include "iccbf/taylor.hpp"

namespace iccbf {

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class EnvKind { kCruise, kDocking, kInspection };

// Standard Earth gravitational parameter, m^3/s^2.
constexpr double kMuEarth = 3.986004418e14;

struct CruiseParams {
  double m = 1650.0;      // kg
  double v0 = 13.89;      // lead vehicle speed, m/s
  double v_max = 24.0;    // target speed, m/s
  double u_max = 0.25;    // thrust bound, N
  double g0 = 9.81;       // control channel gain, m/s^2
};

struct DockingParams {
  double m = 1000.0;              // kg
  double R_C = 2.4;               // port ring radius, m
  double omega = 0.6 * M_PI / 180.0;  // port spin rate, rad/s
  double r = 6771e3;              // chief orbit radius, m
  double gamma = 10.0 * M_PI / 180.0; // LOS cone half angle, rad
  double u_max = 250.0;           // thrust bound, N

  double mean_motion() const { return std::sqrt(kMuEarth / (r * r * r)); }
};

struct InspectionParams {
  double m = 12.0;        // kg
  double R_D = 5.0;       // deputy radius, m
  double R_C = 10.0;      // chief radius, m
  double u_max = 1.0;     // per-axis thrust bound, N
  double r = 6771e3;      // chief orbit radius, m
  double R_max = 800.0;   // keep-in radius, m

  double mean_motion() const { return std::sqrt(kMuEarth / (r * r * r)); }
  double r_coll() const { return R_C + R_D; }
};

// Relative deviation delta_i per hidden parameter; draws are uniform in
// [(1 - delta) p, (1 + delta) p].
struct CruiseDeltas {
  double m = 0.20, v0 = 0.10, v_max = 0.20, u_max = 0.20, g0 = 0.0;
};
struct DockingDeltas {
  double m = 0.10, R_C = 0.10, omega = 0.10, r = 0.10, gamma = 0.10, u_max = 0.10;
};
struct InspectionDeltas {
  double m = 0.10, R_D = 0.10, R_C = 0.10, u_max = 0.10, r = 0.10, R_max = 0.10;
};

struct NoiseConfig {
  double sigma_r = 0.0;      // position noise per axis, m
  double sigma_v = 0.0;      // velocity noise per axis, m/s
  double sigma_u = 0.0;      // thrust magnitude noise, fraction
  double sigma_beta = 0.0;   // out-of-plane angle noise, rad
  double sigma_gamma = 0.0;  // in-plane angle noise, rad
};

// ---------------------------------------------------------------------
// Dynamics formulas, written once over a generic scalar type so the same
// code runs on doubles, TaylorPoly seeds and the test-side dual numbers.
// ---------------------------------------------------------------------

template <class T>
T cruise_resistive_force(const T& v) {
  return 0.1 + 5.0 * v + 0.25 * v * v;
}

// state [d, v]; returns [v0 - v, -F(v)/m] (control channel handled by g).
template <class T>
std::vector<T> cruise_drift(std::span<const T> x, const CruiseParams& p) {
  std::vector<T> out;
  out.reserve(2);
  out.push_back(p.v0 - x[1]);
  out.push_back(cruise_resistive_force(x[1]) * (-1.0 / p.m));
  return out;
}

// state [px, py, vx, vy, psi]: planar nonlinear relative motion about a
// circular chief orbit plus the port angle kinematics psi_dot = omega.
template <class T>
std::vector<T> docking_drift(std::span<const T> x, const DockingParams& p) {
  using std::pow;
  const double n = p.mean_motion();
  const double n2 = n * n;
  T rx = p.r + x[0];
  T rho2 = rx * rx + x[1] * x[1];
  T inv_rho3 = pow(rho2, -1.5);
  std::vector<T> out;
  out.reserve(5);
  out.push_back(x[2]);
  out.push_back(x[3]);
  out.push_back(2.0 * n * x[3] + n2 * rx - kMuEarth * rx * inv_rho3);
  out.push_back(-2.0 * n * x[2] + n2 * x[1] - kMuEarth * x[1] * inv_rho3);
  out.push_back(T(x[0]) * 0.0 + p.omega);
  return out;
}

// state [x, y, z, vx, vy, vz]: Clohessy-Wiltshire (Hill) equations.
template <class T>
std::vector<T> cw_drift(std::span<const T> x, const InspectionParams& p) {
  const double n = p.mean_motion();
  std::vector<T> out;
  out.reserve(6);
  out.push_back(x[3]);
  out.push_back(x[4]);
  out.push_back(x[5]);
  out.push_back(3.0 * n * n * x[0] + 2.0 * n * x[4]);
  out.push_back(-2.0 * n * x[3]);
  out.push_back(-n * n * x[2]);
  return out;
}

// Safety and goal functions. h >= 0 defines the safe set.

template <class T>
T cruise_h0(std::span<const T> x) {
  return x[0] - 1.8 * x[1];
}

template <class T>
T cruise_clf(std::span<const T> x, const CruiseParams& p) {
  T dv = x[1] - p.v_max;
  return dv * dv;
}

template <class T>
T docking_h0(std::span<const T> x, const DockingParams& p) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  T cp = cos(x[4]);
  T sp = sin(x[4]);
  T rx = x[0] - p.R_C * cp;
  T ry = x[1] - p.R_C * sp;
  T range = sqrt(rx * rx + ry * ry);
  return (rx * cp + ry * sp) / range - std::cos(p.gamma);
}

template <class T>
T docking_clf(std::span<const T> x, const DockingParams& p) {
  using std::cos;
  using std::sin;
  T rx = x[0] - p.R_C * cos(x[4]);
  T ry = x[1] - p.R_C * sin(x[4]);
  T ax = x[2] + rx * 0.1;
  T ay = x[3] + ry * 0.1;
  return ax * ax + ay * ay;
}

template <class T>
T inspection_h1(std::span<const T> x, const InspectionParams& p) {
  using std::sqrt;
  return sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) - p.r_coll();
}

template <class T>
T inspection_h2(std::span<const T> x, const InspectionParams& p) {
  using std::sqrt;
  return p.R_max - sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

// Boresight-sun angle barrier h3 = theta_b - alpha_fov/2: the sensor
// points from the deputy to the chief center, so theta_b is the angle
// between -r_hat and the sun direction.
template <class T>
T inspection_h3(std::span<const T> x, const Eigen::Vector3d& sun_dir, double alpha_fov) {
  using std::acos;
  using std::sqrt;
  T range = sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  T cos_tb = (x[0] * sun_dir[0] + x[1] * sun_dir[1] + x[2] * sun_dir[2]) * (-1.0) / range;
  return acos(cos_tb) - 0.5 * alpha_fov;
}

// ---------------------------------------------------------------------
// Type-erased system handle used by the barrier chain and the filters.
// All three benchmarks have state-independent control matrices.
// ---------------------------------------------------------------------

struct SystemModel {
  int n_states = 0;
  int n_controls = 0;
  InputSet input_set = InputSet::kScalarInterval;
  double u_max = 0.0;
  std::function<std::vector<double>(std::span<const double>)> drift;
  std::function<std::vector<TaylorPoly>(std::span<const TaylorPoly>)> drift_da;
  Eigen::MatrixXd g;  // n_states x n_controls

  std::vector<double> xdot(std::span<const double> x, const Eigen::VectorXd& u) const;
};

struct ScalarField {
  std::function<double(std::span<const double>)> value;
  std::function<TaylorPoly(std::span<const TaylorPoly>)> da;
};

template <class F>
ScalarField make_scalar_field(F f) {
  return ScalarField{
      [f](std::span<const double> x) -> double { return f(x); },
      [f](std::span<const TaylorPoly> x) -> TaylorPoly { return f(x); }};
}

SystemModel make_cruise_system(const CruiseParams& p);
SystemModel make_docking_system(const DockingParams& p);
SystemModel make_inspection_system(const InspectionParams& p);

ScalarField make_cruise_h0_field();
ScalarField make_cruise_clf_field(const CruiseParams& p);
ScalarField make_docking_h0_field(const DockingParams& p);
ScalarField make_docking_clf_field(const DockingParams& p);
ScalarField make_inspection_h1_field(const InspectionParams& p);
ScalarField make_inspection_h2_field(const InspectionParams& p);
ScalarField make_inspection_h3_field(const Eigen::Vector3d& sun_dir, double alpha_fov);

// ---------------------------------------------------------------------
// ZOH propagation, parameter sampling, noise models.
// ---------------------------------------------------------------------

struct ZohResult {
  Eigen::VectorXd x_end;
  // All intermediate RK4 substep states including both endpoints, for
  // inter-sample safety audits.
  std::vector<Eigen::VectorXd> substates;
};

ZohResult propagate_zoh(const SystemModel& sys, const Eigen::VectorXd& x_k,
                        const Eigen::VectorXd& u_k, double T, int substeps);

using Rng = std::mt19937_64;

// Stream-stable seed derivation for (campaign seed, episode index).
uint64_t derive_seed(uint64_t campaign_seed, uint64_t stream_id);

double sample_uniform_factor(double delta, Rng& rng);
CruiseParams sample_hidden_params(const CruiseParams& nominal, const CruiseDeltas& d, Rng& rng);
DockingParams sample_hidden_params(const DockingParams& nominal, const DockingDeltas& d,
                                   Rng& rng);
InspectionParams sample_hidden_params(const InspectionParams& nominal,
                                      const InspectionDeltas& d, Rng& rng);

// Per-component standard deviations of the additive state noise.
Eigen::VectorXd state_noise_sigmas(EnvKind kind, const NoiseConfig& noise);

Eigen::VectorXd apply_state_noise(const Eigen::VectorXd& x, const Eigen::VectorXd& sigmas,
                                  Rng& rng);

// Magnitude / angular perturbation of the commanded thrust with the final
// 2-norm clamp to u_max. Angles degenerate gracefully below 3 axes.
Eigen::VectorXd apply_thrust_noise(const Eigen::VectorXd& u_star, const NoiseConfig& noise,
                                   double u_max, Rng& rng);

}  // namespace iccbf
