#include "iccbf/envs.hpp"

#include <cmath>

namespace iccbf {

std::vector<double> SystemModel::xdot(std::span<const double> x,
                                      const Eigen::VectorXd& u) const {
  std::vector<double> dx = drift(x);
  for (int i = 0; i < n_states; ++i) {
    for (int j = 0; j < n_controls; ++j) dx[i] += g(i, j) * u[j];
  }
  return dx;
}

SystemModel make_cruise_system(const CruiseParams& p) {
  SystemModel sys;
  sys.n_states = 2;
  sys.n_controls = 1;
  sys.input_set = InputSet::kScalarInterval;
  sys.u_max = p.u_max;
  sys.drift = [p](std::span<const double> x) { return cruise_drift(x, p); };
  sys.drift_da = [p](std::span<const TaylorPoly> x) { return cruise_drift(x, p); };
  sys.g = Eigen::MatrixXd::Zero(2, 1);
  sys.g(1, 0) = p.g0;
  return sys;
}

SystemModel make_docking_system(const DockingParams& p) {
  SystemModel sys;
  sys.n_states = 5;
  sys.n_controls = 2;
  sys.input_set = InputSet::kEuclideanBall;
  sys.u_max = p.u_max;
  sys.drift = [p](std::span<const double> x) { return docking_drift(x, p); };
  sys.drift_da = [p](std::span<const TaylorPoly> x) { return docking_drift(x, p); };
  sys.g = Eigen::MatrixXd::Zero(5, 2);
  sys.g(2, 0) = 1.0 / p.m;
  sys.g(3, 1) = 1.0 / p.m;
  return sys;
}

SystemModel make_inspection_system(const InspectionParams& p) {
  SystemModel sys;
  sys.n_states = 6;
  sys.n_controls = 3;
  sys.input_set = InputSet::kSupBox;
  sys.u_max = p.u_max;
  sys.drift = [p](std::span<const double> x) { return cw_drift(x, p); };
  sys.drift_da = [p](std::span<const TaylorPoly> x) { return cw_drift(x, p); };
  sys.g = Eigen::MatrixXd::Zero(6, 3);
  for (int i = 0; i < 3; ++i) sys.g(3 + i, i) = 1.0 / p.m;
  return sys;
}

ScalarField make_cruise_h0_field() {
  return make_scalar_field([]<class T>(std::span<const T> x) { return cruise_h0(x); });
}

ScalarField make_cruise_clf_field(const CruiseParams& p) {
  return make_scalar_field([p]<class T>(std::span<const T> x) { return cruise_clf(x, p); });
}

ScalarField make_docking_h0_field(const DockingParams& p) {
  return make_scalar_field([p]<class T>(std::span<const T> x) { return docking_h0(x, p); });
}

ScalarField make_docking_clf_field(const DockingParams& p) {
  return make_scalar_field([p]<class T>(std::span<const T> x) { return docking_clf(x, p); });
}

ScalarField make_inspection_h1_field(const InspectionParams& p) {
  return make_scalar_field(
      [p]<class T>(std::span<const T> x) { return inspection_h1(x, p); });
}

ScalarField make_inspection_h2_field(const InspectionParams& p) {
  return make_scalar_field(
      [p]<class T>(std::span<const T> x) { return inspection_h2(x, p); });
}

ScalarField make_inspection_h3_field(const Eigen::Vector3d& sun_dir, double alpha_fov) {
  return make_scalar_field([sun_dir, alpha_fov]<class T>(std::span<const T> x) {
    return inspection_h3(x, sun_dir, alpha_fov);
  });
}

ZohResult propagate_zoh(const SystemModel& sys, const Eigen::VectorXd& x_k,
                        const Eigen::VectorXd& u_k, double T, int substeps) {
  if (substeps < 1) throw std::invalid_argument("propagate_zoh: substeps must be >= 1");
  const int n = sys.n_states;
  const double h = T / substeps;
  ZohResult out;
  out.substates.reserve(substeps + 1);
  Eigen::VectorXd x = x_k;
  out.substates.push_back(x);
  std::vector<double> buf(n);
  auto deriv = [&](const Eigen::VectorXd& xs) {
    std::vector<double> d = sys.xdot(std::span<const double>(xs.data(), n), u_k);
    return Eigen::Map<Eigen::VectorXd>(d.data(), n).eval();
  };
  for (int s = 0; s < substeps; ++s) {
    const Eigen::VectorXd k1 = deriv(x);
    const Eigen::VectorXd k2 = deriv(x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = deriv(x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = deriv(x + h * k3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw DivergenceError("propagate_zoh: non-finite state during integration");
    }
    out.substates.push_back(x);
  }
  out.x_end = x;
  return out;
}

uint64_t derive_seed(uint64_t campaign_seed, uint64_t stream_id) {
  // splitmix64 finalizer over the combined words.
  uint64_t z = campaign_seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double sample_uniform_factor(double delta, Rng& rng) {
  std::uniform_real_distribution<double> d(1.0 - delta, 1.0 + delta);
  return d(rng);
}

CruiseParams sample_hidden_params(const CruiseParams& nominal, const CruiseDeltas& d,
                                  Rng& rng) {
  CruiseParams p = nominal;
  p.m *= sample_uniform_factor(d.m, rng);
  p.v0 *= sample_uniform_factor(d.v0, rng);
  p.v_max *= sample_uniform_factor(d.v_max, rng);
  p.u_max *= sample_uniform_factor(d.u_max, rng);
  p.g0 *= sample_uniform_factor(d.g0, rng);
  return p;
}

DockingParams sample_hidden_params(const DockingParams& nominal, const DockingDeltas& d,
                                   Rng& rng) {
  DockingParams p = nominal;
  p.m *= sample_uniform_factor(d.m, rng);
  p.R_C *= sample_uniform_factor(d.R_C, rng);
  p.omega *= sample_uniform_factor(d.omega, rng);
  p.r *= sample_uniform_factor(d.r, rng);
  p.gamma *= sample_uniform_factor(d.gamma, rng);
  p.u_max *= sample_uniform_factor(d.u_max, rng);
  return p;
}

InspectionParams sample_hidden_params(const InspectionParams& nominal,
                                      const InspectionDeltas& d, Rng& rng) {
  InspectionParams p = nominal;
  p.m *= sample_uniform_factor(d.m, rng);
  p.R_D *= sample_uniform_factor(d.R_D, rng);
  p.R_C *= sample_uniform_factor(d.R_C, rng);
  p.u_max *= sample_uniform_factor(d.u_max, rng);
  p.r *= sample_uniform_factor(d.r, rng);
  p.R_max *= sample_uniform_factor(d.R_max, rng);
  return p;
}

Eigen::VectorXd state_noise_sigmas(EnvKind kind, const NoiseConfig& noise) {
  switch (kind) {
    case EnvKind::kCruise: {
      Eigen::VectorXd s(2);
      s << noise.sigma_r, noise.sigma_v;
      return s;
    }
    case EnvKind::kDocking: {
      Eigen::VectorXd s(5);
      s << noise.sigma_r, noise.sigma_r, noise.sigma_v, noise.sigma_v, 0.0;
      return s;
    }
    case EnvKind::kInspection: {
      Eigen::VectorXd s(6);
      s << noise.sigma_r, noise.sigma_r, noise.sigma_r, noise.sigma_v, noise.sigma_v,
          noise.sigma_v;
      return s;
    }
  }
  return {};
}

Eigen::VectorXd apply_state_noise(const Eigen::VectorXd& x, const Eigen::VectorXd& sigmas,
                                  Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd out = x;
  for (int i = 0; i < x.size(); ++i) {
    const double xi = gauss(rng);  // drawn unconditionally for stream stability
    out[i] += sigmas[i] * xi;
  }
  return out;
}

Eigen::VectorXd apply_thrust_noise(const Eigen::VectorXd& u_star, const NoiseConfig& noise,
                                   double u_max, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int m = static_cast<int>(u_star.size());
  const double du = noise.sigma_u * gauss(rng);
  const double dbeta = m >= 3 ? noise.sigma_beta * gauss(rng) : 0.0;
  const double dgamma = m >= 2 ? noise.sigma_gamma * gauss(rng) : 0.0;

  const double mag = u_star.norm();
  if (mag < 1e-9) return Eigen::VectorXd::Zero(m);

  Eigen::VectorXd u(m);
  if (m == 1) {
    u[0] = u_star[0] * (1.0 + du);
  } else if (m == 2) {
    const double gamma = std::atan2(u_star[0], u_star[1]) + dgamma;
    const double mag_e = mag * (1.0 + du);
    u[0] = mag_e * std::sin(gamma);
    u[1] = mag_e * std::cos(gamma);
  } else {
    const double beta = std::asin(u_star[2] / mag) + dbeta;
    const double gamma = std::atan2(u_star[0], u_star[1]) + dgamma;
    const double mag_e = mag * (1.0 + du);
    u[0] = mag_e * std::cos(beta) * std::sin(gamma);
    u[1] = mag_e * std::cos(beta) * std::cos(gamma);
    u[2] = mag_e * std::sin(beta);
  }
  const double un = u.norm();
  u *= u_max / std::max(u_max, un);
  return u;
}

}  // namespace iccbf
