#include <cmath>
#include <random>

#include "doctest.h"
#include "iccbf/envs.hpp"
#include "oracles/cw_stm.hpp"
#include "oracles/twobody.hpp"

using namespace iccbf;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<int>(v.size()));
  int i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

std::vector<double> drift_at(const SystemModel& sys, const Eigen::VectorXd& x) {
  return sys.drift(std::span<const double>(x.data(), x.size()));
}

}  // namespace

TEST_CASE("cruise dynamics: matched speeds and resistive decel") {
  CruiseParams p;  // nominal v0 = 13.89 m/s
  CHECK(p.v0 == doctest::Approx(13.89));
  auto sys = make_cruise_system(p);

  auto d1 = drift_at(sys, vec({100.0, 13.89}));
  CHECK(d1[0] == doctest::Approx(0.0));

  auto d2 = drift_at(sys, vec({100.0, 0.0}));
  CHECK(d2[1] == doctest::Approx(-0.1 / 1650.0).epsilon(1e-12));
}

TEST_CASE("docking dynamics: port kinematics and co-orbital equilibrium") {
  DockingParams p;
  CHECK(p.omega == doctest::Approx(0.6 * M_PI / 180.0));
  auto sys = make_docking_system(p);

  auto d = drift_at(sys, vec({40.0, -3.0, 0.2, 0.1, 1.3}));
  CHECK(d[4] == doctest::Approx(p.omega));

  auto eq = drift_at(sys, vec({0.0, 0.0, 0.0, 0.0, 0.0}));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(eq[i]) < 1e-9);
}

TEST_CASE("docking dynamics agree with a propagated two-body oracle") {
  DockingParams p;
  const double n = p.mean_motion();
  auto sys = make_docking_system(p);

  const Eigen::Vector4d rel0(80.0, -35.0, 0.4, -0.25);
  Eigen::VectorXd x0 = vec({rel0[0], rel0[1], rel0[2], rel0[3], 0.0});
  const double t = 50.0;
  auto ours = propagate_zoh(sys, x0, Eigen::VectorXd::Zero(2), t, 500);

  auto deputy0 = testing::from_lvlh(rel0, p.r, n);
  auto deputy_t = testing::twobody_rk4(deputy0, kMuEarth, t, 2000);
  auto rel_t = testing::to_lvlh(deputy_t, p.r, n, t);

  for (int i = 0; i < 4; ++i) {
    CHECK(ours.x_end[i] == doctest::Approx(rel_t[i]).epsilon(1e-6));
  }
}

TEST_CASE("CW dynamics: equilibrium, out-of-plane oscillator, mean motion") {
  InspectionParams p;
  const double n = p.mean_motion();
  CHECK(n == doctest::Approx(1.1331e-3).epsilon(1e-4));
  auto sys = make_inspection_system(p);

  auto d0 = drift_at(sys, vec({0, 0, 0, 0, 0, 0}));
  for (double v : d0) CHECK(v == doctest::Approx(0.0));

  auto dz = drift_at(sys, vec({0, 0, 1.0, 0, 0, 0}));
  CHECK(dz[5] == doctest::Approx(-n * n));
}

TEST_CASE("propagate_zoh: exact linear flow for zero drift") {
  SystemModel sys;
  sys.n_states = 2;
  sys.n_controls = 2;
  sys.u_max = 1.0;
  sys.drift = [](std::span<const double> x) {
    return std::vector<double>(x.size(), 0.0);
  };
  sys.g = Eigen::MatrixXd::Identity(2, 2);
  auto r = propagate_zoh(sys, vec({1.0, -2.0}), vec({0.5, 0.25}), 2.0, 4);
  CHECK(r.x_end[0] == doctest::Approx(2.0));
  CHECK(r.x_end[1] == doctest::Approx(-1.5));
  CHECK(r.substates.size() == 5);
}

TEST_CASE("propagate_zoh: cruise matched-speed distance stays put") {
  CruiseParams p;
  auto sys = make_cruise_system(p);
  auto r = propagate_zoh(sys, vec({100.0, 13.89}), vec({0.0}), 0.1, 10);
  // v drifts slightly under F(v), so d moves only at second order.
  CHECK(std::abs(r.x_end[0] - 100.0) < 1e-3);
}

TEST_CASE("propagate_zoh: CW one period returns to start vs STM oracle") {
  InspectionParams p;
  const double n = p.mean_motion();
  auto sys = make_inspection_system(p);
  const double period = 2.0 * M_PI / n;
  Eigen::VectorXd x0 = vec({30.0, -12.0, 20.0, 0.01, -0.02, 0.015});
  auto r = propagate_zoh(sys, x0, Eigen::VectorXd::Zero(3), period, 4000);
  auto oracle = testing::cw_closed_form(x0, n, period);
  const double scale = x0.norm();
  CHECK((r.x_end - oracle).norm() / scale < 1e-6);
  // One period of the linear system is the identity map.
  CHECK((oracle - x0).norm() / scale < 1e-9);
}

TEST_CASE("RK4 order: halving the substep shrinks error ~16x") {
  InspectionParams p;
  const double n = p.mean_motion();
  auto sys = make_inspection_system(p);
  Eigen::VectorXd x0 = vec({50.0, 10.0, -25.0, 0.05, 0.02, -0.04});
  const double t = 0.25 * 2.0 * M_PI / n;
  auto truth = testing::cw_closed_form(x0, n, t);
  const double e1 = (propagate_zoh(sys, x0, Eigen::VectorXd::Zero(3), t, 6).x_end - truth).norm();
  const double e2 = (propagate_zoh(sys, x0, Eigen::VectorXd::Zero(3), t, 12).x_end - truth).norm();
  CHECK(e1 / e2 > 10.0);
  CHECK(e1 / e2 < 24.0);
}

TEST_CASE("propagate_zoh flags divergence") {
  SystemModel sys;
  sys.n_states = 1;
  sys.n_controls = 1;
  sys.drift = [](std::span<const double> x) {
    return std::vector<double>{x[0] * x[0]};
  };
  sys.g = Eigen::MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(propagate_zoh(sys, vec({1e120}), vec({0.0}), 1.0, 4), DivergenceError);
}

TEST_CASE("hidden parameter sampling: degenerate, bounded, reproducible") {
  DockingParams nominal;
  nominal.m = 1000.0;
  DockingDeltas deltas;

  Rng rng(derive_seed(42, 0));
  DockingDeltas zero{};
  zero.m = zero.R_C = zero.omega = zero.r = zero.gamma = zero.u_max = 0.0;
  auto exact = sample_hidden_params(nominal, zero, rng);
  CHECK(exact.m == nominal.m);
  CHECK(exact.omega == nominal.omega);

  Rng rng2(derive_seed(42, 1));
  double sum = 0.0;
  const int n_draws = 100000;
  for (int i = 0; i < n_draws; ++i) {
    auto p = sample_hidden_params(nominal, deltas, rng2);
    REQUIRE(p.m >= 900.0);
    REQUIRE(p.m <= 1100.0);
    sum += p.m;
  }
  CHECK(std::abs(sum / n_draws - 1000.0) / 1000.0 < 0.005);

  Rng a(derive_seed(7, 3)), b(derive_seed(7, 3));
  for (int i = 0; i < 50; ++i) {
    auto pa = sample_hidden_params(nominal, deltas, a);
    auto pb = sample_hidden_params(nominal, deltas, b);
    CHECK(pa.m == pb.m);
    CHECK(pa.r == pb.r);
    CHECK(pa.gamma == pb.gamma);
  }
}

TEST_CASE("state noise: zero sigmas pass through, sample std tracks sigma") {
  NoiseConfig off{};
  auto sig_off = state_noise_sigmas(EnvKind::kCruise, off);
  Rng rng(11);
  auto x = vec({100.0, 13.0});
  auto y = apply_state_noise(x, sig_off, rng);
  CHECK(y[0] == x[0]);
  CHECK(y[1] == x[1]);

  NoiseConfig on{};
  on.sigma_r = 2.0;
  on.sigma_v = 0.5;
  auto sig = state_noise_sigmas(EnvKind::kCruise, on);
  Rng rng2(13);
  double s2 = 0.0;
  const int n_draws = 100000;
  for (int i = 0; i < n_draws; ++i) {
    auto z = apply_state_noise(x, sig, rng2);
    s2 += (z[0] - x[0]) * (z[0] - x[0]);
  }
  CHECK(std::abs(std::sqrt(s2 / n_draws) - 2.0) / 2.0 < 0.02);
}

TEST_CASE("thrust noise: passthrough, zero gate, and norm clamp") {
  NoiseConfig off{};
  Rng rng(3);
  auto u3 = vec({0.2, -0.4, 0.3});
  auto out3 = apply_thrust_noise(u3, off, 1.0, rng);
  for (int i = 0; i < 3; ++i) CHECK(out3[i] == doctest::Approx(u3[i]).epsilon(1e-12));

  auto u1 = vec({-0.1});
  auto out1 = apply_thrust_noise(u1, off, 0.25, rng);
  CHECK(out1[0] == u1[0]);

  auto z = apply_thrust_noise(vec({0.0, 0.0, 0.0}), off, 1.0, rng);
  CHECK(z.norm() == 0.0);

  NoiseConfig heavy{};
  heavy.sigma_u = 0.5;
  heavy.sigma_beta = 0.3;
  heavy.sigma_gamma = 0.3;
  Rng rng2(29);
  std::uniform_real_distribution<double> ud(-1.5, 1.5);
  for (int i = 0; i < 100000; ++i) {
    Eigen::VectorXd u(3);
    u << ud(rng2), ud(rng2), ud(rng2);
    auto out = apply_thrust_noise(u, heavy, 1.0, rng2);
    REQUIRE(out.norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("thrust noise 2D reconstruction degenerates gracefully") {
  NoiseConfig off{};
  Rng rng(5);
  auto u = vec({0.6, -0.8});
  auto out = apply_thrust_noise(u, off, 2.0, rng);
  CHECK(out[0] == doctest::Approx(u[0]).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(u[1]).epsilon(1e-12));
}

TEST_CASE("barrier/clf fields: double and DA lanes agree at the center") {
  DockingParams p;
  auto h0 = make_docking_h0_field(p);
  auto clf = make_docking_clf_field(p);
  Eigen::VectorXd x = vec({60.0, 8.0, -0.3, 0.1, 0.7});
  const double hv = h0.value(std::span<const double>(x.data(), 5));
  const double vv = clf.value(std::span<const double>(x.data(), 5));

  Eigen::VectorXd zeta = vec({0.5, 0.5, 0.05, 0.05, 0.01});
  auto seeds = TaylorPoly::variables(x, zeta, 3);
  auto hp = h0.da(seeds);
  auto vp = clf.da(seeds);
  CHECK(hp.constant_term() == doctest::Approx(hv).epsilon(1e-12));
  CHECK(vp.constant_term() == doctest::Approx(vv).epsilon(1e-12));

  // Chaser on the cone axis: h0 = 1 - cos(gamma) > 0.
  const double psi = 0.7;
  Eigen::VectorXd on_axis = vec({p.R_C * std::cos(psi) + 30.0 * std::cos(psi),
                                 p.R_C * std::sin(psi) + 30.0 * std::sin(psi), 0.0, 0.0, psi});
  const double h_axis = h0.value(std::span<const double>(on_axis.data(), 5));
  CHECK(h_axis == doctest::Approx(1.0 - std::cos(p.gamma)));
}
