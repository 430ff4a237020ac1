#include "epmatch/integrator.hpp"

#include <gtest/gtest.h>

#include "epmatch/scenarios.hpp"
#include "support.hpp"

using namespace epmatch;
using epmatch::testing::pendulum_rk4_step;
using epmatch::testing::PendulumState;
using epmatch::testing::random_vec3;
using epmatch::testing::rodrigues_oracle;

TEST(Rk4Step, ZeroStepLeavesStateUnchanged) {
  ReducedState s;
  s.omega = Vec3(0.1, 0.2, 0.3);
  s.v = Vec3(-1.0, 2.0, 0.5);
  s.gamma = Vec3(0.0, 0.0, 1.0);
  s.height = 4.0;
  const auto rhs = [](const ReducedState& q) {
    ReducedState d;
    d.omega = q.v;
    d.v = -q.omega;
    d.gamma = q.gamma.cross(q.omega);
    d.height = 1.0;
    return d;
  };
  const ReducedState out = rk4_step(rhs, s, 0.0);
  EXPECT_EQ(out.omega, s.omega);
  EXPECT_EQ(out.v, s.v);
  EXPECT_EQ(out.gamma, s.gamma);
  EXPECT_EQ(out.height, s.height);
}

TEST(Rk4Step, AdvectionStepMatchesClosedFormRotation) {
  const Vec3 omega(0.0, 0.0, 1.0);
  ReducedState s;
  s.gamma = Vec3::UnitX();
  const auto rhs = [&](const ReducedState& q) {
    ReducedState d;
    d.gamma = q.gamma.cross(omega);
    return d;
  };
  const double dt = 0.1;
  const ReducedState out = rk4_step(rhs, s, dt);
  // gamma_dot = -omega x gamma, so the flow rotates by -omega dt.
  const Vec3 expected = rodrigues_oracle(-dt, omega) * Vec3::UnitX();
  EXPECT_LT((out.gamma - expected).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Rk4Step, FourthOrderConvergenceOnScenario) {
  Scenario sc = scenario_spherical_pendulum();
  sc.t_end = 2.0;
  const auto endpoint = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_end = sc.t_end;
    const Trajectory traj = simulate(sc, cfg);
    return traj.samples.back().state;
  };
  const ReducedState a = endpoint(4e-3);
  const ReducedState b = endpoint(2e-3);
  const ReducedState c = endpoint(1e-3);
  const auto dist = [](const ReducedState& x, const ReducedState& y) {
    return std::sqrt((x.omega - y.omega).squaredNorm() + (x.v - y.v).squaredNorm() +
                     (x.gamma - y.gamma).squaredNorm());
  };
  const double ratio = dist(a, b) / dist(b, c);
  EXPECT_GT(ratio, 8.0);
  EXPECT_LT(ratio, 32.0);
}

TEST(Scenarios, FrozenParameterValues) {
  const Scenario sp = scenario_spherical_pendulum();
  EXPECT_NEAR(sp.initial.gamma.x(), 0.110616, 1e-6);
  EXPECT_NEAR(sp.initial.gamma.y(), 0.110616, 1e-6);
  EXPECT_NEAR(sp.initial.gamma.z(), 0.987688, 1e-6);
  EXPECT_NEAR(sp.rho, 0.126, 1e-15);
  EXPECT_NEAR(solve_matching(sp.params, sp.rho).k, -0.454, 1e-15);
  EXPECT_EQ(sp.t_end, 20.0);
  EXPECT_TRUE(sp.params.degenerate);

  const Scenario ht = scenario_heavy_top();
  const double expected_rho = 0.9 * 0.7 * 0.7 * 0.215 * 0.215 / 0.2;
  EXPECT_NEAR(ht.rho, expected_rho, 1e-15);
  EXPECT_NEAR(ht.rho, 0.101927, 1e-5);
  EXPECT_EQ(ht.t_end, 30.0);
  EXPECT_EQ(ht.initial.omega, Vec3(0.1, 0.2, 0.1));
}

TEST(Simulate, RowCountMatchesGrid) {
  Scenario sc = scenario_spherical_pendulum();
  IntegratorConfig cfg;
  cfg.t_end = 0.5;
  const Trajectory traj = simulate(sc, cfg);
  EXPECT_EQ(traj.samples.size(), 501u);
  EXPECT_DOUBLE_EQ(traj.samples.back().t, 0.5);
}

TEST(Simulate, UncontrolledUprightRestFallsFreely) {
  Scenario sc = scenario_spherical_pendulum();
  sc.mode = ControlMode::None;
  sc.initial = ReducedState{};
  sc.initial.gamma = Vec3::UnitZ();
  IntegratorConfig cfg;
  cfg.t_end = 2.0;
  const Trajectory traj = simulate(sc, cfg);
  for (size_t i = 0; i < traj.samples.size(); i += 200) {
    const double t = traj.samples[i].t;
    EXPECT_NEAR(traj.samples[i].state.height, -0.5 * sc.params.gravity * t * t,
                1e-9 * std::max(1.0, t * t));
  }
}

TEST(Simulate, PotentialOnlyKeepsHeightDynamicsNeutral) {
  Scenario sc = scenario_spherical_pendulum();
  sc.mode = ControlMode::PotentialOnly;
  IntegratorConfig cfg;
  cfg.t_end = 5.0;
  const Trajectory traj = simulate(sc, cfg);
  // Gravity on the base is cancelled, so the base drifts slowly instead of
  // falling (free fall would reach -122.5 m here).
  for (const auto& s : traj.samples) EXPECT_LT(std::abs(s.state.height), 5.0);
}

TEST(CompareTrajectories, SelfComparisonIsZeroAndGridsMustMatch) {
  Scenario sc = scenario_spherical_pendulum();
  IntegratorConfig cfg;
  cfg.t_end = 0.2;
  const Trajectory traj = simulate(sc, cfg);
  EXPECT_EQ(compare_trajectories(traj, traj).max(), 0.0);

  IntegratorConfig other = cfg;
  other.dt = 2e-3;
  const Trajectory coarse = simulate(sc, other);
  EXPECT_THROW(compare_trajectories(traj, coarse), std::invalid_argument);
}

TEST(ModifiedGravity, ClosedLoopReducesToPendulumVectorField) {
  const Scenario sc = scenario_spherical_pendulum();
  const ShapingGains gains = solve_matching(sc.params, sc.rho);
  const ClosedLoopDynamics dyn(sc.params, gains);
  const double g_eff =
      modified_gravity_factor(sc.params, gains, sc.kind) * sc.params.gravity;
  EXPECT_NEAR(g_eff, -88.2, 1e-12);

  std::mt19937 rng(71);
  for (int i = 0; i < 1000; ++i) {
    ReducedState s;
    s.omega = random_vec3(rng);
    s.omega.z() = 0.0;
    s.v = random_vec3(rng);
    s.gamma = random_vec3(rng);

    const ReducedState ds = dyn.rhs(s);
    const PendulumState oracle = epmatch::testing::pendulum_rhs(
        {s.omega.x(), s.omega.y(), s.gamma}, g_eff, sc.params.length);

    const double scale = std::max(
        1.0, std::max(std::abs(oracle.omega1), std::abs(oracle.omega2)));
    EXPECT_NEAR(ds.omega.x(), oracle.omega1, 1e-13 * scale);
    EXPECT_NEAR(ds.omega.y(), oracle.omega2, 1e-13 * scale);
    EXPECT_LT((ds.gamma - oracle.gamma).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(ModifiedGravity, ClosedLoopTrajectoryMatchesPendulumIntegration) {
  const Scenario sc = scenario_spherical_pendulum();
  const ShapingGains gains = solve_matching(sc.params, sc.rho);
  const double g_eff =
      modified_gravity_factor(sc.params, gains, sc.kind) * sc.params.gravity;

  IntegratorConfig cfg;
  cfg.t_end = 20.0;
  const Trajectory traj = simulate(sc, cfg);

  PendulumState p{sc.initial.omega.x(), sc.initial.omega.y(), sc.initial.gamma};
  double worst = 0.0;
  for (size_t i = 0;; ++i) {
    const ReducedState& s = traj.samples[i].state;
    worst = std::max(worst, std::abs(p.omega1 - s.omega.x()));
    worst = std::max(worst, std::abs(p.omega2 - s.omega.y()));
    worst = std::max(worst, (p.gamma - s.gamma).cwiseAbs().maxCoeff());
    if (i + 1 == traj.samples.size()) break;
    p = pendulum_rk4_step(p, g_eff, sc.params.length, cfg.dt);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Simulate, NonFiniteStateAborts) {
  Scenario sc = scenario_spherical_pendulum();
  sc.initial.omega = Vec3(1e160, 0.0, 0.0);  // overflows within a few steps
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  EXPECT_THROW(simulate(sc, cfg), std::runtime_error);
}
