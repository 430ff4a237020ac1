#include "epmatch/matching.hpp"

#include <gtest/gtest.h>

#include "epmatch/scenarios.hpp"
#include "support.hpp"

using namespace epmatch;
using epmatch::testing::random_vec3;
using epmatch::testing::replay_open_loop;

namespace {

ReducedState random_state(std::mt19937& rng, bool degenerate) {
  ReducedState s;
  s.omega = random_vec3(rng);
  if (degenerate) s.omega.z() = 0.0;
  s.v = random_vec3(rng);
  s.gamma = random_vec3(rng);
  return s;
}

// Central-difference gradients of a Lagrangian in the velocity arguments.
// Both Lagrangians are quadratic in the velocities, so a wide step carries no
// truncation error and keeps the roundoff floor near machine precision.
template <typename F>
Vec3 fd_gradient_omega(const F& f, const ReducedState& s, bool degenerate) {
  const double h = 1e-2;
  Vec3 grad = Vec3::Zero();
  const int n = degenerate ? 2 : 3;
  for (int i = 0; i < n; ++i) {
    ReducedState sp = s, sm = s;
    sp.omega(i) += h;
    sm.omega(i) -= h;
    grad(i) = (f(sp) - f(sm)) / (2.0 * h);
  }
  return grad;
}

template <typename F>
Vec3 fd_gradient_v(const F& f, const ReducedState& s) {
  const double h = 1e-2;
  Vec3 grad;
  for (int i = 0; i < 3; ++i) {
    ReducedState sp = s, sm = s;
    sp.v(i) += h;
    sm.v(i) -= h;
    grad(i) = (f(sp) - f(sm)) / (2.0 * h);
  }
  return grad;
}

}  // namespace

TEST(SolveMatching, TotalMassGivesZeroKineticShaping) {
  const SystemParams p = scenario_spherical_pendulum().params;
  const ShapingGains gains = solve_matching(p, p.total_mass());
  EXPECT_EQ(gains.k, 0.0);
  EXPECT_TRUE(gains.kinetic_shaping_off);

  const ReducedState s{Vec3(0.2, -0.1, 0.0), Vec3(0.5, 0.4, -0.3),
                       Vec3(0.1, 0.0, 0.9), 0.0};
  EXPECT_EQ(kinetic_shaping_force(p, gains, s, Vec3(1.0, 2.0, 3.0)), Vec3::Zero());
}

TEST(SolveMatching, PendulumGainValue) {
  const SystemParams p = scenario_spherical_pendulum().params;
  const ShapingGains gains = solve_matching(p, 0.9 * p.top_mass);
  EXPECT_NEAR(gains.rho, 0.126, 1e-15);
  EXPECT_NEAR(gains.k, -0.454, 1e-15);
}

TEST(SolveMatching, RejectsZeroRho) {
  const SystemParams p = scenario_spherical_pendulum().params;
  EXPECT_THROW(solve_matching(p, 0.0), std::invalid_argument);
}

TEST(VerifyMatching, ResidualsVanishForRandomRho) {
  std::mt19937 rng(51);
  for (const auto& params : {scenario_spherical_pendulum().params,
                             scenario_heavy_top().params}) {
    const double mt = params.total_mass();
    std::uniform_real_distribution<double> dist(0.1 * mt, 2.0 * mt);
    for (int i = 0; i < 50; ++i) {
      const double rho = dist(rng);
      const MatchingResiduals r = verify_matching(params, solve_matching(params, rho));
      EXPECT_LT(r.max(), 1e-14) << "rho = " << rho;
    }
  }
}

TEST(VerifyMatching, CorruptedTauIsDetected) {
  const SystemParams p = scenario_spherical_pendulum().params;
  ShapingGains gains = solve_matching(p, 0.9 * p.top_mass);
  gains.tau(0, 1) += 1e-3;
  const MatchingResiduals r = verify_matching(p, gains);
  EXPECT_GT(r.mc2, 1e-4);
  EXPECT_GT(r.delta, 1e-6);
  EXPECT_LT(r.mc1, 1e-14);
}

TEST(ControlledKinetic, VanishesAtZeroVelocity) {
  const SystemParams p = scenario_heavy_top().params;
  const ShapingGains gains = solve_matching(p, scenario_heavy_top().rho);
  EXPECT_EQ(controlled_kinetic(p, gains, Vec3::Zero(), Vec3::Zero()), 0.0);
}

TEST(ControlledKinetic, MatchesShapedMetricQuadraticForm) {
  std::mt19937 rng(52);
  for (const auto& sc : {scenario_spherical_pendulum(), scenario_heavy_top()}) {
    const ShapingGains gains = solve_matching(sc.params, sc.rho);
    const MetricTensor metric = MetricTensor::shaped(sc.params, sc.rho);
    for (int i = 0; i < 100; ++i) {
      const ReducedState s = random_state(rng, sc.params.degenerate);
      Eigen::VectorXd vel(metric.active_matrix().rows());
      if (sc.params.degenerate)
        vel << s.omega.x(), s.omega.y(), s.v;
      else
        vel << s.omega, s.v;
      const double quad = 0.5 * vel.dot(metric.active_matrix() * vel);
      EXPECT_NEAR(controlled_kinetic(sc.params, gains, s.omega, s.v), quad, 1e-13);
    }
  }
}

TEST(ControlledKinetic, TotalMassGainsLeaveVelocityGradientUnchanged) {
  std::mt19937 rng(53);
  const SystemParams p = scenario_heavy_top().params;
  const ShapingGains gains = solve_matching(p, p.total_mass());
  for (int i = 0; i < 50; ++i) {
    const ReducedState s = random_state(rng, false);
    const auto shaped = [&](const ReducedState& q) {
      return controlled_lagrangian(p, gains, q);
    };
    const auto base = [&](const ReducedState& q) { return reduced_lagrangian(p, q); };
    EXPECT_LT((fd_gradient_v(shaped, s) - fd_gradient_v(base, s)).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(ControlledKinetic, MatchingGradientIdentities) {
  std::mt19937 rng(54);
  for (const auto& sc : {scenario_spherical_pendulum(), scenario_heavy_top()}) {
    const ShapingGains gains = solve_matching(sc.params, sc.rho);
    for (int i = 0; i < 50; ++i) {
      const ReducedState s = random_state(rng, sc.params.degenerate);
      const auto shaped = [&](const ReducedState& q) {
        return controlled_lagrangian(sc.params, gains, q);
      };
      const auto base = [&](const ReducedState& q) {
        return reduced_lagrangian(sc.params, q);
      };

      // Angular-velocity gradients agree.
      const Vec3 d_omega_shaped = fd_gradient_omega(shaped, s, sc.params.degenerate);
      const Vec3 d_omega_base = fd_gradient_omega(base, s, sc.params.degenerate);
      EXPECT_LT((d_omega_shaped - d_omega_base).cwiseAbs().maxCoeff(), 1e-11);

      // Base-velocity gradients differ by k v.
      const Vec3 diff = fd_gradient_v(shaped, s) - fd_gradient_v(base, s);
      EXPECT_LT((diff - gains.k * s.v).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(PotentialShaping, ForceValues) {
  const SystemParams p = scenario_spherical_pendulum().params;
  const Vec3 u = potential_shaping_force(p, Vec3::UnitZ());
  EXPECT_NEAR(u.z(), 5.684, 1e-12);
  EXPECT_EQ(u.x(), 0.0);
  EXPECT_EQ(u.y(), 0.0);
  EXPECT_EQ(potential_shaping_force(p, Vec3::Zero()), Vec3::Zero());
}

TEST(PotentialShaping, CancelsBaseGravityExactly) {
  // With rho equal to the total mass the implicit route is the plain
  // controlled system with only the potential force; both assemble the same
  // linear system, so the results agree bit for bit.
  std::mt19937 rng(55);
  for (const auto& sc : {scenario_spherical_pendulum(), scenario_heavy_top()}) {
    const ShapingGains gains = solve_matching(sc.params, sc.params.total_mass());
    const ImplicitControlDynamics no_gravity(sc.params, gains);
    const EpDynamics plain(sc.params);
    for (int i = 0; i < 20; ++i) {
      const ReducedState s = random_state(rng, sc.params.degenerate);
      const ReducedState a = no_gravity.rhs(s);
      const ReducedState b = plain.rhs(s, potential_shaping_force(sc.params, s.gamma));
      EXPECT_EQ(a.omega, b.omega);
      EXPECT_EQ(a.v, b.v);
    }
  }
}

TEST(ClosedLoop, UprightEquilibriumIsFixedPoint) {
  {
    const Scenario sc = scenario_spherical_pendulum();
    const ShapingGains gains = solve_matching(sc.params, sc.rho);
    ReducedState eq;
    eq.gamma = Vec3::UnitZ();
    const ReducedState ds = closed_loop_rhs(sc.params, gains, eq);
    EXPECT_LT(ds.omega.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(ds.v.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(ds.gamma, Vec3::Zero());
  }
  {
    const Scenario sc = scenario_heavy_top();
    const ShapingGains gains = solve_matching(sc.params, sc.rho);
    ReducedState eq;
    eq.omega = Vec3(0.0, 0.0, 0.1);
    eq.gamma = Vec3::UnitZ();
    const ReducedState ds = closed_loop_rhs(sc.params, gains, eq);
    EXPECT_LT(ds.omega.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(ds.v.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(ds.gamma.cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ClosedLoop, ControlAtEquilibriumIsGravityCompensation) {
  const Scenario sc = scenario_spherical_pendulum();
  const ShapingGains gains = solve_matching(sc.params, sc.rho);
  const ClosedLoopDynamics dyn(sc.params, gains);
  ReducedState eq;
  eq.gamma = Vec3::UnitZ();

  const ReducedState ds = dyn.rhs(eq);
  EXPECT_EQ(kinetic_shaping_force(sc.params, gains, eq, ds.v), Vec3::Zero());
  const Vec3 u = dyn.control(eq);
  EXPECT_DOUBLE_EQ(u.z(), sc.params.total_mass() * sc.params.gravity);
  EXPECT_EQ(u.x(), 0.0);
  EXPECT_EQ(u.y(), 0.0);
}

TEST(ClosedLoop, GammaNormPreserved) {
  Scenario sc = scenario_spherical_pendulum();
  IntegratorConfig cfg;
  cfg.t_end = 20.0;
  const Trajectory traj = simulate(sc, cfg);
  double worst = 0.0;
  for (const auto& s : traj.samples)
    worst = std::max(worst, std::abs(s.state.gamma.norm() - 1.0));
  EXPECT_LT(worst, 1e-8);
}

TEST(ClosedLoop, MatchedAndImplicitRoutesAgree) {
  for (const auto& sc : {scenario_spherical_pendulum(), scenario_heavy_top()}) {
    IntegratorConfig cfg;
    cfg.t_end = 5.0;
    const Trajectory matched = simulate(sc, cfg);
    const Trajectory implicit_route = simulate_implicit(sc, cfg);
    EXPECT_LT(compare_trajectories(matched, implicit_route).max(), 1e-9);
  }
}

TEST(ClosedLoop, ZeroKineticShapingSeriesWhenRhoIsTotalMass) {
  Scenario sc = scenario_spherical_pendulum();
  sc.rho = sc.params.total_mass();
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  const Trajectory traj = simulate(sc, cfg);
  const ShapingGains gains = solve_matching(sc.params, sc.rho);
  for (const Vec3& uk : kinetic_control_series(traj, sc.params, gains))
    EXPECT_EQ(uk, Vec3::Zero());
}

TEST(ClosedLoop, LoggedControlReplaysTheTrajectory) {
  const Scenario sc = scenario_spherical_pendulum();
  IntegratorConfig cfg;
  cfg.t_end = 20.0;
  const Trajectory traj = simulate(sc, cfg);
  ASSERT_EQ(traj.samples.size() % 2, 1u);  // even step count

  std::vector<Vec3> u;
  u.reserve(traj.samples.size());
  for (const auto& s : traj.samples) u.push_back(s.u);

  const auto replay = replay_open_loop(sc.params, u, sc.initial, cfg.dt);
  ASSERT_EQ(replay.size(), (traj.samples.size() + 1) / 2);
  double worst = 0.0;
  for (size_t i = 0; i < replay.size(); ++i) {
    const ReducedState& a = replay[i];
    const ReducedState& b = traj.samples[2 * i].state;
    worst = std::max(worst, (a.omega - b.omega).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.v - b.v).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.gamma - b.gamma).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}
