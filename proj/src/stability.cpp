#include "epmatch/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace epmatch {

namespace {

// Shaped translational momentum, -m l hat(chi) Omega + rho v.
Vec3 shaped_momentum(const SystemParams& params, const ShapingGains& gains,
                     const ReducedState& s) {
  return params.top_mass * params.length * s.omega.cross(params.axis) +
         gains.rho * s.v;
}

void check_factor_regular(const SystemParams& params, const ShapingGains& gains,
                          ScenarioKind kind) {
  const double m = params.top_mass;
  const double l = params.length;
  if (kind == ScenarioKind::SphericalPendulum) {
    if (std::abs(gains.rho - m) <= 1e-12 * m)
      throw std::invalid_argument("auxiliary invariant undefined at rho = m");
  } else {
    const double ml2 = m * m * l * l;
    if (std::abs(params.inertia.x() * gains.rho - ml2) <= 1e-12 * ml2)
      throw std::invalid_argument(
          "auxiliary invariant undefined at I1 rho = m^2 l^2");
  }
}

}  // namespace

double energy_controlled(const SystemParams& params, const ShapingGains& gains,
                         const ReducedState& s) {
  return controlled_kinetic(params, gains, s.omega, s.v) +
         params.gravity * params.top_mass * params.length * params.axis.dot(s.gamma);
}

double modified_gravity_factor(const SystemParams& params, const ShapingGains& gains,
                               ScenarioKind kind) {
  check_factor_regular(params, gains, kind);
  const double m = params.top_mass;
  if (kind == ScenarioKind::SphericalPendulum) return gains.rho / (gains.rho - m);
  const double ml2 = m * m * params.length * params.length;
  const double i1 = params.inertia.x();
  return i1 * gains.rho / (i1 * gains.rho - ml2);
}

double aux_invariant(const SystemParams& params, const ShapingGains& gains,
                     const ReducedState& s, ScenarioKind kind) {
  const double factor = modified_gravity_factor(params, gains, kind);
  const double m = params.top_mass;
  const double l = params.length;
  const double potential = m * factor * params.gravity * l * s.gamma.z();
  if (kind == ScenarioKind::SphericalPendulum) {
    const double transverse = s.omega.x() * s.omega.x() + s.omega.y() * s.omega.y();
    return 0.5 * m * l * l * transverse + potential;
  }
  const double spin =
      params.inertia.x() * (s.omega.x() * s.omega.x() + s.omega.y() * s.omega.y()) +
      params.inertia.z() * s.omega.z() * s.omega.z();
  return 0.5 * spin + potential;
}

Vec3 casimir_invariants(const SystemParams& params, const ShapingGains& gains,
                        const ReducedState& s) {
  const Vec3 p = shaped_momentum(params, gains, s);
  return Vec3(p.squaredNorm(), p.dot(s.gamma), s.gamma.squaredNorm());
}

double omega3_invariant(const ReducedState& s) { return s.omega.z(); }

ReducedState upright_equilibrium(ScenarioKind kind, double spin_rate) {
  ReducedState s;
  s.gamma = Vec3::UnitZ();
  if (kind == ScenarioKind::HeavyTop) s.omega = Vec3(0.0, 0.0, spin_rate);
  return s;
}

double energy_casimir(const SystemParams& params, const ShapingGains& gains,
                      const EnergyCasimirJet& jet, const ReducedState& s,
                      ScenarioKind kind) {
  double e = energy_controlled(params, gains, s);
  e += jet.c * aux_invariant(params, gains, s, kind);
  const Vec3 dc = casimir_invariants(params, gains, s) - jet.casimir_eq;
  e += jet.d_phi.dot(dc) + 0.5 * dc.dot(jet.d2_phi * dc);
  if (kind == ScenarioKind::HeavyTop) {
    const double dw = s.omega.z() - jet.omega3_eq;
    e += jet.phi_prime * dw + 0.5 * jet.phi_double_prime * dw * dw;
  }
  return e;
}

int state_dimension(ScenarioKind kind) {
  return kind == ScenarioKind::SphericalPendulum ? 8 : 9;
}

Eigen::VectorXd pack_state(const ReducedState& s, ScenarioKind kind) {
  Eigen::VectorXd x(state_dimension(kind));
  if (kind == ScenarioKind::SphericalPendulum) {
    x << s.omega.x(), s.omega.y(), s.v, s.gamma;
  } else {
    x << s.omega, s.v, s.gamma;
  }
  return x;
}

ReducedState unpack_state(const Eigen::VectorXd& x, ScenarioKind kind, double height) {
  ReducedState s;
  if (kind == ScenarioKind::SphericalPendulum) {
    s.omega = Vec3(x(0), x(1), 0.0);
    s.v = x.segment<3>(2);
    s.gamma = x.segment<3>(5);
  } else {
    s.omega = x.head<3>();
    s.v = x.segment<3>(3);
    s.gamma = x.segment<3>(6);
  }
  s.height = height;
  return s;
}

EnergyCasimirJet first_variation_solve(const SystemParams& params,
                                       const ShapingGains& gains,
                                       const ReducedState& equilibrium, double c,
                                       ScenarioKind kind) {
  check_factor_regular(params, gains, kind);
  const double m = params.top_mass;
  const double l = params.length;
  const double mgl = m * params.gravity * l;
  const double rho = gains.rho;

  EnergyCasimirJet jet;
  jet.c = c;
  jet.casimir_eq = casimir_invariants(params, gains, equilibrium);
  jet.omega3_eq = equilibrium.omega.z();
  if (kind == ScenarioKind::SphericalPendulum) {
    jet.d_phi = Vec3(0.0, 0.0, (m - (c + 1.0) * rho) * mgl / (2.0 * (rho - m)));
  } else {
    const double i1 = params.inertia.x();
    const double ml2 = m * m * l * l;
    jet.d_phi =
        Vec3(0.0, 0.0, (ml2 - (1.0 + c) * i1 * rho) * mgl / (2.0 * (i1 * rho - ml2)));
    jet.phi_prime = -(1.0 + c) * params.inertia.z() * jet.omega3_eq;
  }

  // Self-check: the jet must zero the gradient of the combined invariant.
  const int n = state_dimension(kind);
  const Eigen::VectorXd x0 = pack_state(equilibrium, kind);
  const double step = 1e-6;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp(i) += step;
    xm(i) -= step;
    const double d =
        (energy_casimir(params, gains, jet, unpack_state(xp, kind), kind) -
         energy_casimir(params, gains, jet, unpack_state(xm, kind), kind)) /
        (2.0 * step);
    sq += d * d;
  }
  jet.equilibrium_gradient_norm = std::sqrt(sq);
  // Threshold scales with c: the invariant's magnitude (and hence the
  // finite-difference noise floor) grows linearly in c.
  if (jet.equilibrium_gradient_norm > 1e-8 * std::max(1.0, std::abs(c)))
    throw std::logic_error("first variation failed to zero the gradient");
  return jet;
}

HessianReport hessian_definiteness(const SystemParams& params,
                                   const ShapingGains& gains,
                                   const EnergyCasimirJet& jet,
                                   const ReducedState& equilibrium,
                                   ScenarioKind kind) {
  const int n = state_dimension(kind);
  const Eigen::VectorXd x0 = pack_state(equilibrium, kind);
  const double h = 1e-4;

  const auto eval = [&](const Eigen::VectorXd& x) {
    return energy_casimir(params, gains, jet, unpack_state(x, kind), kind);
  };
  const double f0 = eval(x0);

  HessianReport report;
  report.hessian.resize(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp(i) += h;
    xm(i) -= h;
    report.hessian(i, i) = (eval(xp) - 2.0 * f0 + eval(xm)) / (h * h);
    for (int j = i + 1; j < n; ++j) {
      Eigen::VectorXd xpp = x0, xpm = x0, xmp = x0, xmm = x0;
      xpp(i) += h; xpp(j) += h;
      xpm(i) += h; xpm(j) -= h;
      xmp(i) -= h; xmp(j) += h;
      xmm(i) -= h; xmm(j) -= h;
      const double mixed =
          (eval(xpp) - eval(xpm) - eval(xmp) + eval(xmm)) / (4.0 * h * h);
      report.hessian(i, j) = mixed;
      report.hessian(j, i) = mixed;
    }
  }

  // Minors of the diagonally equilibrated matrix: dimensionless, so one
  // threshold works across the very different block scales.
  Eigen::VectorXd scale(n);
  for (int i = 0; i < n; ++i)
    scale(i) = 1.0 / std::sqrt(std::max(std::abs(report.hessian(i, i)), 1e-30));
  const Eigen::MatrixXd normalized =
      scale.asDiagonal() * report.hessian * scale.asDiagonal();

  report.leading_minors.resize(n);
  bool definite = true;
  for (int k = 1; k <= n; ++k) {
    const double minor = normalized.topLeftCorner(k, k).determinant();
    report.leading_minors(k - 1) = minor;
    if (!(minor > 1e-10)) definite = false;
  }
  report.positive_definite = definite;
  return report;
}

namespace {

int resolve_thread_count(int max_threads, int n_cells) {
  int threads = max_threads > 0 ? max_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EPMATCH_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) threads = std::min<long>(threads, cap);
  }
  return std::max(1, std::min(threads, n_cells));
}

}  // namespace

std::vector<StabilityCell> stability_region(const SystemParams& params,
                                            ScenarioKind kind,
                                            const std::vector<double>& rho_grid,
                                            const std::vector<double>& c_grid,
                                            int max_threads) {
  const int n = static_cast<int>(rho_grid.size() * c_grid.size());
  std::vector<StabilityCell> cells(n);
  const int n_c = static_cast<int>(c_grid.size());

  const auto worker = [&](int begin, int stride) {
    for (int idx = begin; idx < n; idx += stride) {
      const double rho = rho_grid[idx / n_c];
      const double c = c_grid[idx % n_c];
      StabilityCell cell{rho, c, false};
      try {
        const ShapingGains gains = solve_matching(params, rho);
        const ReducedState eq = upright_equilibrium(kind);
        const EnergyCasimirJet jet = first_variation_solve(params, gains, eq, c, kind);
        cell.definite =
            hessian_definiteness(params, gains, jet, eq, kind).positive_definite;
      } catch (const std::exception&) {
        cell.definite = false;  // singular rho values count as not definite
      }
      cells[idx] = cell;
    }
  };

  const int threads = resolve_thread_count(max_threads, n);
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (auto& th : pool) th.join();
  }
  return cells;
}

PoissonGradientR4 fd_gradient(const ScalarFieldR4& f, const PoissonPointR4& z,
                              double step) {
  PoissonGradientR4 g;
  const auto diff = [&](auto member) {
    PoissonPointR4 zp = z, zm = z;
    member(zp) += step;
    member(zm) -= step;
    return (f(zp) - f(zm)) / (2.0 * step);
  };
  for (int i = 0; i < 3; ++i) {
    g.mu(i) = diff([i](PoissonPointR4& q) -> double& { return q.mu(i); });
    g.p(i) = diff([i](PoissonPointR4& q) -> double& { return q.p(i); });
    g.gamma(i) = diff([i](PoissonPointR4& q) -> double& { return q.gamma(i); });
  }
  g.h = diff([](PoissonPointR4& q) -> double& { return q.h; });
  return g;
}

PoissonGradientR3 fd_gradient(const ScalarFieldR3& f, const PoissonPointR3& z,
                              double step) {
  PoissonGradientR3 g;
  const auto diff = [&](auto member) {
    PoissonPointR3 zp = z, zm = z;
    member(zp) += step;
    member(zm) -= step;
    return (f(zp) - f(zm)) / (2.0 * step);
  };
  for (int i = 0; i < 3; ++i) {
    g.mu(i) = diff([i](PoissonPointR3& q) -> double& { return q.mu(i); });
    g.p(i) = diff([i](PoissonPointR3& q) -> double& { return q.p(i); });
    g.gamma(i) = diff([i](PoissonPointR3& q) -> double& { return q.gamma(i); });
  }
  return g;
}

double lie_poisson_bracket(const PoissonGradientR4& df, const PoissonGradientR4& dg,
                           const PoissonPointR4& z) {
  const double term_mu = z.mu.dot(df.mu.cross(dg.mu));
  const double term_p = z.p.dot(df.mu.cross(dg.p) - dg.mu.cross(df.p));
  const double term_gamma = z.gamma.dot(df.mu.cross(dg.gamma) + dg.h * df.p -
                                        dg.mu.cross(df.gamma) - df.h * dg.p);
  return -(term_mu + term_p + term_gamma);
}

double lie_poisson_bracket(const PoissonGradientR3& df, const PoissonGradientR3& dg,
                           const PoissonPointR3& z) {
  const double term_mu = z.mu.dot(df.mu.cross(dg.mu));
  const double term_p = z.p.dot(df.mu.cross(dg.p) - dg.mu.cross(df.p));
  const double term_gamma =
      z.gamma.dot(df.mu.cross(dg.gamma) - dg.mu.cross(df.gamma));
  return -(term_mu + term_p + term_gamma);
}

double lie_poisson_bracket(const ScalarFieldR4& f, const ScalarFieldR4& g,
                           const PoissonPointR4& z) {
  return lie_poisson_bracket(fd_gradient(f, z), fd_gradient(g, z), z);
}

double lie_poisson_bracket(const ScalarFieldR3& f, const ScalarFieldR3& g,
                           const PoissonPointR3& z) {
  return lie_poisson_bracket(fd_gradient(f, z), fd_gradient(g, z), z);
}

}  // namespace epmatch
