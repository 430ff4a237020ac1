#pragma once

#include <functional>
#include <vector>

#include "epmatch/matching.hpp"

namespace epmatch {

/// Energy of the shaped system, conserved along the closed loop.
double energy_controlled(const SystemParams& params, const ShapingGains& gains,
                         const ReducedState& s);

/// Factor multiplying gravity in the decoupled subsystem: rho/(rho - m) for
/// the pendulum, I1 rho/(I1 rho - m^2 l^2) for the top.
double modified_gravity_factor(const SystemParams& params, const ShapingGains& gains,
                               ScenarioKind kind);

/// Scenario-specific auxiliary invariant (the decoupled subsystem's energy
/// under the modified gravity). Throws where the factor is singular.
double aux_invariant(const SystemParams& params, const ShapingGains& gains,
                     const ReducedState& s, ScenarioKind kind);

/// The three Casimir invariants of the closed loop, in velocity variables:
/// (|p|^2, p . Gamma, |Gamma|^2) with p the shaped translational momentum.
Vec3 casimir_invariants(const SystemParams& params, const ShapingGains& gains,
                        const ReducedState& s);

/// Conserved spin component (heavy top with equal transverse inertias).
double omega3_invariant(const ReducedState& s);

/// Local data of the Casimir-modifying functions at the equilibrium: first
/// and second derivatives of Phi in the Casimir values, and of phi in Omega3.
struct EnergyCasimirJet {
  double c{0.0};
  Vec3 d_phi{Vec3::Zero()};
  Mat3 d2_phi{Mat3::Zero()};
  double phi_prime{0.0};
  double phi_double_prime{0.0};
  Vec3 casimir_eq{Vec3::Zero()};
  double omega3_eq{0.0};
  /// Norm of the numeric gradient of the combined invariant at the
  /// equilibrium, recorded by first_variation_solve as a self-check.
  double equilibrium_gradient_norm{0.0};
};

/// Upright equilibrium of the closed loop; spin_rate sets Omega3 for the top.
ReducedState upright_equilibrium(ScenarioKind kind, double spin_rate = 0.0);

/// Combined invariant: shaped energy + c * auxiliary invariant + the local
/// quadratic model of Phi(C1, C2, C3) + phi(Omega3).
double energy_casimir(const SystemParams& params, const ShapingGains& gains,
                      const EnergyCasimirJet& jet, const ReducedState& s,
                      ScenarioKind kind);

/// Solves the first-variation conditions at the equilibrium for given c and
/// verifies that the numeric gradient of the combined invariant vanishes.
EnergyCasimirJet first_variation_solve(const SystemParams& params,
                                       const ShapingGains& gains,
                                       const ReducedState& equilibrium, double c,
                                       ScenarioKind kind);

struct HessianReport {
  Eigen::MatrixXd hessian;
  /// Leading principal minors of the diagonally equilibrated Hessian.
  Eigen::VectorXd leading_minors;
  bool positive_definite{false};
};

/// Numeric Hessian of the combined invariant at the equilibrium (central
/// second differences, step 1e-4). Definiteness is decided by the leading
/// principal minors of the scale-normalized Hessian against a 1e-10
/// threshold.
HessianReport hessian_definiteness(const SystemParams& params,
                                   const ShapingGains& gains,
                                   const EnergyCasimirJet& jet,
                                   const ReducedState& equilibrium,
                                   ScenarioKind kind);

struct StabilityCell {
  double rho{0.0};
  double c{0.0};
  bool definite{false};
};

/// Scans the (rho, c) grid, running the first variation and the Hessian test
/// at every cell. max_threads <= 0 means use all hardware threads; the
/// EPMATCH_THREADS environment variable caps it either way.
std::vector<StabilityCell> stability_region(const SystemParams& params,
                                            ScenarioKind kind,
                                            const std::vector<double>& rho_grid,
                                            const std::vector<double>& c_grid,
                                            int max_threads = 0);

// Dimension of the state block (Omega, v, Gamma) used for gradients and
// Hessians: 8 in degenerate mode, 9 otherwise.
int state_dimension(ScenarioKind kind);
Eigen::VectorXd pack_state(const ReducedState& s, ScenarioKind kind);
ReducedState unpack_state(const Eigen::VectorXd& x, ScenarioKind kind,
                          double height = 0.0);

// Lie-Poisson brackets on the duals of the two semidirect-product algebras,
// written in the momentum/advected variables.

struct PoissonPointR4 {
  Vec3 mu{Vec3::Zero()};
  Vec3 p{Vec3::Zero()};
  Vec3 gamma{Vec3::Zero()};
  double h{0.0};
};

struct PoissonPointR3 {
  Vec3 mu{Vec3::Zero()};
  Vec3 p{Vec3::Zero()};
  Vec3 gamma{Vec3::Zero()};
};

struct PoissonGradientR4 {
  Vec3 mu{Vec3::Zero()};
  Vec3 p{Vec3::Zero()};
  Vec3 gamma{Vec3::Zero()};
  double h{0.0};
};

struct PoissonGradientR3 {
  Vec3 mu{Vec3::Zero()};
  Vec3 p{Vec3::Zero()};
  Vec3 gamma{Vec3::Zero()};
};

using ScalarFieldR4 = std::function<double(const PoissonPointR4&)>;
using ScalarFieldR3 = std::function<double(const PoissonPointR3&)>;

PoissonGradientR4 fd_gradient(const ScalarFieldR4& f, const PoissonPointR4& z,
                              double step = 1e-6);
PoissonGradientR3 fd_gradient(const ScalarFieldR3& f, const PoissonPointR3& z,
                              double step = 1e-6);

double lie_poisson_bracket(const PoissonGradientR4& df, const PoissonGradientR4& dg,
                           const PoissonPointR4& z);
double lie_poisson_bracket(const PoissonGradientR3& df, const PoissonGradientR3& dg,
                           const PoissonPointR3& z);

/// Bracket with central finite-difference gradients (step 1e-6).
double lie_poisson_bracket(const ScalarFieldR4& f, const ScalarFieldR4& g,
                           const PoissonPointR4& z);
double lie_poisson_bracket(const ScalarFieldR3& f, const ScalarFieldR3& g,
                           const PoissonPointR3& z);

}  // namespace epmatch
