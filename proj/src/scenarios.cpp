#include "epmatch/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace epmatch {

namespace {

Vec3 tilted_vertical() {
  const double theta0 = M_PI / 4.0;
  const double phi0 = M_PI / 20.0;
  return Vec3(std::cos(theta0) * std::sin(phi0), std::sin(theta0) * std::sin(phi0),
              std::cos(phi0));
}

}  // namespace

Scenario scenario_spherical_pendulum() {
  Scenario sc;
  sc.name = "sp";
  sc.kind = ScenarioKind::SphericalPendulum;
  sc.params.top_mass = 0.14;
  sc.params.base_mass = 0.44;
  sc.params.length = 0.215;
  sc.params.gravity = 9.8;
  sc.params.axis = Vec3::UnitZ();
  const double ml2 = sc.params.top_mass * sc.params.length * sc.params.length;
  sc.params.inertia = Vec3(ml2, ml2, 0.0);
  sc.params.degenerate = true;
  sc.rho = 0.9 * sc.params.top_mass;
  sc.initial.omega = Vec3(0.1, 0.2, 0.0);
  sc.initial.v = Vec3::Zero();
  sc.initial.gamma = tilted_vertical();
  sc.initial.height = 0.0;
  sc.mode = ControlMode::Full;
  sc.t_end = 20.0;
  return sc;
}

Scenario scenario_heavy_top() {
  Scenario sc;
  sc.name = "ht";
  sc.kind = ScenarioKind::HeavyTop;
  sc.params.top_mass = 0.7;
  sc.params.base_mass = 0.44;
  sc.params.length = 0.215;
  sc.params.gravity = 9.8;
  sc.params.axis = Vec3::UnitZ();
  sc.params.inertia = Vec3(0.2, 0.2, 0.24);
  sc.params.degenerate = false;
  const double m = sc.params.top_mass;
  const double l = sc.params.length;
  sc.rho = 0.9 * m * m * l * l / sc.params.inertia.x();
  sc.initial.omega = Vec3(0.1, 0.2, 0.1);
  sc.initial.v = Vec3::Zero();
  sc.initial.gamma = tilted_vertical();
  sc.initial.height = 0.0;
  sc.mode = ControlMode::Full;
  sc.t_end = 30.0;
  return sc;
}

Scenario scenario_by_name(const std::string& name) {
  if (name == "sp") return scenario_spherical_pendulum();
  if (name == "ht") return scenario_heavy_top();
  throw std::invalid_argument("unknown scenario '" + name + "' (expected sp or ht)");
}

}  // namespace epmatch
