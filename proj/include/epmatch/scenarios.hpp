#pragma once

#include "epmatch/integrator.hpp"

namespace epmatch {

/// Inverted spherical pendulum on a movable base, stabilized with
/// rho = 0.9 m over a 20 s horizon.
Scenario scenario_spherical_pendulum();

/// Spinning symmetric top on a movable base, stabilized with
/// rho = 0.9 m^2 l^2 / I1 over a 30 s horizon.
Scenario scenario_heavy_top();

/// Lookup by CLI name ("sp" or "ht"); throws std::invalid_argument otherwise.
Scenario scenario_by_name(const std::string& name);

}  // namespace epmatch
