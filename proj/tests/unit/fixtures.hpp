#pragma once

#include <cmath>
#include <numbers>

#include "poissonloc/geometry.hpp"
#include "poissonloc/signal.hpp"

namespace poissonloc::testing {

// Reference configuration: source at the origin, sensors 8.5 away at 0, 90
// and 225 degrees, lambda0 = 1, lambda1 = 2, nu = 1, T = 10, Theta = (-1,1)^2.
inline SensorArray reference_array(double horizon = 10.0) {
    const double r = 8.5;
    const double a = 5.0 * std::numbers::pi / 4.0;
    return SensorArray({{r, 0.0}, {0.0, r}, {r * std::cos(a), r * std::sin(a)}}, 1.0, 0.1,
                       ParameterRectangle{-1.0, 1.0, -1.0, 1.0}, horizon);
}

inline SignalModel reference_model(double n = 1.0) {
    return SignalModel(1.0, ConstantForm{2.0}, n);
}

}  // namespace poissonloc::testing
