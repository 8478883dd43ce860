#pragma once

#include <cmath>
#include <numbers>

namespace snnpid {

// Derivative of the arctan sigmoid, used as the surrogate for the Heaviside
// spike nonlinearity in the backward pass. Peaks at width/2 for u = 0 and
// decays quadratically in u.
inline double surrogate_spike_grad(double u, double width) {
  const double s = std::numbers::pi / 2.0 * width * u;
  return width / (2.0 * (1.0 + s * s));
}

// Antiderivative of surrogate_spike_grad: a smooth 0..1 sigmoid. Replaces the
// hard spike in the smooth forward mode used by gradient checks.
inline double surrogate_spike_value(double u, double width) {
  return std::atan(std::numbers::pi / 2.0 * width * u) / std::numbers::pi + 0.5;
}

}  // namespace snnpid
