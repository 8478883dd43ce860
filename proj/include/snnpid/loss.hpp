#pragma once

#include <span>
#include <vector>

#include "snnpid/param_spec.hpp"

namespace snnpid {

double mse(std::span<const double> x, std::span<const double> xhat);

// 1 - Pearson correlation between target x and estimate xhat; in [0, 2].
// Degenerate inputs (either standard deviation below 1e-8) score 1.
// Throws std::invalid_argument on length mismatch or length < 2.
double pearson_loss(std::span<const double> x, std::span<const double> xhat);

// Distance from v to the closed interval [lo, hi]; zero inside.
double interval_distance(double v, double lo, double hi);

// Linear exterior penalty: sum of interval distances of every trainable
// parameter to its feasible range.
double exterior_penalty(const PidNetworkParams& params);

// d(exterior_penalty)/d(param), accumulated into grad (zero_like-shaped).
void exterior_penalty_grad(const PidNetworkParams& params,
                           PidNetworkParams& grad);

// MSE + Pearson loss + exterior penalty.
double total_loss(std::span<const double> x, std::span<const double> xhat,
                  const PidNetworkParams& params);

// d(mse + pearson_loss)/d(xhat), accumulated into grad (same length as xhat).
// Returns the data-loss value so callers get loss and gradient in one pass.
double data_loss_and_grad(std::span<const double> x,
                          std::span<const double> xhat,
                          std::span<double> grad);

}  // namespace snnpid
