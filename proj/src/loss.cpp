#include "snnpid/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace snnpid {

namespace {
constexpr double kSigmaEps = 1e-8;

void check_pair(std::span<const double> x, std::span<const double> xhat) {
  if (x.size() != xhat.size()) {
    throw std::invalid_argument("series length mismatch");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("series must hold at least 2 samples");
  }
}
}  // namespace

double mse(std::span<const double> x, std::span<const double> xhat) {
  check_pair(x, xhat);
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = xhat[k] - x[k];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

double pearson_loss(std::span<const double> x, std::span<const double> xhat) {
  check_pair(x, xhat);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += xhat[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double a = x[k] - mx;
    const double b = xhat[k] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double sx = std::sqrt(sxx / n);
  const double sy = std::sqrt(syy / n);
  if (sx < kSigmaEps || sy < kSigmaEps) {
    return 1.0;  // treat rho as 0
  }
  return 1.0 - sxy / std::sqrt(sxx * syy);
}

double interval_distance(double v, double lo, double hi) {
  if (v < lo) return lo - v;
  if (v > hi) return v - hi;
  return 0.0;
}

double exterior_penalty(const PidNetworkParams& params) {
  PidNetworkParams copy = params;
  double acc = 0.0;
  for (const ParamView& view : trainable_params(copy)) {
    auto [lo, hi] = param_range(view.role, params.threshold);
    acc += interval_distance(*view.value, lo, hi);
  }
  return acc;
}

void exterior_penalty_grad(const PidNetworkParams& params,
                           PidNetworkParams& grad) {
  PidNetworkParams copy = params;
  auto values = trainable_params(copy);
  auto grads = trainable_params(grad);
  for (std::size_t k = 0; k < values.size(); ++k) {
    auto [lo, hi] = param_range(values[k].role, params.threshold);
    const double v = *values[k].value;
    if (v < lo) {
      *grads[k].value += -1.0;
    } else if (v > hi) {
      *grads[k].value += 1.0;
    }
  }
}

double total_loss(std::span<const double> x, std::span<const double> xhat,
                  const PidNetworkParams& params) {
  return mse(x, xhat) + pearson_loss(x, xhat) + exterior_penalty(params);
}

double data_loss_and_grad(std::span<const double> x,
                          std::span<const double> xhat,
                          std::span<double> grad) {
  check_pair(x, xhat);
  const std::size_t size = x.size();
  const double n = static_cast<double>(size);

  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    mx += x[k];
    my += xhat[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    const double a = x[k] - mx;
    const double b = xhat[k] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
    const double d = xhat[k] - x[k];
    sq += d * d;
  }

  for (std::size_t k = 0; k < size; ++k) {
    grad[k] += 2.0 * (xhat[k] - x[k]) / n;
  }

  const double mse_value = sq / n;
  const double sx = std::sqrt(sxx / n);
  const double sy = std::sqrt(syy / n);
  if (sx < kSigmaEps || sy < kSigmaEps) {
    return mse_value + 1.0;  // flat spot: no Pearson gradient
  }
  const double denom = std::sqrt(sxx * syy);
  const double rho = sxy / denom;
  // d rho / d xhat_k = (a_k - b_k * sxy / syy) / sqrt(sxx*syy); the mean
  // offsets cancel because the coefficients sum to zero.
  for (std::size_t k = 0; k < size; ++k) {
    const double a = x[k] - mx;
    const double b = xhat[k] - my;
    grad[k] -= (a - b * sxy / syy) / denom;
  }
  return mse_value + 1.0 - rho;
}

}  // namespace snnpid
