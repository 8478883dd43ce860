#pragma once

#include <algorithm>

#include "snnpid/rng.hpp"

namespace snnpid {

// Linear tuning curve of a signed rate encoder: spike probability is
// clamp(sign*beta*value + alpha, 0, 1). Positive and negative channels share
// the same curve mirrored around zero.
struct EncoderParams {
  double alpha = 0.0;  // probability offset
  double beta = 1.0;   // probability gain per input unit; must be > 0
};

// One binary spike per channel for a single time step.
struct SpikePair {
  bool pos = false;
  bool neg = false;
};

// Per-step spike probability of one encoding channel. sign selects the
// positive (+1) or negative (-1) tuning curve.
inline double spike_probability(double value, const EncoderParams& params,
                                int sign) {
  return std::clamp(sign * params.beta * value + params.alpha, 0.0, 1.0);
}

inline SpikePair encode_from_draws(double value, const EncoderParams& params,
                                   double draw_pos, double draw_neg) {
  return {draw_pos < spike_probability(value, params, +1),
          draw_neg < spike_probability(value, params, -1)};
}

// Stochastic rate encoding; consumes exactly two draws in fixed (pos, neg)
// order so runs are reproducible.
inline SpikePair encode(double value, const EncoderParams& params,
                        RngStream& rng) {
  const double draw_pos = rng.next();
  const double draw_neg = rng.next();
  return encode_from_draws(value, params, draw_pos, draw_neg);
}

}  // namespace snnpid
