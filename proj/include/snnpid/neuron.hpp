#pragma once

#include <algorithm>

#include "snnpid/surrogate.hpp"

namespace snnpid {

// Per-neuron constants of the discrete-time current-based LIF. Decays are
// per-step factors in [0, 1]; threshold must be positive.
struct LifParams {
  double tau_mem = 0.9;  // membrane potential decay per step
  double tau_syn = 0.5;  // synaptic current decay per step
  double threshold = 1.0;
  int refractory_steps = 0;
};

struct LifState {
  double v = 0.0;  // membrane potential
  double i = 0.0;  // synaptic current
  int refrac_remaining = 0;
};

// Spike nonlinearity selector. Hard is the production dynamics (binary
// spikes); Smooth substitutes the arctan sigmoid so the whole step becomes
// differentiable, which gradient checks rely on. Smooth mode assumes
// refractory_steps == 0.
enum class SpikeMode { Hard, Smooth };

struct CellStepOut {
  double z;  // emitted spike: {0,1} in Hard mode, (0,1) in Smooth mode
  double u;  // membrane minus threshold before the reset
};

// Core CUBA-LIF update shared by every neuron in the artifact. The membrane
// integrates the pre-update current, then the current integrates the new
// weighted spike sum; a spike subtracts the threshold from the membrane (soft
// reset). During a refractory window the decay dynamics keep running but no
// spike is emitted.
inline CellStepOut cell_step(LifState& st, double tau_mem, double tau_syn,
                             double threshold, int refractory_steps,
                             double weighted_spike_sum, SpikeMode mode,
                             double surrogate_width) {
  st.v = tau_mem * st.v + st.i;
  st.i = tau_syn * st.i + weighted_spike_sum;
  const double u = st.v - threshold;
  if (mode == SpikeMode::Hard) {
    if (st.refrac_remaining > 0) {
      --st.refrac_remaining;
      return {0.0, u};
    }
    if (u > 0.0) {
      st.v -= threshold;
      st.refrac_remaining = refractory_steps;
      return {1.0, u};
    }
    return {0.0, u};
  }
  const double z = surrogate_spike_value(u, surrogate_width);
  st.v -= z * threshold;
  return {z, u};
}

struct LifStepResult {
  LifState state;
  bool spiked;
};

// One LIF step on a value-semantic state record.
inline LifStepResult lif_step(const LifState& state, const LifParams& params,
                              double weighted_spike_sum) {
  LifState next = state;
  const CellStepOut out =
      cell_step(next, params.tau_mem, params.tau_syn, params.threshold,
                params.refractory_steps, weighted_spike_sum, SpikeMode::Hard, 0.0);
  return {next, out.z != 0.0};
}

// Which output channel an IWTA neuron represents. A positive-side neuron gets
// more excitable on positive encoder spikes and less on negative ones; the
// negative side mirrors that.
enum class IwtaSide { Positive, Negative };

// LIF state extended with an input-adapted threshold.
struct IwtaState {
  LifState lif;
  double theta = 1.0;       // current adaptive threshold
  double theta_add = 0.0;   // threshold change per incoming spike
  double theta_base = 1.0;  // base threshold; clamp range is [0, 2*theta_base]
};

// Threshold update preceding the spike test. s_dec is the spike that lowers
// the threshold (the neuron's own channel), s_inc the one that raises it.
// theta_decay < 1 relaxes the threshold back toward theta_base (ALIF-like);
// the default 1 leaves it where the inputs put it.
inline double iwta_theta_update(double theta, double theta_base, double theta_add,
                                double theta_decay, double s_dec, double s_inc) {
  const double base = (theta_decay == 1.0)
                          ? theta
                          : theta_base + theta_decay * (theta - theta_base);
  return std::clamp(base + theta_add * (s_inc - s_dec), 0.0, 2.0 * theta_base);
}

struct IwtaStepResult {
  IwtaState state;
  bool spiked;
};

// IWTA neuron step: the encoder spikes first move the threshold, then the
// usual LIF dynamics run against the adapted value. The clamp to
// [0, 2*theta_base] bounds the accumulated error (integral anti-windup); at
// theta = 0 the neuron fires at the maximum rate set by the refractory
// period. The soft reset subtracts the adapted threshold that the spike test
// used. params.threshold is ignored in favor of the adaptive one.
inline IwtaStepResult iwta_step(const IwtaState& state, const LifParams& params,
                                double syn_drive, bool s_pos, bool s_neg,
                                IwtaSide side = IwtaSide::Positive,
                                double theta_decay = 1.0) {
  const double sp = s_pos ? 1.0 : 0.0;
  const double sn = s_neg ? 1.0 : 0.0;
  const double s_dec = (side == IwtaSide::Positive) ? sp : sn;
  const double s_inc = (side == IwtaSide::Positive) ? sn : sp;

  IwtaState next = state;
  next.theta = iwta_theta_update(state.theta, state.theta_base, state.theta_add,
                                 theta_decay, s_dec, s_inc);
  const CellStepOut out =
      cell_step(next.lif, params.tau_mem, params.tau_syn, next.theta,
                params.refractory_steps, syn_drive, SpikeMode::Hard, 0.0);
  return {next, out.z != 0.0};
}

// Non-spiking leaky integrator used as the output filter of each pathway.
inline double leaky_readout_step(double value, double decay,
                                 double weighted_spike_sum) {
  return decay * value + weighted_spike_sum;
}

}  // namespace snnpid
