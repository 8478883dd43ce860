#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "snnpid/network.hpp"
#include "snnpid/training.hpp"

namespace snnpid {

// Discrete-time double integrator with a constant input disturbance g:
// position x, velocity v, control input u acting as acceleration.
struct DoubleIntegratorState {
  double x = 0.0;
  double v = 0.0;
  double dt = 0.002;
  double g = 0.0;
};

struct DoubleIntegratorStepResult {
  DoubleIntegratorState state;
  double y;  // measured output (position)
};

DoubleIntegratorStepResult double_integrator_step(
    const DoubleIntegratorState& state, double u);

// Single-axis rotational rate dynamics: torque in, angular rate out.
struct RatePlantState {
  double omega = 0.0;  // rad/s
  double inertia = 1.0;
  double torque_disturbance = 0.0;
  double dt = 0.002;
};

struct RatePlantStepResult {
  RatePlantState state;
  double y;  // measured output (omega)
};

RatePlantStepResult rate_plant_step(const RatePlantState& state, double u);

// Conventional discrete PID used as the training target generator and the
// reference controller in comparisons.
struct PidGains {
  double kp = 1.0;
  double ki = 0.0;
  double kd = 0.0;
  double i_limit = 10.0;  // |integral term| clamp (anti-windup)
  double out_min = -1e9;
  double out_max = 1e9;
};

class PidOracle {
 public:
  PidOracle(PidGains gains, double dt) : gains_(gains), dt_(dt) {}

  // First-order backward difference on the error for the derivative term.
  // Output saturation is absorbed by the integral term (back-calculation) so
  // the per-term outputs always sum to the command exactly.
  ControllerOutput step(double setpoint, double measurement);
  void reset();

  const PidGains& gains() const { return gains_; }

 private:
  PidGains gains_;
  double dt_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool first_step_ = true;
};

// ---------------------------------------------------------------------------
// Self-recurrent integrator baseline: proportional-style groups whose neurons
// additionally receive their own previous spike weighted by w_rec. Tuned well
// it approximates integration; undertuned it leaks, overtuned it saturates.

struct RecurrentIntegratorParams {
  int groups = 40;
  EncoderParams enc;
  double w_in = 0.7;
  double w_out = 1.0;
  double w_rec = 0.0;
  CellParams pos, neg;
  double readout_decay = 0.95;
  double gain = 1.0;
  double threshold = 1.0;
  int refractory_steps = 0;
};

class RecurrentIntegratorPathway {
 public:
  RecurrentIntegratorPathway(RecurrentIntegratorParams params,
                             std::uint64_t seed);

  void reset(std::uint64_t seed);
  double step(double error);

  // Fraction of neurons that spiked on the most recent step.
  double last_activity() const { return last_activity_; }

 private:
  RecurrentIntegratorParams params_;
  std::vector<LifState> pos_, neg_;
  std::vector<double> z_pos_, z_neg_;  // previous spikes for the recurrence
  double r_pos_ = 0.0, r_neg_ = 0.0;
  std::vector<RngStream> rng_;
  double last_activity_ = 0.0;
};

// ---------------------------------------------------------------------------
// Closed-loop episodes

struct Trajectory {
  std::vector<double> t, setpoint, y, u, p_term, i_term, d_term, error;
  bool diverged = false;  // aborted on numeric overflow; prefix retained

  std::size_t size() const { return t.size(); }
};

using ControllerFn = std::function<ControllerOutput(double setpoint, double measurement)>;
using SetpointFn = std::function<double(double t)>;

// measure -> control -> apply, one controller tick per plant step. Aborts
// (keeping the prefix) if the output leaves [-1e6, 1e6] or goes non-finite.
Trajectory run_episode(DoubleIntegratorState plant, const ControllerFn& controller,
                       const SetpointFn& setpoint, int steps);
Trajectory run_episode(RatePlantState plant, const ControllerFn& controller,
                       const SetpointFn& setpoint, int steps);

// Mean error over the final fraction of the episode.
double steady_state_error(const Trajectory& traj, double tail_fraction = 0.2);

// First time after which |error| stays below the band; -1 if never.
double settle_time(const Trajectory& traj, double band);

// ---------------------------------------------------------------------------
// Derivative frequency sweep

struct SweepPoint {
  double freq_hz;
  double mse;
  double pearson_loss;
};

// Feeds A*sin(2*pi*f*t) to the derivative pathway and scores the output
// against the analytic derivative. Metrics start after a short settle window
// so the reset transient (common to every frequency) does not dominate.
std::vector<SweepPoint> derivative_sine_sweep(const PidNetworkParams& params,
                                              std::span<const double> freqs_hz,
                                              double amplitude, int steps,
                                              std::uint64_t seed,
                                              int warmup_steps = 50);

// Sine-derivative dataset for training the D pathway on a frequency band.
std::vector<TrainingSequence> make_sine_derivative_dataset(
    double band_lo_hz, double band_hi_hz, int sequences, double seconds,
    double dt, double amplitude, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic flight logs

enum class PlantKind { DoubleIntegrator, Rate };

struct SynthConfig {
  PlantKind plant = PlantKind::DoubleIntegrator;
  PidGains gains{25.0, 10.0, 7.0};
  double dt = 0.002;
  int sequences = 16;
  double seconds = 4.0;
  std::uint64_t seed = 1;
  // excitation: smoothed random setpoint steps plus a disturbance sweep
  double setpoint_mag = 0.3;
  double setpoint_hold_s = 0.8;
  double setpoint_tau_s = 0.15;
  double disturbance_lo = 1.0;
  double disturbance_hi = 6.0;
};

// Runs the PID oracle in closed loop with rich excitation and logs its
// per-term outputs; the spiking controller trains against these.
std::vector<TrainingSequence> make_synthetic_dataset(const SynthConfig& config);

}  // namespace snnpid
