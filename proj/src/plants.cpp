#include "snnpid/plants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace snnpid {

DoubleIntegratorStepResult double_integrator_step(
    const DoubleIntegratorState& state, double u) {
  DoubleIntegratorState next = state;
  const double a = u - state.g;
  next.x = state.x + state.dt * state.v + 0.5 * state.dt * state.dt * a;
  next.v = state.v + state.dt * a;
  return {next, state.x};
}

RatePlantStepResult rate_plant_step(const RatePlantState& state, double u) {
  RatePlantState next = state;
  next.omega =
      state.omega + state.dt * (u + state.torque_disturbance) / state.inertia;
  return {next, state.omega};
}

ControllerOutput PidOracle::step(double setpoint, double measurement) {
  const double e = setpoint - measurement;
  const double p = gains_.kp * e;

  integral_ += e * dt_;
  if (gains_.ki != 0.0) {
    const double bound = gains_.i_limit / std::abs(gains_.ki);
    integral_ = std::clamp(integral_, -bound, bound);
  }
  double i = gains_.ki * integral_;

  const double d =
      first_step_ ? 0.0 : gains_.kd * (e - prev_error_) / dt_;
  prev_error_ = e;
  first_step_ = false;

  double total = p + i + d;
  if (total > gains_.out_max || total < gains_.out_min) {
    // back-calculation: the integral absorbs the saturation so the terms
    // still sum to the emitted command
    const double clamped = std::clamp(total, gains_.out_min, gains_.out_max);
    i += clamped - total;
    if (gains_.ki != 0.0) integral_ = i / gains_.ki;
    total = clamped;
  }
  return {p, i, d, total};
}

void PidOracle::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  first_step_ = true;
}

// ---------------------------------------------------------------------------

RecurrentIntegratorPathway::RecurrentIntegratorPathway(
    RecurrentIntegratorParams params, std::uint64_t seed)
    : params_(params) {
  reset(seed);
}

void RecurrentIntegratorPathway::reset(std::uint64_t seed) {
  pos_.assign(params_.groups, LifState{});
  neg_.assign(params_.groups, LifState{});
  z_pos_.assign(params_.groups, 0.0);
  z_neg_.assign(params_.groups, 0.0);
  r_pos_ = r_neg_ = 0.0;
  rng_ = make_pathway_streams(seed, Pathway::I, params_.groups);
  last_activity_ = 0.0;
}

double RecurrentIntegratorPathway::step(double error) {
  const double inv_n = 1.0 / static_cast<double>(params_.groups);
  double sum_pos = 0.0, sum_neg = 0.0;
  int active = 0;
  for (int g = 0; g < params_.groups; ++g) {
    const SpikePair s = encode(error, params_.enc, rng_[g]);
    const double drive_pos =
        params_.w_in * (s.pos ? 1.0 : 0.0) + params_.w_rec * z_pos_[g];
    const double drive_neg =
        params_.w_in * (s.neg ? 1.0 : 0.0) + params_.w_rec * z_neg_[g];
    const CellStepOut zp =
        cell_step(pos_[g], params_.pos.tau_mem, params_.pos.tau_syn,
                  params_.threshold, params_.refractory_steps, drive_pos,
                  SpikeMode::Hard, 0.0);
    const CellStepOut zn =
        cell_step(neg_[g], params_.neg.tau_mem, params_.neg.tau_syn,
                  params_.threshold, params_.refractory_steps, drive_neg,
                  SpikeMode::Hard, 0.0);
    z_pos_[g] = zp.z;
    z_neg_[g] = zn.z;
    sum_pos += params_.w_out * zp.z;
    sum_neg += params_.w_out * zn.z;
    active += (zp.z != 0.0) + (zn.z != 0.0);
  }
  r_pos_ = leaky_readout_step(r_pos_, params_.readout_decay, sum_pos * inv_n);
  r_neg_ = leaky_readout_step(r_neg_, params_.readout_decay, sum_neg * inv_n);
  last_activity_ =
      static_cast<double>(active) / (2.0 * static_cast<double>(params_.groups));
  return params_.gain * (r_pos_ - r_neg_);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kDivergenceBound = 1e6;

template <typename Plant, typename StepFn>
Trajectory run_episode_impl(Plant plant, StepFn plant_step,
                            const ControllerFn& controller,
                            const SetpointFn& setpoint_fn, int steps,
                            double dt) {
  Trajectory traj;
  traj.t.reserve(steps);
  double measured = plant_step(plant, 0.0).y;  // read-only probe of y(0)
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const double sp = setpoint_fn(t);
    const ControllerOutput out = controller(sp, measured);
    traj.t.push_back(t);
    traj.setpoint.push_back(sp);
    traj.y.push_back(measured);
    traj.u.push_back(out.total);
    traj.p_term.push_back(out.p_term);
    traj.i_term.push_back(out.i_term);
    traj.d_term.push_back(out.d_term);
    traj.error.push_back(sp - measured);
    if (!std::isfinite(out.total) || !std::isfinite(measured) ||
        std::abs(measured) > kDivergenceBound ||
        std::abs(out.total) > kDivergenceBound) {
      traj.diverged = true;
      return traj;
    }
    const auto next = plant_step(plant, out.total);
    plant = next.state;
    measured = plant_step(plant, 0.0).y;
  }
  return traj;
}

}  // namespace

Trajectory run_episode(DoubleIntegratorState plant,
                       const ControllerFn& controller,
                       const SetpointFn& setpoint, int steps) {
  const double dt = plant.dt;
  return run_episode_impl(
      plant,
      [](const DoubleIntegratorState& s, double u) {
        return double_integrator_step(s, u);
      },
      controller, setpoint, steps, dt);
}

Trajectory run_episode(RatePlantState plant, const ControllerFn& controller,
                       const SetpointFn& setpoint, int steps) {
  const double dt = plant.dt;
  return run_episode_impl(
      plant,
      [](const RatePlantState& s, double u) { return rate_plant_step(s, u); },
      controller, setpoint, steps, dt);
}

double steady_state_error(const Trajectory& traj, double tail_fraction) {
  if (traj.size() == 0) return 0.0;
  const std::size_t start = static_cast<std::size_t>(
      static_cast<double>(traj.size()) * (1.0 - tail_fraction));
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = start; k < traj.size(); ++k) {
    acc += traj.error[k];
    ++n;
  }
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

double settle_time(const Trajectory& traj, double band) {
  for (std::size_t k = 0; k < traj.size(); ++k) {
    bool settled = true;
    for (std::size_t j = k; j < traj.size(); ++j) {
      if (std::abs(traj.error[j]) > band) {
        settled = false;
        break;
      }
    }
    if (settled) return traj.t[k];
  }
  return -1.0;
}

// ---------------------------------------------------------------------------

std::vector<SweepPoint> derivative_sine_sweep(const PidNetworkParams& params,
                                              std::span<const double> freqs_hz,
                                              double amplitude, int steps,
                                              std::uint64_t seed,
                                              int warmup_steps) {
  std::vector<SweepPoint> out;
  out.reserve(freqs_hz.size());
  for (std::size_t f = 0; f < freqs_hz.size(); ++f) {
    const double omega = 2.0 * std::numbers::pi * freqs_hz[f];
    DPathwayState st = make_d_state(params);
    auto rng = make_pathway_streams(RngStream::mix(seed + f), Pathway::D,
                                    params.d.size());
    std::vector<double> output, target;
    output.reserve(steps - warmup_steps);
    target.reserve(steps - warmup_steps);
    for (int k = 0; k < steps; ++k) {
      const double t = k * params.dt;
      const double y = step_d_pathway(params, st, rng, false,
                                      amplitude * std::sin(omega * t),
                                      SpikeMode::Hard, 2.0, nullptr, 0);
      if (k >= warmup_steps) {
        output.push_back(y);
        target.push_back(amplitude * omega * std::cos(omega * t));
      }
    }
    out.push_back({freqs_hz[f], mse(target, output),
                   pearson_loss(target, output)});
  }
  return out;
}

std::vector<TrainingSequence> make_sine_derivative_dataset(
    double band_lo_hz, double band_hi_hz, int sequences, double seconds,
    double dt, double amplitude, std::uint64_t seed) {
  std::vector<TrainingSequence> out;
  RngStream rng = substream(seed, 0xd5);
  const int steps = static_cast<int>(seconds / dt);
  for (int s = 0; s < sequences; ++s) {
    const double f = sequences > 1
                         ? band_lo_hz + (band_hi_hz - band_lo_hz) * s /
                               static_cast<double>(sequences - 1)
                         : 0.5 * (band_lo_hz + band_hi_hz);
    const double phase = 2.0 * std::numbers::pi * rng.next();
    const double omega = 2.0 * std::numbers::pi * f;
    TrainingSequence seq;
    seq.dt = dt;
    for (int k = 0; k < steps; ++k) {
      const double t = k * dt;
      seq.time.push_back(t);
      // the sweep signal enters where the error normally does
      seq.setpoint.push_back(amplitude * std::sin(omega * t + phase));
      seq.gyro.push_back(0.0);
      seq.p_target.push_back(0.0);
      seq.i_target.push_back(0.0);
      seq.d_target.push_back(amplitude * omega * std::cos(omega * t + phase));
    }
    out.push_back(std::move(seq));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<TrainingSequence> make_synthetic_dataset(const SynthConfig& cfg) {
  std::vector<TrainingSequence> out;
  RngStream rng = substream(cfg.seed, 0xda7a);
  const int steps = static_cast<int>(cfg.seconds / cfg.dt);
  const int hold_steps =
      std::max(1, static_cast<int>(cfg.setpoint_hold_s / cfg.dt));
  const double smooth = std::exp(-cfg.dt / cfg.setpoint_tau_s);
  double t_base = 0.0;

  for (int s = 0; s < cfg.sequences; ++s) {
    const double disturbance =
        cfg.disturbance_lo +
        (cfg.disturbance_hi - cfg.disturbance_lo) * rng.next();
    PidOracle oracle(cfg.gains, cfg.dt);

    DoubleIntegratorState di;
    di.dt = cfg.dt;
    di.g = disturbance;
    di.x = cfg.setpoint_mag * (2.0 * rng.next() - 1.0);
    RatePlantState rp;
    rp.dt = cfg.dt;
    rp.torque_disturbance = disturbance;
    rp.omega = cfg.setpoint_mag * (2.0 * rng.next() - 1.0);

    TrainingSequence seq;
    seq.dt = cfg.dt;
    double sp_raw = 0.0, sp = 0.0;
    double measured = cfg.plant == PlantKind::DoubleIntegrator ? di.x : rp.omega;
    for (int k = 0; k < steps; ++k) {
      if (k % hold_steps == 0) {
        sp_raw = cfg.setpoint_mag * (2.0 * rng.next() - 1.0);
      }
      // first-order smoothing keeps the derivative target bounded
      sp = smooth * sp + (1.0 - smooth) * sp_raw;

      const ControllerOutput u = oracle.step(sp, measured);
      seq.time.push_back(t_base + k * cfg.dt);
      seq.setpoint.push_back(sp);
      seq.gyro.push_back(measured);
      seq.p_target.push_back(u.p_term);
      seq.i_target.push_back(u.i_term);
      seq.d_target.push_back(u.d_term);

      if (cfg.plant == PlantKind::DoubleIntegrator) {
        di = double_integrator_step(di, u.total).state;
        measured = di.x;
      } else {
        rp = rate_plant_step(rp, u.total).state;
        measured = rp.omega;
      }
    }
    out.push_back(std::move(seq));
    // keep the concatenated log monotone with a clear inter-sequence gap
    t_base += steps * cfg.dt + 10.0 * cfg.dt;
  }
  return out;
}

}  // namespace snnpid
