#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "snnpid/loss.hpp"
#include "snnpid/network.hpp"

namespace snnpid {

// One logged control sequence: inputs plus per-term targets of the reference
// controller, sampled on a fixed tick.
struct TrainingSequence {
  double dt = 0.002;
  std::vector<double> time;
  std::vector<double> setpoint;
  std::vector<double> gyro;  // measured output
  std::vector<double> p_target, i_target, d_target;

  std::size_t size() const { return setpoint.size(); }
  std::vector<double> errors() const;
};

enum class Optimizer {
  Adam,        // per-coordinate normalized steps; handles the scale spread
  MomentumGd,  // plain gradient descent with momentum
};

struct TrainConfig {
  int epochs = 80;
  int horizon = 0;  // BPTT window length; 0 trains whole sequences
  int batch_size = 8;
  double learning_rate = 2e-3;
  Optimizer optimizer = Optimizer::Adam;
  double momentum = 0.9;        // beta1 for Adam
  double adam_beta2 = 0.999;
  double grad_clip = 1.0;  // per-head L2 clip on each update; 0 disables
  double surrogate_width = 2.0;
  std::uint64_t seed = 1;
  bool train_p = true, train_i = true, train_d = true;
  SpikeMode mode = SpikeMode::Hard;  // Smooth only for gradient diagnostics
};

struct EpochLosses {
  double p = 0.0, i = 0.0, d = 0.0;  // full per-head cost (data + penalty)
};

struct TrainResult {
  std::vector<EpochLosses> history;
  bool nan_abort = false;
  int nan_epoch = -1;
  int nan_sequence = -1;
};

// Unrolls the controller over every sequence and descends the per-head cost
// (each pathway against its own logged target). Encoder noise is redrawn per
// sequence per epoch and held fixed inside each backward pass. Updates the
// network parameters in place and leaves its dynamic state reset.
TrainResult bptt_train(PidNetwork& network,
                       const std::vector<TrainingSequence>& dataset,
                       const TrainConfig& config);

// Forward+backward of one pathway head over an error sequence starting from a
// fresh state. Accumulates parameter gradients into grad (zero_like-shaped)
// when non-null and returns the data loss (MSE + Pearson, no penalty).
// noise_seed selects the encoder draws; with the same seed the loss is
// reproducible, which the finite-difference gradient check relies on.
double head_run(const PidNetworkParams& params, Pathway head,
                std::span<const double> errors, std::span<const double> target,
                SpikeMode mode, double surrogate_width, std::uint64_t noise_seed,
                PidNetworkParams* grad, std::vector<double>* outputs = nullptr);

struct HeadEval {
  double mse = 0.0;
  double pearson_loss = 0.0;
  std::vector<double> output;
};

// Forward-only evaluation of one head against a target, hard spikes.
HeadEval evaluate_head(const PidNetworkParams& params, Pathway head,
                       std::span<const double> errors,
                       std::span<const double> target, std::uint64_t seed);

// Flight-log CSV: header `t_s,setpoint_radps,gyro_radps,p_out,i_out,d_out`,
// one row per control tick. Sequences are split at timestamp gaps larger than
// twice the tick; fragments shorter than 2 rows are dropped. Throws
// std::runtime_error with the offending line number on malformed rows,
// non-monotone timestamps or irregular cadence.
std::vector<TrainingSequence> load_flight_log(const std::string& path);

void write_flight_log(const std::string& path,
                      const std::vector<TrainingSequence>& sequences);

}  // namespace snnpid
