#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snnpid/encoding.hpp"
#include "snnpid/neuron.hpp"
#include "snnpid/rng.hpp"

namespace snnpid {

// Decay constants of one LIF cell; weights live at group level because the
// positive and negative sides must stay symmetric.
struct CellParams {
  double tau_mem = 0.9;
  double tau_syn = 0.5;
};

// One proportional group: encoder, a positive and a negative LIF, and the
// mirrored input/output weights shared by both sides.
struct PGroupParams {
  EncoderParams enc;
  double w_in = 1.0;
  double w_out = 1.0;
  CellParams pos, neg;
};

// One integral group: as PGroupParams plus the threshold update weight. Both
// encoder channels drive both IWTA neurons; the sign of the input is carried
// entirely by the threshold mechanism.
struct IGroupParams {
  EncoderParams enc;
  double w_in = 0.25;
  double w_out = 1.0;
  double theta_add = 1e-3;
  CellParams pos, neg;
};

// One derivative group: a shared encoder feeding a fast and a slow LIF pair.
// The derivative estimate is the fast readout minus the slow one.
struct DGroupParams {
  EncoderParams enc;
  double w_in_fast = 1.0;
  double w_out_fast = 1.0;
  double w_in_slow = 0.2;
  double w_out_slow = 1.0;
  CellParams fast_pos, fast_neg, slow_pos, slow_neg;
};

struct PidNetworkParams {
  double dt = 0.002;       // controller tick, 500 Hz nominal
  double threshold = 1.0;  // spike threshold of P/D cells and IWTA base value
  int refractory_steps = 0;
  double theta_decay = 1.0;  // 1 = adaptive thresholds hold their value

  std::vector<PGroupParams> p;
  std::vector<IGroupParams> i;
  std::vector<DGroupParams> d;

  double p_readout_decay = 0.9;
  double p_gain = 1.0;
  double i_readout_decay = 0.9;
  double i_gain = 1.0;
  double d_readout_decay_fast = 0.6;
  double d_readout_decay_slow = 0.9;
  double d_gain = 1.0;
};

// 2 neurons per P and I group, 4 per D group.
int neuron_count(const PidNetworkParams& params);

// Symmetric heuristic initialization for inputs in [-input_scale, input_scale].
// The integral encoders get a positive offset so they keep driving the IWTA
// neurons at zero error; everything here is a starting point for training.
PidNetworkParams default_network(int groups, double input_scale);

struct ControllerOutput {
  double p_term = 0.0;
  double i_term = 0.0;
  double d_term = 0.0;
  double total = 0.0;
};

// ---------------------------------------------------------------------------
// Pathway runtime state

struct PPathwayState {
  std::vector<LifState> pos, neg;
  double r_pos = 0.0, r_neg = 0.0;
};

struct IPathwayState {
  std::vector<IwtaState> pos, neg;
  double r_pos = 0.0, r_neg = 0.0;
};

struct DPathwayState {
  std::vector<LifState> fast_pos, fast_neg, slow_pos, slow_neg;
  double rf_pos = 0.0, rf_neg = 0.0;
  double rs_pos = 0.0, rs_neg = 0.0;
};

// ---------------------------------------------------------------------------
// Step tapes. The trainer records the forward pass into these and walks them
// backwards; all vectors are sized to the window length T (readouts T+1).

struct CellTape {
  std::vector<double> v, i;  // state at step start
  std::vector<double> u, z;  // pre-reset activation and emitted spike
  void resize(std::size_t n);
};

struct IwtaCellTape {
  CellTape cell;
  std::vector<double> theta_pre, theta_eff;  // threshold before/after clamp
  void resize(std::size_t n);
};

struct EncTape {
  std::vector<double> q_pos, q_neg;  // pre-clamp probabilities
  std::vector<double> s_pos, s_neg;  // emitted encoder spikes
  void resize(std::size_t n);
};

struct PTape {
  std::vector<EncTape> enc;
  std::vector<CellTape> pos, neg;
  std::vector<double> r_pos, r_neg;  // size T+1
  std::vector<double> y;
  void resize(std::size_t groups, std::size_t n);
};

struct ITape {
  std::vector<EncTape> enc;
  std::vector<IwtaCellTape> pos, neg;
  std::vector<double> r_pos, r_neg;
  std::vector<double> y;
  void resize(std::size_t groups, std::size_t n);
};

struct DTape {
  std::vector<EncTape> enc;
  std::vector<CellTape> fast_pos, fast_neg, slow_pos, slow_neg;
  std::vector<double> rf_pos, rf_neg, rs_pos, rs_neg;
  std::vector<double> y;
  void resize(std::size_t groups, std::size_t n);
};

// ---------------------------------------------------------------------------
// Single-step pathway dynamics. These are the only implementations of the
// forward pass: the runtime controller calls them without a tape, the trainer
// with one. rng must hold one stream per group; mirror swaps the (pos, neg)
// draw order, which negates the pathway output for negated inputs.

double step_p_pathway(const PidNetworkParams& np, PPathwayState& st,
                      std::span<RngStream> rng, bool mirror, double error,
                      SpikeMode mode, double surrogate_width, PTape* tape,
                      std::size_t t);

double step_i_pathway(const PidNetworkParams& np, IPathwayState& st,
                      std::span<RngStream> rng, bool mirror, double error,
                      SpikeMode mode, double surrogate_width, ITape* tape,
                      std::size_t t);

double step_d_pathway(const PidNetworkParams& np, DPathwayState& st,
                      std::span<RngStream> rng, bool mirror, double error,
                      SpikeMode mode, double surrogate_width, DTape* tape,
                      std::size_t t);

enum class Pathway { P, I, D };

// Stream ids are namespaced per pathway so changing one pathway's group count
// does not reshuffle the noise of the others.
std::vector<RngStream> make_pathway_streams(std::uint64_t seed, Pathway pathway,
                                            std::size_t groups);

// Fresh dynamic state sized for the given parameters: zero potentials,
// currents and readouts, IWTA thresholds at their base value.
PPathwayState make_p_state(const PidNetworkParams& np);
IPathwayState make_i_state(const PidNetworkParams& np);
DPathwayState make_d_state(const PidNetworkParams& np);

// ---------------------------------------------------------------------------

// The assembled controller. Single writer per instance; independent instances
// (axes, episodes) can run in parallel freely.
class PidNetwork {
 public:
  PidNetwork() = default;
  explicit PidNetwork(PidNetworkParams params, std::uint64_t seed = 0);

  // Zeroes all dynamic state, restores IWTA thresholds to base and re-derives
  // the RNG streams from the stored seed; same seed, same trajectory.
  void reset();
  void reset(std::uint64_t seed);

  // Repositions the encoder noise without touching the dynamic state.
  void reseed_streams(std::uint64_t seed);

  double step_p(double error);
  double step_i(double error);
  double step_d(double error);

  // error = setpoint - measurement; advances all three pathways one tick.
  ControllerOutput step(double setpoint, double measurement);

  void set_mirror_draws(bool mirror) { mirror_ = mirror; }
  // Smooth mode is a test hook: deterministic rate dynamics, no binary spikes.
  void set_spike_mode(SpikeMode mode, double surrogate_width = 2.0) {
    mode_ = mode;
    width_ = surrogate_width;
  }

  const PidNetworkParams& params() const { return params_; }
  PidNetworkParams& params() { return params_; }
  std::uint64_t seed() const { return seed_; }

  const PPathwayState& p_state() const { return p_state_; }
  const IPathwayState& i_state() const { return i_state_; }
  const DPathwayState& d_state() const { return d_state_; }

 private:
  PidNetworkParams params_;
  PPathwayState p_state_;
  IPathwayState i_state_;
  DPathwayState d_state_;
  std::vector<RngStream> p_rng_, i_rng_, d_rng_;
  std::uint64_t seed_ = 0;
  bool mirror_ = false;
  SpikeMode mode_ = SpikeMode::Hard;
  double width_ = 2.0;
};

}  // namespace snnpid
