#include "snnpid/network.hpp"

#include <cassert>
#include <utility>

namespace snnpid {

int neuron_count(const PidNetworkParams& params) {
  return 2 * static_cast<int>(params.p.size()) +
         2 * static_cast<int>(params.i.size()) +
         4 * static_cast<int>(params.d.size());
}


PidNetworkParams default_network(int groups, double input_scale) {
  PidNetworkParams np;
  np.p.resize(groups);
  np.i.resize(groups);
  np.d.resize(groups);

  const double beta = 1.0 / input_scale;
  for (auto& g : np.p) {
    g.enc = {0.0, beta};
    g.w_in = 0.7;  // ~linear rate response up to the encoder's saturation
    g.w_out = 1.0;
    g.pos = g.neg = {0.8, 0.3};
  }
  np.p_readout_decay = 0.9;
  np.p_gain = 1.0;

  // Integral encoders idle at rate 0.5 so the IWTA neurons always see drive;
  // the error only moves the thresholds.
  const double i_beta = 0.5 / input_scale;
  for (auto& g : np.i) {
    g.enc = {0.5, i_beta};
    g.w_in = 0.25;
    g.w_out = 1.0;
    g.theta_add = 1e-3;
    g.pos = g.neg = {0.9, 0.5};
  }
  np.i_readout_decay = 0.9;
  np.i_gain = 2.0;

  // Derivative: the fast pair gets a quickly decaying synapse with a high
  // weight, the slow pair a slowly decaying synapse with a proportionally
  // lower weight. Scaling w_in by (1 - tau_syn) keeps the steady synaptic
  // current, and with it the whole static rate curve, identical between the
  // branches, so constants cancel in the decode exactly and only the lag
  // difference (the derivative) remains. The derivative encoder idles at 0.5
  // so both channels stay active around zero error. Output weights fold in
  // the readout-decay normalization.
  const double tau_syn_fast = 0.3;
  const double tau_syn_slow = 0.95;
  // high membrane tau with sub-threshold steady current keeps the rate curve
  // close to linear over the whole probability range
  const double tau_mem_d = 0.96;
  const double w_eff = 1.0;  // common steady current per unit probability
  np.d_readout_decay_fast = 0.85;
  np.d_readout_decay_slow = 0.97;
  const double w_out_slow = (1.0 - np.d_readout_decay_slow) /
                            (1.0 - np.d_readout_decay_fast);
  for (auto& g : np.d) {
    g.enc = {0.5, 0.5 * beta};
    g.w_in_fast = w_eff * (1.0 - tau_syn_fast);
    g.w_out_fast = 1.0;
    g.w_in_slow = w_eff * (1.0 - tau_syn_slow);
    g.w_out_slow = w_out_slow;
    g.fast_pos = g.fast_neg = {tau_mem_d, tau_syn_fast};
    g.slow_pos = g.slow_neg = {tau_mem_d, tau_syn_slow};
  }
  np.d_gain = 1.0;
  return np;
}

// ---------------------------------------------------------------------------
// Tapes

void CellTape::resize(std::size_t n) {
  v.resize(n);
  i.resize(n);
  u.resize(n);
  z.resize(n);
}

void IwtaCellTape::resize(std::size_t n) {
  cell.resize(n);
  theta_pre.resize(n);
  theta_eff.resize(n);
}

void EncTape::resize(std::size_t n) {
  q_pos.resize(n);
  q_neg.resize(n);
  s_pos.resize(n);
  s_neg.resize(n);
}

void PTape::resize(std::size_t groups, std::size_t n) {
  enc.resize(groups);
  pos.resize(groups);
  neg.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    enc[g].resize(n);
    pos[g].resize(n);
    neg[g].resize(n);
  }
  r_pos.resize(n + 1);
  r_neg.resize(n + 1);
  y.resize(n);
}

void ITape::resize(std::size_t groups, std::size_t n) {
  enc.resize(groups);
  pos.resize(groups);
  neg.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    enc[g].resize(n);
    pos[g].resize(n);
    neg[g].resize(n);
  }
  r_pos.resize(n + 1);
  r_neg.resize(n + 1);
  y.resize(n);
}

void DTape::resize(std::size_t groups, std::size_t n) {
  enc.resize(groups);
  fast_pos.resize(groups);
  fast_neg.resize(groups);
  slow_pos.resize(groups);
  slow_neg.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    enc[g].resize(n);
    fast_pos[g].resize(n);
    fast_neg[g].resize(n);
    slow_pos[g].resize(n);
    slow_neg[g].resize(n);
  }
  rf_pos.resize(n + 1);
  rf_neg.resize(n + 1);
  rs_pos.resize(n + 1);
  rs_neg.resize(n + 1);
  y.resize(n);
}

// ---------------------------------------------------------------------------
// Forward dynamics

namespace {

struct EncStep {
  double q_pos, q_neg;  // pre-clamp probabilities
  double s_pos, s_neg;  // emitted spikes (real-valued in Smooth mode)
};

inline EncStep encode_step(const EncoderParams& enc, double error,
                           RngStream& rng, bool mirror, SpikeMode mode) {
  double draw_pos = rng.next();
  double draw_neg = rng.next();
  if (mirror) std::swap(draw_pos, draw_neg);
  EncStep out;
  out.q_pos = enc.beta * error + enc.alpha;
  out.q_neg = -enc.beta * error + enc.alpha;
  const double p_pos = std::clamp(out.q_pos, 0.0, 1.0);
  const double p_neg = std::clamp(out.q_neg, 0.0, 1.0);
  if (mode == SpikeMode::Hard) {
    out.s_pos = draw_pos < p_pos ? 1.0 : 0.0;
    out.s_neg = draw_neg < p_neg ? 1.0 : 0.0;
  } else {
    out.s_pos = p_pos;
    out.s_neg = p_neg;
  }
  return out;
}

inline void record_cell(CellTape& tape, std::size_t t, const LifState& before,
                        const CellStepOut& out) {
  tape.v[t] = before.v;
  tape.i[t] = before.i;
  tape.u[t] = out.u;
  tape.z[t] = out.z;
}

}  // namespace

double step_p_pathway(const PidNetworkParams& np, PPathwayState& st,
                      std::span<RngStream> rng, bool mirror, double error,
                      SpikeMode mode, double surrogate_width, PTape* tape,
                      std::size_t t) {
  const std::size_t groups = np.p.size();
  assert(rng.size() == groups);
  const double inv_n = groups > 0 ? 1.0 / static_cast<double>(groups) : 0.0;

  double sum_pos = 0.0, sum_neg = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const PGroupParams& gp = np.p[g];
    const EncStep enc = encode_step(gp.enc, error, rng[g], mirror, mode);

    const LifState pos_before = st.pos[g];
    const CellStepOut zp =
        cell_step(st.pos[g], gp.pos.tau_mem, gp.pos.tau_syn, np.threshold,
                  np.refractory_steps, gp.w_in * enc.s_pos, mode, surrogate_width);
    const LifState neg_before = st.neg[g];
    const CellStepOut zn =
        cell_step(st.neg[g], gp.neg.tau_mem, gp.neg.tau_syn, np.threshold,
                  np.refractory_steps, gp.w_in * enc.s_neg, mode, surrogate_width);

    sum_pos += gp.w_out * zp.z;
    sum_neg += gp.w_out * zn.z;

    if (tape) {
      EncTape& et = tape->enc[g];
      et.q_pos[t] = enc.q_pos;
      et.q_neg[t] = enc.q_neg;
      et.s_pos[t] = enc.s_pos;
      et.s_neg[t] = enc.s_neg;
      record_cell(tape->pos[g], t, pos_before, zp);
      record_cell(tape->neg[g], t, neg_before, zn);
    }
  }

  if (tape) {
    tape->r_pos[t] = st.r_pos;
    tape->r_neg[t] = st.r_neg;
  }
  st.r_pos = leaky_readout_step(st.r_pos, np.p_readout_decay, sum_pos * inv_n);
  st.r_neg = leaky_readout_step(st.r_neg, np.p_readout_decay, sum_neg * inv_n);
  const double y = np.p_gain * (st.r_pos - st.r_neg);
  if (tape) {
    tape->r_pos[t + 1] = st.r_pos;
    tape->r_neg[t + 1] = st.r_neg;
    tape->y[t] = y;
  }
  return y;
}

double step_i_pathway(const PidNetworkParams& np, IPathwayState& st,
                      std::span<RngStream> rng, bool mirror, double error,
                      SpikeMode mode, double surrogate_width, ITape* tape,
                      std::size_t t) {
  const std::size_t groups = np.i.size();
  assert(rng.size() == groups);
  const double inv_n = groups > 0 ? 1.0 / static_cast<double>(groups) : 0.0;

  double sum_pos = 0.0, sum_neg = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const IGroupParams& gp = np.i[g];
    const EncStep enc = encode_step(gp.enc, error, rng[g], mirror, mode);
    const double drive = gp.w_in * (enc.s_pos + enc.s_neg);

    // Threshold update first: this step's encoder spikes set the threshold
    // the spike test (and soft reset) use.
    IwtaState& pos = st.pos[g];
    const double pos_pre =
        ((np.theta_decay == 1.0)
             ? pos.theta
             : pos.theta_base + np.theta_decay * (pos.theta - pos.theta_base)) +
        gp.theta_add * (enc.s_neg - enc.s_pos);
    pos.theta = std::clamp(pos_pre, 0.0, 2.0 * pos.theta_base);
    const LifState pos_before = pos.lif;
    const CellStepOut zp =
        cell_step(pos.lif, gp.pos.tau_mem, gp.pos.tau_syn, pos.theta,
                  np.refractory_steps, drive, mode, surrogate_width);

    IwtaState& neg = st.neg[g];
    const double neg_pre =
        ((np.theta_decay == 1.0)
             ? neg.theta
             : neg.theta_base + np.theta_decay * (neg.theta - neg.theta_base)) +
        gp.theta_add * (enc.s_pos - enc.s_neg);
    neg.theta = std::clamp(neg_pre, 0.0, 2.0 * neg.theta_base);
    const LifState neg_before = neg.lif;
    const CellStepOut zn =
        cell_step(neg.lif, gp.neg.tau_mem, gp.neg.tau_syn, neg.theta,
                  np.refractory_steps, drive, mode, surrogate_width);

    sum_pos += gp.w_out * zp.z;
    sum_neg += gp.w_out * zn.z;

    if (tape) {
      EncTape& et = tape->enc[g];
      et.q_pos[t] = enc.q_pos;
      et.q_neg[t] = enc.q_neg;
      et.s_pos[t] = enc.s_pos;
      et.s_neg[t] = enc.s_neg;
      record_cell(tape->pos[g].cell, t, pos_before, zp);
      tape->pos[g].theta_pre[t] = pos_pre;
      tape->pos[g].theta_eff[t] = pos.theta;
      record_cell(tape->neg[g].cell, t, neg_before, zn);
      tape->neg[g].theta_pre[t] = neg_pre;
      tape->neg[g].theta_eff[t] = neg.theta;
    }
  }

  if (tape) {
    tape->r_pos[t] = st.r_pos;
    tape->r_neg[t] = st.r_neg;
  }
  st.r_pos = leaky_readout_step(st.r_pos, np.i_readout_decay, sum_pos * inv_n);
  st.r_neg = leaky_readout_step(st.r_neg, np.i_readout_decay, sum_neg * inv_n);
  const double y = np.i_gain * (st.r_pos - st.r_neg);
  if (tape) {
    tape->r_pos[t + 1] = st.r_pos;
    tape->r_neg[t + 1] = st.r_neg;
    tape->y[t] = y;
  }
  return y;
}

double step_d_pathway(const PidNetworkParams& np, DPathwayState& st,
                      std::span<RngStream> rng, bool mirror, double error,
                      SpikeMode mode, double surrogate_width, DTape* tape,
                      std::size_t t) {
  const std::size_t groups = np.d.size();
  assert(rng.size() == groups);
  const double inv_n = groups > 0 ? 1.0 / static_cast<double>(groups) : 0.0;

  double sum_f_pos = 0.0, sum_f_neg = 0.0, sum_s_pos = 0.0, sum_s_neg = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const DGroupParams& gp = np.d[g];
    const EncStep enc = encode_step(gp.enc, error, rng[g], mirror, mode);

    const LifState fp_before = st.fast_pos[g];
    const CellStepOut zfp = cell_step(
        st.fast_pos[g], gp.fast_pos.tau_mem, gp.fast_pos.tau_syn, np.threshold,
        np.refractory_steps, gp.w_in_fast * enc.s_pos, mode, surrogate_width);
    const LifState fn_before = st.fast_neg[g];
    const CellStepOut zfn = cell_step(
        st.fast_neg[g], gp.fast_neg.tau_mem, gp.fast_neg.tau_syn, np.threshold,
        np.refractory_steps, gp.w_in_fast * enc.s_neg, mode, surrogate_width);
    const LifState sp_before = st.slow_pos[g];
    const CellStepOut zsp = cell_step(
        st.slow_pos[g], gp.slow_pos.tau_mem, gp.slow_pos.tau_syn, np.threshold,
        np.refractory_steps, gp.w_in_slow * enc.s_pos, mode, surrogate_width);
    const LifState sn_before = st.slow_neg[g];
    const CellStepOut zsn = cell_step(
        st.slow_neg[g], gp.slow_neg.tau_mem, gp.slow_neg.tau_syn, np.threshold,
        np.refractory_steps, gp.w_in_slow * enc.s_neg, mode, surrogate_width);

    sum_f_pos += gp.w_out_fast * zfp.z;
    sum_f_neg += gp.w_out_fast * zfn.z;
    sum_s_pos += gp.w_out_slow * zsp.z;
    sum_s_neg += gp.w_out_slow * zsn.z;

    if (tape) {
      EncTape& et = tape->enc[g];
      et.q_pos[t] = enc.q_pos;
      et.q_neg[t] = enc.q_neg;
      et.s_pos[t] = enc.s_pos;
      et.s_neg[t] = enc.s_neg;
      record_cell(tape->fast_pos[g], t, fp_before, zfp);
      record_cell(tape->fast_neg[g], t, fn_before, zfn);
      record_cell(tape->slow_pos[g], t, sp_before, zsp);
      record_cell(tape->slow_neg[g], t, sn_before, zsn);
    }
  }

  if (tape) {
    tape->rf_pos[t] = st.rf_pos;
    tape->rf_neg[t] = st.rf_neg;
    tape->rs_pos[t] = st.rs_pos;
    tape->rs_neg[t] = st.rs_neg;
  }
  st.rf_pos = leaky_readout_step(st.rf_pos, np.d_readout_decay_fast, sum_f_pos * inv_n);
  st.rf_neg = leaky_readout_step(st.rf_neg, np.d_readout_decay_fast, sum_f_neg * inv_n);
  st.rs_pos = leaky_readout_step(st.rs_pos, np.d_readout_decay_slow, sum_s_pos * inv_n);
  st.rs_neg = leaky_readout_step(st.rs_neg, np.d_readout_decay_slow, sum_s_neg * inv_n);
  const double y =
      np.d_gain * ((st.rf_pos - st.rf_neg) - (st.rs_pos - st.rs_neg));
  if (tape) {
    tape->rf_pos[t + 1] = st.rf_pos;
    tape->rf_neg[t + 1] = st.rf_neg;
    tape->rs_pos[t + 1] = st.rs_pos;
    tape->rs_neg[t + 1] = st.rs_neg;
    tape->y[t] = y;
  }
  return y;
}

std::vector<RngStream> make_pathway_streams(std::uint64_t seed, Pathway pathway,
                                            std::size_t groups) {
  const std::uint64_t base = static_cast<std::uint64_t>(pathway) << 20;
  std::vector<RngStream> streams;
  streams.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    streams.push_back(substream(seed, base + g));
  }
  return streams;
}

PPathwayState make_p_state(const PidNetworkParams& np) {
  PPathwayState st;
  st.pos.assign(np.p.size(), LifState{});
  st.neg.assign(np.p.size(), LifState{});
  return st;
}

IPathwayState make_i_state(const PidNetworkParams& np) {
  IPathwayState st;
  st.pos.resize(np.i.size());
  st.neg.resize(np.i.size());
  for (std::size_t g = 0; g < np.i.size(); ++g) {
    IwtaState fresh;
    fresh.lif = LifState{};
    fresh.theta = np.threshold;
    fresh.theta_base = np.threshold;
    fresh.theta_add = np.i[g].theta_add;
    st.pos[g] = fresh;
    st.neg[g] = fresh;
  }
  return st;
}

DPathwayState make_d_state(const PidNetworkParams& np) {
  DPathwayState st;
  st.fast_pos.assign(np.d.size(), LifState{});
  st.fast_neg.assign(np.d.size(), LifState{});
  st.slow_pos.assign(np.d.size(), LifState{});
  st.slow_neg.assign(np.d.size(), LifState{});
  return st;
}

// ---------------------------------------------------------------------------

PidNetwork::PidNetwork(PidNetworkParams params, std::uint64_t seed)
    : params_(std::move(params)), seed_(seed) {
  reset();
}

void PidNetwork::reset() {
  p_state_ = make_p_state(params_);
  i_state_ = make_i_state(params_);
  d_state_ = make_d_state(params_);
  reseed_streams(seed_);
}

void PidNetwork::reset(std::uint64_t seed) {
  seed_ = seed;
  reset();
}

void PidNetwork::reseed_streams(std::uint64_t seed) {
  seed_ = seed;
  p_rng_ = make_pathway_streams(seed, Pathway::P, params_.p.size());
  i_rng_ = make_pathway_streams(seed, Pathway::I, params_.i.size());
  d_rng_ = make_pathway_streams(seed, Pathway::D, params_.d.size());
}

double PidNetwork::step_p(double error) {
  return step_p_pathway(params_, p_state_, p_rng_, mirror_, error, mode_,
                        width_, nullptr, 0);
}

double PidNetwork::step_i(double error) {
  return step_i_pathway(params_, i_state_, i_rng_, mirror_, error, mode_,
                        width_, nullptr, 0);
}

double PidNetwork::step_d(double error) {
  return step_d_pathway(params_, d_state_, d_rng_, mirror_, error, mode_,
                        width_, nullptr, 0);
}

ControllerOutput PidNetwork::step(double setpoint, double measurement) {
  const double error = setpoint - measurement;
  ControllerOutput out;
  out.p_term = step_p(error);
  out.i_term = step_i(error);
  out.d_term = step_d(error);
  out.total = out.p_term + out.i_term + out.d_term;
  return out;
}

}  // namespace snnpid
