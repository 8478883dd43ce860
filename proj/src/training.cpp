#include "snnpid/training.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "snnpid/surrogate.hpp"

namespace snnpid {

std::vector<double> TrainingSequence::errors() const {
  std::vector<double> e(setpoint.size());
  for (std::size_t k = 0; k < e.size(); ++k) {
    e[k] = setpoint[k] - gyro[k];
  }
  return e;
}

namespace {

// ---------------------------------------------------------------------------
// Backward passes. Each walks a recorded window in reverse, carrying adjoints
// of the pathway state, and accumulates parameter gradients. Window
// boundaries truncate the gradient flow (the carried-in adjoints start at
// zero); the forward state is carried by the caller.

void backward_p_window(const PidNetworkParams& np, const PTape& tape,
                       std::span<const double> errors,
                       std::span<const double> dJdy, double width,
                       PidNetworkParams& grad) {
  const std::size_t steps = dJdy.size();
  const std::size_t groups = np.p.size();
  const double inv_n = 1.0 / static_cast<double>(groups);
  const double theta = np.threshold;

  std::vector<double> lv_pos(groups, 0.0), li_pos(groups, 0.0);
  std::vector<double> lv_neg(groups, 0.0), li_neg(groups, 0.0);
  double lr_pos = 0.0, lr_neg = 0.0;

  for (std::size_t t = steps; t-- > 0;) {
    const double gy = dJdy[t];
    grad.p_gain += gy * (tape.r_pos[t + 1] - tape.r_neg[t + 1]);
    const double Lr_pos = lr_pos + gy * np.p_gain;
    const double Lr_neg = lr_neg - gy * np.p_gain;
    grad.p_readout_decay += Lr_pos * tape.r_pos[t] + Lr_neg * tape.r_neg[t];

    for (std::size_t g = 0; g < groups; ++g) {
      const PGroupParams& gp = np.p[g];
      PGroupParams& gg = grad.p[g];
      const EncTape& et = tape.enc[g];

      // positive cell
      {
        const CellTape& ct = tape.pos[g];
        double lz = Lr_pos * gp.w_out * inv_n;
        gg.w_out += Lr_pos * ct.z[t] * inv_n;
        const double lv_next = lv_pos[g];
        lz -= lv_next * theta;  // soft reset v' = a - z*theta
        const double lu = lz * surrogate_spike_grad(ct.u[t], width);
        const double la = lv_next + lu;
        gg.pos.tau_mem += la * ct.v[t];
        const double li_next = li_pos[g];
        gg.pos.tau_syn += li_next * ct.i[t];
        gg.w_in += li_next * et.s_pos[t];
        const double ls = li_next * gp.w_in;
        lv_pos[g] = la * gp.pos.tau_mem;
        li_pos[g] = li_next * gp.pos.tau_syn + la;
        const double q = et.q_pos[t];
        if (q > 0.0 && q < 1.0) {
          gg.enc.alpha += ls;
          gg.enc.beta += ls * errors[t];
        }
      }
      // negative cell
      {
        const CellTape& ct = tape.neg[g];
        double lz = Lr_neg * gp.w_out * inv_n;
        gg.w_out += Lr_neg * ct.z[t] * inv_n;
        const double lv_next = lv_neg[g];
        lz -= lv_next * theta;
        const double lu = lz * surrogate_spike_grad(ct.u[t], width);
        const double la = lv_next + lu;
        gg.neg.tau_mem += la * ct.v[t];
        const double li_next = li_neg[g];
        gg.neg.tau_syn += li_next * ct.i[t];
        gg.w_in += li_next * et.s_neg[t];
        const double ls = li_next * gp.w_in;
        lv_neg[g] = la * gp.neg.tau_mem;
        li_neg[g] = li_next * gp.neg.tau_syn + la;
        const double q = et.q_neg[t];
        if (q > 0.0 && q < 1.0) {
          gg.enc.alpha += ls;
          gg.enc.beta -= ls * errors[t];
        }
      }
    }
    lr_pos = Lr_pos * np.p_readout_decay;
    lr_neg = Lr_neg * np.p_readout_decay;
  }
}

void backward_i_window(const PidNetworkParams& np, const ITape& tape,
                       std::span<const double> errors,
                       std::span<const double> dJdy, double width,
                       PidNetworkParams& grad) {
  const std::size_t steps = dJdy.size();
  const std::size_t groups = np.i.size();
  const double inv_n = 1.0 / static_cast<double>(groups);

  std::vector<double> lv_pos(groups, 0.0), li_pos(groups, 0.0), lth_pos(groups, 0.0);
  std::vector<double> lv_neg(groups, 0.0), li_neg(groups, 0.0), lth_neg(groups, 0.0);
  double lr_pos = 0.0, lr_neg = 0.0;

  for (std::size_t t = steps; t-- > 0;) {
    const double gy = dJdy[t];
    grad.i_gain += gy * (tape.r_pos[t + 1] - tape.r_neg[t + 1]);
    const double Lr_pos = lr_pos + gy * np.i_gain;
    const double Lr_neg = lr_neg - gy * np.i_gain;
    grad.i_readout_decay += Lr_pos * tape.r_pos[t] + Lr_neg * tape.r_neg[t];

    for (std::size_t g = 0; g < groups; ++g) {
      const IGroupParams& gp = np.i[g];
      IGroupParams& gg = grad.i[g];
      const EncTape& et = tape.enc[g];
      const double sp = et.s_pos[t];
      const double sn = et.s_neg[t];
      double ls_pos = 0.0, ls_neg = 0.0;

      // positive-side neuron: theta moved by theta_add * (s_neg - s_pos)
      {
        const IwtaCellTape& it = tape.pos[g];
        const CellTape& ct = it.cell;
        double lz = Lr_pos * gp.w_out * inv_n;
        gg.w_out += Lr_pos * ct.z[t] * inv_n;
        const double lv_next = lv_pos[g];
        const double theta_eff = it.theta_eff[t];
        lz -= lv_next * theta_eff;
        const double lu = lz * surrogate_spike_grad(ct.u[t], width);
        const double la = lv_next + lu;
        double lthp = lth_pos[g] - lu - lv_next * ct.z[t];
        const bool clamped = it.theta_pre[t] != theta_eff;
        const double lpre = clamped ? 0.0 : lthp;
        lth_pos[g] = lpre * np.theta_decay;
        gg.theta_add += lpre * (sn - sp);
        ls_neg += lpre * gp.theta_add;
        ls_pos -= lpre * gp.theta_add;
        gg.pos.tau_mem += la * ct.v[t];
        const double li_next = li_pos[g];
        gg.pos.tau_syn += li_next * ct.i[t];
        gg.w_in += li_next * (sp + sn);
        ls_pos += li_next * gp.w_in;
        ls_neg += li_next * gp.w_in;
        lv_pos[g] = la * gp.pos.tau_mem;
        li_pos[g] = li_next * gp.pos.tau_syn + la;
      }
      // negative-side neuron: theta moved by theta_add * (s_pos - s_neg)
      {
        const IwtaCellTape& it = tape.neg[g];
        const CellTape& ct = it.cell;
        double lz = Lr_neg * gp.w_out * inv_n;
        gg.w_out += Lr_neg * ct.z[t] * inv_n;
        const double lv_next = lv_neg[g];
        const double theta_eff = it.theta_eff[t];
        lz -= lv_next * theta_eff;
        const double lu = lz * surrogate_spike_grad(ct.u[t], width);
        const double la = lv_next + lu;
        double lthp = lth_neg[g] - lu - lv_next * ct.z[t];
        const bool clamped = it.theta_pre[t] != theta_eff;
        const double lpre = clamped ? 0.0 : lthp;
        lth_neg[g] = lpre * np.theta_decay;
        gg.theta_add += lpre * (sp - sn);
        ls_pos += lpre * gp.theta_add;
        ls_neg -= lpre * gp.theta_add;
        gg.neg.tau_mem += la * ct.v[t];
        const double li_next = li_neg[g];
        gg.neg.tau_syn += li_next * ct.i[t];
        gg.w_in += li_next * (sp + sn);
        ls_pos += li_next * gp.w_in;
        ls_neg += li_next * gp.w_in;
        lv_neg[g] = la * gp.neg.tau_mem;
        li_neg[g] = li_next * gp.neg.tau_syn + la;
      }

      const double q_pos = et.q_pos[t];
      if (q_pos > 0.0 && q_pos < 1.0) {
        gg.enc.alpha += ls_pos;
        gg.enc.beta += ls_pos * errors[t];
      }
      const double q_neg = et.q_neg[t];
      if (q_neg > 0.0 && q_neg < 1.0) {
        gg.enc.alpha += ls_neg;
        gg.enc.beta -= ls_neg * errors[t];
      }
    }
    lr_pos = Lr_pos * np.i_readout_decay;
    lr_neg = Lr_neg * np.i_readout_decay;
  }
}

void backward_d_window(const PidNetworkParams& np, const DTape& tape,
                       std::span<const double> errors,
                       std::span<const double> dJdy, double width,
                       PidNetworkParams& grad) {
  const std::size_t steps = dJdy.size();
  const std::size_t groups = np.d.size();
  const double inv_n = 1.0 / static_cast<double>(groups);
  const double theta = np.threshold;

  std::vector<double> lv_fp(groups, 0.0), li_fp(groups, 0.0);
  std::vector<double> lv_fn(groups, 0.0), li_fn(groups, 0.0);
  std::vector<double> lv_sp(groups, 0.0), li_sp(groups, 0.0);
  std::vector<double> lv_sn(groups, 0.0), li_sn(groups, 0.0);
  double lrf_pos = 0.0, lrf_neg = 0.0, lrs_pos = 0.0, lrs_neg = 0.0;

  for (std::size_t t = steps; t-- > 0;) {
    const double gy = dJdy[t];
    grad.d_gain += gy * ((tape.rf_pos[t + 1] - tape.rf_neg[t + 1]) -
                         (tape.rs_pos[t + 1] - tape.rs_neg[t + 1]));
    const double Lrf_pos = lrf_pos + gy * np.d_gain;
    const double Lrf_neg = lrf_neg - gy * np.d_gain;
    const double Lrs_pos = lrs_pos - gy * np.d_gain;
    const double Lrs_neg = lrs_neg + gy * np.d_gain;
    grad.d_readout_decay_fast +=
        Lrf_pos * tape.rf_pos[t] + Lrf_neg * tape.rf_neg[t];
    grad.d_readout_decay_slow +=
        Lrs_pos * tape.rs_pos[t] + Lrs_neg * tape.rs_neg[t];

    for (std::size_t g = 0; g < groups; ++g) {
      const DGroupParams& gp = np.d[g];
      DGroupParams& gg = grad.d[g];
      const EncTape& et = tape.enc[g];
      double ls_pos = 0.0, ls_neg = 0.0;

      auto cell_bwd = [&](const CellTape& ct, double Lr, double& gw_out,
                          double w_out, double& gw_in, double w_in,
                          const CellParams& cp, CellParams& gcp, double s,
                          double& lv, double& li) {
        double lz = Lr * w_out * inv_n;
        gw_out += Lr * ct.z[t] * inv_n;
        const double lv_next = lv;
        lz -= lv_next * theta;
        const double lu = lz * surrogate_spike_grad(ct.u[t], width);
        const double la = lv_next + lu;
        gcp.tau_mem += la * ct.v[t];
        const double li_next = li;
        gcp.tau_syn += li_next * ct.i[t];
        gw_in += li_next * s;
        lv = la * cp.tau_mem;
        li = li_next * cp.tau_syn + la;
        return li_next * w_in;  // adjoint of the encoder spike
      };

      ls_pos += cell_bwd(tape.fast_pos[g], Lrf_pos, gg.w_out_fast,
                         gp.w_out_fast, gg.w_in_fast, gp.w_in_fast, gp.fast_pos,
                         gg.fast_pos, et.s_pos[t], lv_fp[g], li_fp[g]);
      ls_neg += cell_bwd(tape.fast_neg[g], Lrf_neg, gg.w_out_fast,
                         gp.w_out_fast, gg.w_in_fast, gp.w_in_fast, gp.fast_neg,
                         gg.fast_neg, et.s_neg[t], lv_fn[g], li_fn[g]);
      ls_pos += cell_bwd(tape.slow_pos[g], Lrs_pos, gg.w_out_slow,
                         gp.w_out_slow, gg.w_in_slow, gp.w_in_slow, gp.slow_pos,
                         gg.slow_pos, et.s_pos[t], lv_sp[g], li_sp[g]);
      ls_neg += cell_bwd(tape.slow_neg[g], Lrs_neg, gg.w_out_slow,
                         gp.w_out_slow, gg.w_in_slow, gp.w_in_slow, gp.slow_neg,
                         gg.slow_neg, et.s_neg[t], lv_sn[g], li_sn[g]);

      const double q_pos = et.q_pos[t];
      if (q_pos > 0.0 && q_pos < 1.0) {
        gg.enc.alpha += ls_pos;
        gg.enc.beta += ls_pos * errors[t];
      }
      const double q_neg = et.q_neg[t];
      if (q_neg > 0.0 && q_neg < 1.0) {
        gg.enc.alpha += ls_neg;
        gg.enc.beta -= ls_neg * errors[t];
      }
    }
    lrf_pos = Lrf_pos * np.d_readout_decay_fast;
    lrf_neg = Lrf_neg * np.d_readout_decay_fast;
    lrs_pos = Lrs_pos * np.d_readout_decay_slow;
    lrs_neg = Lrs_neg * np.d_readout_decay_slow;
  }
}

// Per-head runtime carried across BPTT windows of one sequence.
struct HeadRuntime {
  PPathwayState p;
  IPathwayState i;
  DPathwayState d;
  std::vector<RngStream> rng;

  void reset(const PidNetworkParams& np, Pathway head, std::uint64_t seed) {
    switch (head) {
      case Pathway::P:
        p = make_p_state(np);
        rng = make_pathway_streams(seed, Pathway::P, np.p.size());
        break;
      case Pathway::I:
        i = make_i_state(np);
        rng = make_pathway_streams(seed, Pathway::I, np.i.size());
        break;
      case Pathway::D:
        d = make_d_state(np);
        rng = make_pathway_streams(seed, Pathway::D, np.d.size());
        break;
    }
  }
};

// Runs one window forward (+ backward when grad != nullptr) and returns the
// window's data loss. Tape buffers are reused across calls.
struct WindowScratch {
  PTape p;
  ITape i;
  DTape d;
  std::vector<double> dJdy;
};

double run_window(const PidNetworkParams& np, Pathway head, HeadRuntime& rt,
                  std::span<const double> errors,
                  std::span<const double> target, SpikeMode mode, double width,
                  PidNetworkParams* grad, WindowScratch& scratch,
                  std::vector<double>* outputs) {
  const std::size_t steps = errors.size();
  scratch.dJdy.assign(steps, 0.0);
  double loss = 0.0;
  switch (head) {
    case Pathway::P: {
      scratch.p.resize(np.p.size(), steps);
      for (std::size_t t = 0; t < steps; ++t) {
        step_p_pathway(np, rt.p, rt.rng, false, errors[t], mode, width,
                       &scratch.p, t);
      }
      loss = data_loss_and_grad(target, scratch.p.y, scratch.dJdy);
      if (grad) backward_p_window(np, scratch.p, errors, scratch.dJdy, width, *grad);
      if (outputs)
        outputs->insert(outputs->end(), scratch.p.y.begin(), scratch.p.y.end());
      break;
    }
    case Pathway::I: {
      scratch.i.resize(np.i.size(), steps);
      for (std::size_t t = 0; t < steps; ++t) {
        step_i_pathway(np, rt.i, rt.rng, false, errors[t], mode, width,
                       &scratch.i, t);
      }
      loss = data_loss_and_grad(target, scratch.i.y, scratch.dJdy);
      if (grad) backward_i_window(np, scratch.i, errors, scratch.dJdy, width, *grad);
      if (outputs)
        outputs->insert(outputs->end(), scratch.i.y.begin(), scratch.i.y.end());
      break;
    }
    case Pathway::D: {
      scratch.d.resize(np.d.size(), steps);
      for (std::size_t t = 0; t < steps; ++t) {
        step_d_pathway(np, rt.d, rt.rng, false, errors[t], mode, width,
                       &scratch.d, t);
      }
      loss = data_loss_and_grad(target, scratch.d.y, scratch.dJdy);
      if (grad) backward_d_window(np, scratch.d, errors, scratch.dJdy, width, *grad);
      if (outputs)
        outputs->insert(outputs->end(), scratch.d.y.begin(), scratch.d.y.end());
      break;
    }
  }
  return loss;
}

// Whole-sequence run split into TBPTT windows; returns mean-weighted data
// loss over the windows (windows weigh by their length).
double run_sequence(const PidNetworkParams& np, Pathway head,
                    std::span<const double> errors,
                    std::span<const double> target, SpikeMode mode, double width,
                    std::uint64_t noise_seed, int horizon,
                    PidNetworkParams* grad, WindowScratch& scratch,
                    std::vector<double>* outputs) {
  assert(np.refractory_steps == 0 && "training assumes no refractory period");
  const std::size_t total = errors.size();
  const std::size_t window =
      horizon > 0 ? static_cast<std::size_t>(horizon) : total;
  HeadRuntime rt;
  rt.reset(np, head, noise_seed);

  double loss_weighted = 0.0;
  std::size_t counted = 0;
  for (std::size_t start = 0; start < total; start += window) {
    const std::size_t len = std::min(window, total - start);
    if (len < 2) break;  // degenerate tail, statistics need >= 2 samples
    const double loss =
        run_window(np, head, rt, errors.subspan(start, len),
                   target.subspan(start, len), mode, width, grad, scratch,
                   outputs);
    loss_weighted += loss * static_cast<double>(len);
    counted += len;
  }
  return counted > 0 ? loss_weighted / static_cast<double>(counted) : 0.0;
}

double pathway_penalty(const PidNetworkParams& np, Pathway head) {
  PidNetworkParams copy = np;
  double acc = 0.0;
  for (const ParamView& view : trainable_params(copy)) {
    if (view.pathway != head) continue;
    auto [lo, hi] = param_range(view.role, np.threshold);
    acc += interval_distance(*view.value, lo, hi);
  }
  return acc;
}

std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return RngStream::mix(a ^ RngStream::mix(b ^ RngStream::mix(c)));
}

}  // namespace

double head_run(const PidNetworkParams& params, Pathway head,
                std::span<const double> errors, std::span<const double> target,
                SpikeMode mode, double surrogate_width,
                std::uint64_t noise_seed, PidNetworkParams* grad,
                std::vector<double>* outputs) {
  WindowScratch scratch;
  if (outputs) outputs->clear();
  return run_sequence(params, head, errors, target, mode, surrogate_width,
                      noise_seed, /*horizon=*/0, grad, scratch, outputs);
}

HeadEval evaluate_head(const PidNetworkParams& params, Pathway head,
                       std::span<const double> errors,
                       std::span<const double> target, std::uint64_t seed) {
  HeadEval eval;
  head_run(params, head, errors, target, SpikeMode::Hard, 2.0, seed, nullptr,
           &eval.output);
  eval.mse = mse(target, eval.output);
  eval.pearson_loss = pearson_loss(target, eval.output);
  return eval;
}

TrainResult bptt_train(PidNetwork& network,
                       const std::vector<TrainingSequence>& dataset,
                       const TrainConfig& config) {
  if (dataset.empty()) {
    throw std::invalid_argument("bptt_train: empty dataset");
  }
  PidNetworkParams& np = network.params();
  PidNetworkParams velocity = zero_like(np);   // momentum / Adam first moment
  PidNetworkParams moment2 = zero_like(np);    // Adam second moment
  long update_count = 0;
  WindowScratch scratch;
  TrainResult result;

  // theta_add is a per-tick increment, so its useful magnitudes sit three
  // orders below the weights; scale its steps accordingly.
  auto step_scale = [&](ParamRole role) {
    return role == ParamRole::ThetaAdd ? np.dt : 1.0;
  };

  auto head_enabled = [&](Pathway head) {
    switch (head) {
      case Pathway::P: return config.train_p;
      case Pathway::I: return config.train_i;
      case Pathway::D: return config.train_d;
    }
    return false;
  };
  const Pathway heads[] = {Pathway::P, Pathway::I, Pathway::D};

  // Pre-extract error/target views per sequence.
  std::vector<std::vector<double>> errors(dataset.size());
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    errors[s] = dataset[s].errors();
  }

  const std::size_t batch = config.batch_size > 0
                                ? static_cast<std::size_t>(config.batch_size)
                                : dataset.size();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochLosses sums;
    for (std::size_t first = 0; first < dataset.size(); first += batch) {
      const std::size_t last = std::min(first + batch, dataset.size());
      PidNetworkParams grad = zero_like(np);
      for (std::size_t s = first; s < last; ++s) {
        const TrainingSequence& seq = dataset[s];
        const std::uint64_t noise_seed =
            mix3(config.seed, static_cast<std::uint64_t>(epoch), s);
        for (Pathway head : heads) {
          if (!head_enabled(head)) continue;
          const std::span<const double> target =
              head == Pathway::P   ? std::span<const double>(seq.p_target)
              : head == Pathway::I ? std::span<const double>(seq.i_target)
                                   : std::span<const double>(seq.d_target);
          const double loss = run_sequence(
              np, head, errors[s], target, config.mode, config.surrogate_width,
              noise_seed, config.horizon, &grad, scratch, nullptr);
          if (!std::isfinite(loss)) {
            result.nan_abort = true;
            result.nan_epoch = epoch;
            result.nan_sequence = static_cast<int>(s);
            network.reset();
            return result;
          }
          switch (head) {
            case Pathway::P: sums.p += loss; break;
            case Pathway::I: sums.i += loss; break;
            case Pathway::D: sums.d += loss; break;
          }
        }
      }

      const double inv_count = 1.0 / static_cast<double>(last - first);
      for (const ParamView& view : trainable_params(grad)) {
        *view.value *= inv_count;
      }
      exterior_penalty_grad(np, grad);

      // Per-head L2 gradient clip, then momentum descent and the range clamp
      // that keeps the decay semantics valid between penalty-driven epochs.
      auto np_views = trainable_params(np);
      auto g_views = trainable_params(grad);
      auto v_views = trainable_params(velocity);
      if (config.grad_clip > 0.0) {
        double norms[3] = {0.0, 0.0, 0.0};
        for (std::size_t k = 0; k < g_views.size(); ++k) {
          const double g = *g_views[k].value;
          norms[static_cast<int>(g_views[k].pathway)] += g * g;
        }
        double scale[3];
        for (int h = 0; h < 3; ++h) {
          const double norm = std::sqrt(norms[h]);
          scale[h] = norm > config.grad_clip ? config.grad_clip / norm : 1.0;
        }
        for (std::size_t k = 0; k < g_views.size(); ++k) {
          *g_views[k].value *= scale[static_cast<int>(g_views[k].pathway)];
        }
      }
      if (config.optimizer == Optimizer::Adam) {
        ++update_count;
        auto m2_views = trainable_params(moment2);
        const double b1 = config.momentum;
        const double b2 = config.adam_beta2;
        const double bias1 = 1.0 - std::pow(b1, update_count);
        const double bias2 = 1.0 - std::pow(b2, update_count);
        for (std::size_t k = 0; k < np_views.size(); ++k) {
          if (!head_enabled(np_views[k].pathway)) continue;
          const double g = *g_views[k].value;
          double& m = *v_views[k].value;
          double& v2 = *m2_views[k].value;
          m = b1 * m + (1.0 - b1) * g;
          v2 = b2 * v2 + (1.0 - b2) * g * g;
          const double mhat = m / bias1;
          const double vhat = v2 / bias2;
          *np_views[k].value -= config.learning_rate *
                                step_scale(np_views[k].role) * mhat /
                                (std::sqrt(vhat) + 1e-8);
        }
      } else {
        for (std::size_t k = 0; k < np_views.size(); ++k) {
          if (!head_enabled(np_views[k].pathway)) continue;
          double& vel = *v_views[k].value;
          vel = config.momentum * vel -
                config.learning_rate * *g_views[k].value;
          *np_views[k].value += vel;
        }
      }
      clamp_params_to_range(np);
    }

    const double inv_n = 1.0 / static_cast<double>(dataset.size());
    EpochLosses epoch_losses;
    epoch_losses.p = config.train_p
                         ? sums.p * inv_n + pathway_penalty(np, Pathway::P)
                         : 0.0;
    epoch_losses.i = config.train_i
                         ? sums.i * inv_n + pathway_penalty(np, Pathway::I)
                         : 0.0;
    epoch_losses.d = config.train_d
                         ? sums.d * inv_n + pathway_penalty(np, Pathway::D)
                         : 0.0;
    result.history.push_back(epoch_losses);
  }

  network.reset();
  return result;
}

// ---------------------------------------------------------------------------
// Flight-log CSV

namespace {

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_field(const std::string& field, int line_no) {
  const std::string t = strip(field);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || t.empty()) {
    throw std::runtime_error("flight log parse error at line " +
                             std::to_string(line_no) + ": bad number '" + t +
                             "'");
  }
  return value;
}

}  // namespace

std::vector<TrainingSequence> load_flight_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open flight log: " + path);
  }

  std::string line;
  if (!std::getline(in, line)) {
    return {};  // empty file, empty dataset
  }
  {
    std::string header;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) header += c;
    }
    if (header != "t_s,setpoint_radps,gyro_radps,p_out,i_out,d_out") {
      throw std::runtime_error(
          "flight log parse error at line 1: unexpected header '" + line + "'");
    }
  }

  struct Row {
    double t, sp, gyro, p, i, d;
  };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
      throw std::runtime_error("flight log parse error at line " +
                               std::to_string(line_no) + ": expected 6 fields, got " +
                               std::to_string(fields.size()));
    }
    Row r;
    r.t = parse_field(fields[0], line_no);
    r.sp = parse_field(fields[1], line_no);
    r.gyro = parse_field(fields[2], line_no);
    r.p = parse_field(fields[3], line_no);
    r.i = parse_field(fields[4], line_no);
    r.d = parse_field(fields[5], line_no);
    if (!rows.empty() && r.t <= rows.back().t) {
      throw std::runtime_error("flight log validation error at line " +
                               std::to_string(line_no) +
                               ": non-monotone timestamp");
    }
    rows.push_back(r);
  }
  if (rows.size() < 2) return {};

  // The control tick is the smallest gap in the file; larger gaps split the
  // log into independent sequences.
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    dt = std::min(dt, rows[k].t - rows[k - 1].t);
  }

  std::vector<TrainingSequence> sequences;
  TrainingSequence current;
  current.dt = dt;
  auto flush = [&]() {
    if (current.size() >= 2) sequences.push_back(current);
    current = TrainingSequence{};
    current.dt = dt;
  };
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0) {
      const double gap = rows[k].t - rows[k - 1].t;
      if (gap > 2.0 * dt) {
        flush();
      } else if (std::abs(gap - dt) > 0.25 * dt) {
        throw std::runtime_error(
            "flight log validation error near t=" + std::to_string(rows[k].t) +
            ": irregular sample cadence");
      }
    }
    current.time.push_back(rows[k].t);
    current.setpoint.push_back(rows[k].sp);
    current.gyro.push_back(rows[k].gyro);
    current.p_target.push_back(rows[k].p);
    current.i_target.push_back(rows[k].i);
    current.d_target.push_back(rows[k].d);
  }
  flush();
  return sequences;
}

void write_flight_log(const std::string& path,
                      const std::vector<TrainingSequence>& sequences) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write flight log: " + path);
  }
  out << "t_s,setpoint_radps,gyro_radps,p_out,i_out,d_out\n";
  char buf[160];
  for (const TrainingSequence& seq : sequences) {
    for (std::size_t k = 0; k < seq.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                    seq.time[k], seq.setpoint[k], seq.gyro[k], seq.p_target[k],
                    seq.i_target[k], seq.d_target[k]);
      out << buf;
    }
  }
}

}  // namespace snnpid
