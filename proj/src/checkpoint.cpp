#include "snnpid/checkpoint.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace snnpid {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "snnpid-checkpoint";
constexpr int kVersion = 1;

json pack_p(const std::vector<PGroupParams>& groups) {
  json j;
  auto arr = [&](auto get) {
    json a = json::array();
    for (const auto& g : groups) a.push_back(get(g));
    return a;
  };
  j["alpha"] = arr([](const PGroupParams& g) { return g.enc.alpha; });
  j["beta"] = arr([](const PGroupParams& g) { return g.enc.beta; });
  j["w_in"] = arr([](const PGroupParams& g) { return g.w_in; });
  j["w_out"] = arr([](const PGroupParams& g) { return g.w_out; });
  j["tau_mem_pos"] = arr([](const PGroupParams& g) { return g.pos.tau_mem; });
  j["tau_syn_pos"] = arr([](const PGroupParams& g) { return g.pos.tau_syn; });
  j["tau_mem_neg"] = arr([](const PGroupParams& g) { return g.neg.tau_mem; });
  j["tau_syn_neg"] = arr([](const PGroupParams& g) { return g.neg.tau_syn; });
  return j;
}

json pack_i(const std::vector<IGroupParams>& groups) {
  json j;
  auto arr = [&](auto get) {
    json a = json::array();
    for (const auto& g : groups) a.push_back(get(g));
    return a;
  };
  j["alpha"] = arr([](const IGroupParams& g) { return g.enc.alpha; });
  j["beta"] = arr([](const IGroupParams& g) { return g.enc.beta; });
  j["w_in"] = arr([](const IGroupParams& g) { return g.w_in; });
  j["w_out"] = arr([](const IGroupParams& g) { return g.w_out; });
  j["theta_add"] = arr([](const IGroupParams& g) { return g.theta_add; });
  j["tau_mem_pos"] = arr([](const IGroupParams& g) { return g.pos.tau_mem; });
  j["tau_syn_pos"] = arr([](const IGroupParams& g) { return g.pos.tau_syn; });
  j["tau_mem_neg"] = arr([](const IGroupParams& g) { return g.neg.tau_mem; });
  j["tau_syn_neg"] = arr([](const IGroupParams& g) { return g.neg.tau_syn; });
  return j;
}

json pack_d(const std::vector<DGroupParams>& groups) {
  json j;
  auto arr = [&](auto get) {
    json a = json::array();
    for (const auto& g : groups) a.push_back(get(g));
    return a;
  };
  j["alpha"] = arr([](const DGroupParams& g) { return g.enc.alpha; });
  j["beta"] = arr([](const DGroupParams& g) { return g.enc.beta; });
  j["w_in_fast"] = arr([](const DGroupParams& g) { return g.w_in_fast; });
  j["w_out_fast"] = arr([](const DGroupParams& g) { return g.w_out_fast; });
  j["w_in_slow"] = arr([](const DGroupParams& g) { return g.w_in_slow; });
  j["w_out_slow"] = arr([](const DGroupParams& g) { return g.w_out_slow; });
  j["tau_mem_fast_pos"] = arr([](const DGroupParams& g) { return g.fast_pos.tau_mem; });
  j["tau_syn_fast_pos"] = arr([](const DGroupParams& g) { return g.fast_pos.tau_syn; });
  j["tau_mem_fast_neg"] = arr([](const DGroupParams& g) { return g.fast_neg.tau_mem; });
  j["tau_syn_fast_neg"] = arr([](const DGroupParams& g) { return g.fast_neg.tau_syn; });
  j["tau_mem_slow_pos"] = arr([](const DGroupParams& g) { return g.slow_pos.tau_mem; });
  j["tau_syn_slow_pos"] = arr([](const DGroupParams& g) { return g.slow_pos.tau_syn; });
  j["tau_mem_slow_neg"] = arr([](const DGroupParams& g) { return g.slow_neg.tau_mem; });
  j["tau_syn_slow_neg"] = arr([](const DGroupParams& g) { return g.slow_neg.tau_syn; });
  return j;
}

std::vector<double> need_array(const json& j, const char* key, std::size_t n) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != n) {
    throw std::runtime_error(std::string("checkpoint: bad or missing array '") +
                             key + "'");
  }
  return j[key].get<std::vector<double>>();
}

double need_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw std::runtime_error(std::string("checkpoint: bad or missing field '") +
                             key + "'");
  }
  return j[key].get<double>();
}

std::size_t group_count(const json& j) {
  if (!j.contains("alpha") || !j["alpha"].is_array()) {
    throw std::runtime_error("checkpoint: pathway block missing 'alpha'");
  }
  return j["alpha"].size();
}

}  // namespace

void save_checkpoint(const std::string& path, const PidNetworkParams& np) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["dt"] = np.dt;
  j["threshold"] = np.threshold;
  j["refractory_steps"] = np.refractory_steps;
  j["theta_decay"] = np.theta_decay;
  j["p"] = pack_p(np.p);
  j["p"]["readout_decay"] = np.p_readout_decay;
  j["p"]["gain"] = np.p_gain;
  j["i"] = pack_i(np.i);
  j["i"]["readout_decay"] = np.i_readout_decay;
  j["i"]["gain"] = np.i_gain;
  j["d"] = pack_d(np.d);
  j["d"]["readout_decay_fast"] = np.d_readout_decay_fast;
  j["d"]["readout_decay_slow"] = np.d_readout_decay_slow;
  j["d"]["gain"] = np.d_gain;

  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write checkpoint: " + path);
  }
  out << j.dump(2) << "\n";
}

PidNetworkParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint parse error: " + std::string(e.what()));
  }
  if (!j.contains("format") || j["format"] != kFormat) {
    throw std::runtime_error("checkpoint: unknown format");
  }
  if (!j.contains("version") || j["version"] != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version");
  }

  PidNetworkParams np;
  np.dt = need_number(j, "dt");
  np.threshold = need_number(j, "threshold");
  np.refractory_steps = static_cast<int>(need_number(j, "refractory_steps"));
  np.theta_decay = need_number(j, "theta_decay");

  {
    const json& jp = j.at("p");
    const std::size_t n = group_count(jp);
    auto alpha = need_array(jp, "alpha", n);
    auto beta = need_array(jp, "beta", n);
    auto w_in = need_array(jp, "w_in", n);
    auto w_out = need_array(jp, "w_out", n);
    auto tmp = need_array(jp, "tau_mem_pos", n);
    auto tsp = need_array(jp, "tau_syn_pos", n);
    auto tmn = need_array(jp, "tau_mem_neg", n);
    auto tsn = need_array(jp, "tau_syn_neg", n);
    np.p.resize(n);
    for (std::size_t g = 0; g < n; ++g) {
      np.p[g].enc = {alpha[g], beta[g]};
      np.p[g].w_in = w_in[g];
      np.p[g].w_out = w_out[g];
      np.p[g].pos = {tmp[g], tsp[g]};
      np.p[g].neg = {tmn[g], tsn[g]};
    }
    np.p_readout_decay = need_number(jp, "readout_decay");
    np.p_gain = need_number(jp, "gain");
  }
  {
    const json& ji = j.at("i");
    const std::size_t n = group_count(ji);
    auto alpha = need_array(ji, "alpha", n);
    auto beta = need_array(ji, "beta", n);
    auto w_in = need_array(ji, "w_in", n);
    auto w_out = need_array(ji, "w_out", n);
    auto theta_add = need_array(ji, "theta_add", n);
    auto tmp = need_array(ji, "tau_mem_pos", n);
    auto tsp = need_array(ji, "tau_syn_pos", n);
    auto tmn = need_array(ji, "tau_mem_neg", n);
    auto tsn = need_array(ji, "tau_syn_neg", n);
    np.i.resize(n);
    for (std::size_t g = 0; g < n; ++g) {
      np.i[g].enc = {alpha[g], beta[g]};
      np.i[g].w_in = w_in[g];
      np.i[g].w_out = w_out[g];
      np.i[g].theta_add = theta_add[g];
      np.i[g].pos = {tmp[g], tsp[g]};
      np.i[g].neg = {tmn[g], tsn[g]};
    }
    np.i_readout_decay = need_number(ji, "readout_decay");
    np.i_gain = need_number(ji, "gain");
  }
  {
    const json& jd = j.at("d");
    const std::size_t n = group_count(jd);
    auto alpha = need_array(jd, "alpha", n);
    auto beta = need_array(jd, "beta", n);
    auto wif = need_array(jd, "w_in_fast", n);
    auto wof = need_array(jd, "w_out_fast", n);
    auto wis = need_array(jd, "w_in_slow", n);
    auto wos = need_array(jd, "w_out_slow", n);
    auto tmfp = need_array(jd, "tau_mem_fast_pos", n);
    auto tsfp = need_array(jd, "tau_syn_fast_pos", n);
    auto tmfn = need_array(jd, "tau_mem_fast_neg", n);
    auto tsfn = need_array(jd, "tau_syn_fast_neg", n);
    auto tmsp = need_array(jd, "tau_mem_slow_pos", n);
    auto tssp = need_array(jd, "tau_syn_slow_pos", n);
    auto tmsn = need_array(jd, "tau_mem_slow_neg", n);
    auto tssn = need_array(jd, "tau_syn_slow_neg", n);
    np.d.resize(n);
    for (std::size_t g = 0; g < n; ++g) {
      np.d[g].enc = {alpha[g], beta[g]};
      np.d[g].w_in_fast = wif[g];
      np.d[g].w_out_fast = wof[g];
      np.d[g].w_in_slow = wis[g];
      np.d[g].w_out_slow = wos[g];
      np.d[g].fast_pos = {tmfp[g], tsfp[g]};
      np.d[g].fast_neg = {tmfn[g], tsfn[g]};
      np.d[g].slow_pos = {tmsp[g], tssp[g]};
      np.d[g].slow_neg = {tmsn[g], tssn[g]};
    }
    np.d_readout_decay_fast = need_number(jd, "readout_decay_fast");
    np.d_readout_decay_slow = need_number(jd, "readout_decay_slow");
    np.d_gain = need_number(jd, "gain");
  }
  return np;
}

}  // namespace snnpid
