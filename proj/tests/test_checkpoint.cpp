#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "snnpid/checkpoint.hpp"
#include "snnpid/param_spec.hpp"

using namespace snnpid;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("checkpoint round-trips exactly") {
  PidNetworkParams np = default_network(5, 0.6);
  np.p[2].w_in = 0.123456789012345;
  np.i[1].theta_add = 7.25e-4;
  np.d[4].slow_neg.tau_mem = 0.9871236;
  np.d_gain = 3.0;

  const auto path = temp_file("snnpid_ckpt_roundtrip.json");
  save_checkpoint(path.string(), np);
  const PidNetworkParams back = load_checkpoint(path.string());

  PidNetworkParams a = np, b = back;
  auto va = trainable_params(a);
  auto vb = trainable_params(b);
  REQUIRE(va.size() == vb.size());
  for (std::size_t k = 0; k < va.size(); ++k) {
    REQUIRE(*va[k].value == *vb[k].value);
  }
  CHECK(back.dt == np.dt);
  CHECK(back.threshold == np.threshold);
  CHECK(back.refractory_steps == np.refractory_steps);
  CHECK(back.theta_decay == np.theta_decay);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects bad input") {
  const auto path = temp_file("snnpid_ckpt_bad.json");

  CHECK_THROWS_AS((void)load_checkpoint("/nonexistent/ckpt.json"),
                  std::runtime_error);

  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS((void)load_checkpoint(path.string()), std::runtime_error);

  {
    std::ofstream out(path);
    out << "{\"format\": \"something-else\", \"version\": 1}";
  }
  CHECK_THROWS_AS((void)load_checkpoint(path.string()), std::runtime_error);

  // truncated arrays
  PidNetworkParams np = default_network(3, 1.0);
  save_checkpoint(path.string(), np);
  {
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    const auto pos = all.find("\"w_in\"");
    REQUIRE(pos != std::string::npos);
    all.replace(pos, 6, "\"wXn\"");
    std::ofstream out(path);
    out << all;
  }
  CHECK_THROWS_AS((void)load_checkpoint(path.string()), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("param specs carry the published counts for 40 groups") {
  PidNetworkParams np = default_network(40, 1.0);
  const auto specs = param_specs(np);
  auto count_of = [&](const std::string& name) {
    for (const auto& s : specs) {
      if (s.name == name) return s.count;
    }
    return -1;
  };
  CHECK(count_of("p.tau_syn") == 80);
  CHECK(count_of("p.tau_mem") == 80);
  CHECK(count_of("p.w_in") == 40);
  CHECK(count_of("p.w_out") == 40);
  CHECK(count_of("i.tau_syn") == 80);
  CHECK(count_of("i.tau_mem") == 80);
  CHECK(count_of("i.w_in") == 40);
  CHECK(count_of("i.w_out") == 40);
  CHECK(count_of("d.tau_syn") == 160);
  CHECK(count_of("d.tau_mem") == 160);
  CHECK(count_of("d.w_in") == 80);
  CHECK(count_of("d.w_out") == 80);

  // ranges: decays [0,1], weights [0,inf), theta_add [0, theta_base]
  for (const auto& s : specs) {
    if (s.role == ParamRole::TauMem || s.role == ParamRole::TauSyn ||
        s.role == ParamRole::ReadoutDecay) {
      CHECK(s.lo == 0.0);
      CHECK(s.hi == 1.0);
    }
    if (s.role == ParamRole::WIn || s.role == ParamRole::WOut) {
      CHECK(s.lo == 0.0);
      CHECK(std::isinf(s.hi));
    }
    if (s.role == ParamRole::ThetaAdd) {
      CHECK(s.lo == 0.0);
      CHECK(s.hi == np.threshold);
    }
  }

  // enumeration and spec counts agree
  PidNetworkParams copy = np;
  const auto views = trainable_params(copy);
  int total = 0;
  for (const auto& s : specs) total += s.count;
  CHECK(static_cast<int>(views.size()) == total);
}

TEST_CASE("clamp_params_to_range projects into the feasible box") {
  PidNetworkParams np = default_network(2, 1.0);
  np.p[0].pos.tau_mem = 1.7;
  np.p[1].w_out = -2.0;
  np.i[0].theta_add = 9.0;
  clamp_params_to_range(np);
  CHECK(np.p[0].pos.tau_mem == 1.0);
  CHECK(np.p[1].w_out == 0.0);
  CHECK(np.i[0].theta_add == np.threshold);
}
