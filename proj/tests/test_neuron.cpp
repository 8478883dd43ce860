#include <doctest.h>

#include <cmath>
#include <vector>

#include "snnpid/encoding.hpp"
#include "snnpid/neuron.hpp"
#include "snnpid/rng.hpp"

using namespace snnpid;

namespace {

// Naive transcription of the discrete-time CUBA-LIF recurrence, kept
// deliberately independent of the library implementation.
struct NaiveLif {
  double v = 0.0;
  double i = 0.0;
  int refrac = 0;

  bool step(const LifParams& p, double weighted_sum) {
    v = p.tau_mem * v + i;
    i = p.tau_syn * i + weighted_sum;
    if (refrac > 0) {
      --refrac;
      return false;
    }
    const bool s = (v - p.threshold) > 0.0;
    if (s) {
      v -= p.threshold;
      refrac = p.refractory_steps;
    }
    return s;
  }
};

}  // namespace

TEST_CASE("lif zero input is a fixed point") {
  LifParams p{0.9, 0.5, 0.5, 0};
  LifState s{};
  for (int k = 0; k < 100; ++k) {
    auto r = lif_step(s, p, 0.0);
    CHECK(!r.spiked);
    CHECK(r.state.v == 0.0);
    CHECK(r.state.i == 0.0);
    s = r.state;
  }
}

TEST_CASE("lif hand-evaluated two-step pulse") {
  LifParams p{0.9, 0.5, 0.5, 0};
  LifState s{};

  auto r0 = lif_step(s, p, 1.0);
  CHECK(!r0.spiked);
  CHECK(r0.state.v == doctest::Approx(0.0));
  CHECK(r0.state.i == doctest::Approx(1.0));

  auto r1 = lif_step(r0.state, p, 0.0);
  CHECK(r1.spiked);
  CHECK(r1.state.i == doctest::Approx(0.5));
  CHECK(r1.state.v == doctest::Approx(0.5));  // 1.0 reduced by the threshold
}

TEST_CASE("undamped lif accumulates n(n-1)/2 and first spikes at n=6") {
  LifParams p{1.0, 1.0, 10.0, 0};
  LifState s{};
  int first_spike = -1;
  for (int n = 1; n <= 8 && first_spike < 0; ++n) {
    auto r = lif_step(s, p, 1.0);
    if (r.spiked) {
      first_spike = n;
    } else {
      CHECK(r.state.v == doctest::Approx(n * (n - 1) / 2.0));
    }
    s = r.state;
  }
  CHECK(first_spike == 6);
}

TEST_CASE("lif matches the naive recurrence bit for bit") {
  RngStream rng = substream(99, 0);
  for (int trial = 0; trial < 10; ++trial) {
    LifParams p;
    p.tau_mem = rng.next();
    p.tau_syn = rng.next();
    p.threshold = 0.2 + rng.next();
    p.refractory_steps = static_cast<int>(rng.next() * 4.0);
    LifState s{};
    NaiveLif naive;
    for (int k = 0; k < 2000; ++k) {
      const double in = rng.next() < 0.3 ? 1.0 + rng.next() : 0.0;
      auto r = lif_step(s, p, in);
      const bool expect = naive.step(p, in);
      REQUIRE(r.spiked == expect);
      REQUIRE(r.state.v == naive.v);
      REQUIRE(r.state.i == naive.i);
      s = r.state;
    }
  }
}

TEST_CASE("refractory period caps the spike rate at 1/(r+1) per step") {
  const int r = 3;
  LifParams p{1.0, 0.5, 0.5, r};
  LifState s{};
  int spikes = 0;
  int last_spike = -10;
  const int steps = 1000;
  for (int k = 0; k < steps; ++k) {
    auto out = lif_step(s, p, 5.0);  // strong constant drive
    if (out.spiked) {
      CHECK(k - last_spike >= r + 1);
      last_spike = k;
      ++spikes;
    }
    s = out.state;
  }
  CHECK(spikes <= steps / (r + 1));
  CHECK(spikes >= steps / (r + 1) - 1);  // strong drive keeps it saturated
}

TEST_CASE("iwta threshold update follows the rule and clamps") {
  LifParams p{0.9, 0.5, 1.0, 0};

  IwtaState s;
  s.theta = 1.0;
  s.theta_add = 0.1;
  s.theta_base = 1.0;
  auto r = iwta_step(s, p, 0.0, true, false, IwtaSide::Positive);
  CHECK(r.state.theta == doctest::Approx(0.9));

  s.theta = 0.05;
  r = iwta_step(s, p, 0.0, true, false, IwtaSide::Positive);
  CHECK(r.state.theta == 0.0);  // clamped, not -0.05

  s.theta = 2.0;
  r = iwta_step(s, p, 0.0, false, true, IwtaSide::Positive);
  CHECK(r.state.theta == 2.0);  // upper clamp is idempotent

  // negative-side neuron swaps the channel roles
  s.theta = 1.0;
  r = iwta_step(s, p, 0.0, true, false, IwtaSide::Negative);
  CHECK(r.state.theta == doctest::Approx(1.1));
}

TEST_CASE("iwta theta stays in [0, 2*theta_base] under random input") {
  RngStream rng = substream(7, 1);
  for (int trial = 0; trial < 50; ++trial) {
    LifParams p{rng.next(), rng.next(), 1.0, 0};
    IwtaState s;
    s.theta_base = 0.5 + rng.next();
    s.theta = 2.0 * s.theta_base * rng.next();
    s.theta_add = rng.next();
    for (int k = 0; k < 500; ++k) {
      auto r = iwta_step(s, p, rng.next(), rng.next() < 0.5, rng.next() < 0.5,
                         rng.next() < 0.5 ? IwtaSide::Positive : IwtaSide::Negative);
      s = r.state;
      REQUIRE(s.theta >= 0.0);
      REQUIRE(s.theta <= 2.0 * s.theta_base);
    }
  }
}

TEST_CASE("iwta at zero threshold spikes at the maximum rate") {
  LifParams p{0.9, 0.5, 1.0, 0};
  IwtaState s;
  s.theta = 0.0;
  s.theta_add = 0.0;  // freeze the threshold at zero
  s.theta_base = 1.0;
  int spikes = 0;
  const int steps = 200;
  for (int k = 0; k < steps; ++k) {
    auto r = iwta_step(s, p, 1.0, false, false);  // drive >= theta_base
    spikes += r.spiked ? 1 : 0;
    s = r.state;
  }
  CHECK(spikes == steps - 1);  // every step once the first drive lands
}

TEST_CASE("iwta threshold decay relaxes toward the base value") {
  LifParams p{0.9, 0.5, 1.0, 0};
  IwtaState s;
  s.theta = 0.4;
  s.theta_add = 0.0;
  s.theta_base = 1.0;
  double prev_gap = std::abs(s.theta - s.theta_base);
  for (int k = 0; k < 80; ++k) {
    s = iwta_step(s, p, 0.0, false, false, IwtaSide::Positive, 0.9).state;
    const double gap = std::abs(s.theta - s.theta_base);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(s.theta == doctest::Approx(1.0).epsilon(0.001));
}

TEST_CASE("leaky readout basics") {
  CHECK(leaky_readout_step(0.0, 0.9, 1.0) == 1.0);

  // geometric series limit c/(1-d)
  double v = 0.0;
  for (int k = 0; k < 2000; ++k) v = leaky_readout_step(v, 0.9, 0.1);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

  // zero input decays monotonically to zero
  v = 3.0;
  double prev = v;
  for (int k = 0; k < 100; ++k) {
    v = leaky_readout_step(v, 0.9, 0.0);
    CHECK(v < prev);
    CHECK(v >= 0.0);
    prev = v;
  }
}

TEST_CASE("leaky readout is linear in its input history") {
  RngStream rng = substream(3, 2);
  std::vector<double> x(200), y(200);
  for (auto& v : x) v = rng.next() - 0.5;
  for (auto& v : y) v = rng.next() - 0.5;
  const double a = 1.7, b = -0.3, d = 0.85;
  double rx = 0.0, ry = 0.0, rc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    rx = leaky_readout_step(rx, d, x[k]);
    ry = leaky_readout_step(ry, d, y[k]);
    rc = leaky_readout_step(rc, d, a * x[k] + b * y[k]);
    REQUIRE(rc == doctest::Approx(a * rx + b * ry).epsilon(1e-12));
  }
}
