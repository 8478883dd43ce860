#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "snnpid/loss.hpp"
#include "snnpid/network.hpp"
#include "snnpid/rng.hpp"
#include "snnpid/surrogate.hpp"

using namespace snnpid;

TEST_CASE("surrogate gradient closed form") {
  CHECK(surrogate_spike_grad(0.0, 2.0) == doctest::Approx(1.0));
  // even function
  RngStream rng = substream(1, 0);
  for (int k = 0; k < 100; ++k) {
    const double u = 6.0 * (rng.next() - 0.5);
    CHECK(surrogate_spike_grad(u, 2.0) ==
          doctest::Approx(surrogate_spike_grad(-u, 2.0)));
  }
  // vanishes for large |u|
  CHECK(surrogate_spike_grad(1e6, 2.0) < 1e-9);
  CHECK(surrogate_spike_grad(-1e6, 2.0) < 1e-9);
}

TEST_CASE("smooth spike is the antiderivative of the surrogate") {
  const double h = 1e-6;
  RngStream rng = substream(1, 1);
  for (int k = 0; k < 200; ++k) {
    const double u = 4.0 * (rng.next() - 0.5);
    const double w = 0.5 + 3.0 * rng.next();
    const double fd = (surrogate_spike_value(u + h, w) -
                       surrogate_spike_value(u - h, w)) /
                      (2.0 * h);
    CHECK(fd == doctest::Approx(surrogate_spike_grad(u, w)).epsilon(1e-5));
  }
  CHECK(surrogate_spike_value(0.0, 2.0) == doctest::Approx(0.5));
}

TEST_CASE("pearson loss endpoints and affine invariance") {
  std::vector<double> x{0.1, 0.5, -0.3, 0.9, -1.2, 0.4};
  std::vector<double> same = x;
  CHECK(pearson_loss(x, same) == doctest::Approx(0.0));

  std::vector<double> neg(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
  CHECK(pearson_loss(x, neg) == doctest::Approx(2.0));

  std::vector<double> affine(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) affine[k] = 3.5 * x[k] + 2.0;
  CHECK(pearson_loss(x, affine) == doctest::Approx(0.0));
}

TEST_CASE("pearson loss stays in [0,2] and handles degenerate series") {
  RngStream rng = substream(2, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(32), y(32);
    for (auto& v : x) v = rng.next() - 0.5;
    for (auto& v : y) v = rng.next() - 0.5;
    const double loss = pearson_loss(x, y);
    REQUIRE(loss >= 0.0);
    REQUIRE(loss <= 2.0);
  }
  std::vector<double> flat(16, 3.0), varying{1.0, 2.0, 3.0, 4.0};
  std::vector<double> flat4(4, 3.0);
  CHECK(pearson_loss(flat4, varying) == 1.0);
  CHECK(pearson_loss(varying, flat4) == 1.0);

  std::vector<double> a{1.0, 2.0}, b{1.0, 2.0, 3.0};
  CHECK_THROWS_AS((void)pearson_loss(a, b), std::invalid_argument);
  std::vector<double> single{1.0};
  CHECK_THROWS_AS((void)pearson_loss(single, single), std::invalid_argument);
}

TEST_CASE("exterior penalty distance cases") {
  CHECK(interval_distance(0.5, 0.0, 1.0) == 0.0);
  CHECK(interval_distance(1.2, 0.0, 1.0) == doctest::Approx(0.2));
  CHECK(interval_distance(-0.3, 0.0,
                          std::numeric_limits<double>::infinity()) ==
        doctest::Approx(0.3));
  // continuous at the boundary
  CHECK(interval_distance(1.0 + 1e-12, 0.0, 1.0) == doctest::Approx(0.0));
  CHECK(interval_distance(1.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("exterior penalty is zero inside the box and linear outside") {
  PidNetworkParams np = default_network(2, 1.0);
  CHECK(exterior_penalty(np) == 0.0);

  np.p[0].pos.tau_mem = 1.2;  // 0.2 beyond the decay range
  np.i[1].w_in = -0.3;        // 0.3 below zero
  CHECK(exterior_penalty(np) == doctest::Approx(0.5));

  np.p[0].pos.tau_mem = 1.4;
  CHECK(exterior_penalty(np) == doctest::Approx(0.7));
}

TEST_CASE("total loss composes the three terms") {
  PidNetworkParams np = default_network(2, 1.0);
  std::vector<double> x{0.2, -0.4, 0.9, 0.1, -0.6};

  CHECK(total_loss(x, x, np) == doctest::Approx(0.0));

  // constant offset: MSE = c^2, Pearson term 0
  std::vector<double> shifted(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) shifted[k] = x[k] + 0.25;
  CHECK(total_loss(x, shifted, np) == doctest::Approx(0.25 * 0.25));

  // sign flip on a zero-mean series: MSE = 4*E[x^2], Pearson term 2
  std::vector<double> zm{0.5, -0.5, 0.25, -0.25, 1.0, -1.0};
  double ex2 = 0.0;
  for (double v : zm) ex2 += v * v;
  ex2 /= static_cast<double>(zm.size());
  std::vector<double> flipped(zm.size());
  for (std::size_t k = 0; k < zm.size(); ++k) flipped[k] = -zm[k];
  CHECK(total_loss(zm, flipped, np) == doctest::Approx(4.0 * ex2 + 2.0));

  // penalty adds on top
  np.p[0].w_in = -1.0;
  CHECK(total_loss(x, x, np) == doctest::Approx(1.0));
}

TEST_CASE("data loss gradient matches finite differences") {
  RngStream rng = substream(3, 3);
  std::vector<double> x(24), y(24);
  for (auto& v : x) v = rng.next() - 0.5;
  for (auto& v : y) v = rng.next() - 0.5;

  std::vector<double> grad(y.size(), 0.0);
  const double base = data_loss_and_grad(x, y, grad);
  CHECK(base == doctest::Approx(mse(x, y) + pearson_loss(x, y)));

  const double h = 1e-7;
  for (std::size_t k = 0; k < y.size(); k += 5) {
    auto yp = y, ym = y;
    yp[k] += h;
    ym[k] -= h;
    std::vector<double> scratch(y.size(), 0.0);
    const double lp = data_loss_and_grad(x, yp, scratch);
    scratch.assign(y.size(), 0.0);
    const double lm = data_loss_and_grad(x, ym, scratch);
    CHECK(grad[k] == doctest::Approx((lp - lm) / (2.0 * h)).epsilon(1e-4));
  }
}
