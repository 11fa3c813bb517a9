#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "uerw/mlp.hpp"

using namespace uerw;

TEST_CASE("time encoding dimensions and endpoint values") {
  const auto e0 = encode_time(2.0, 2.0, 4.0, 8);
  REQUIRE(e0.size() == 16);
  for (int k = 0; k < 8; ++k) {
    CHECK(e0[2 * k] == doctest::Approx(0.0).epsilon(1e-15));      // sin 0
    CHECK(e0[2 * k + 1] == doctest::Approx(1.0).epsilon(1e-15));  // cos 0
  }

  const auto mid = encode_time(3.0, 2.0, 4.0, 2);  // normalized t = 0.5
  REQUIRE(mid.size() == 4);
  CHECK(mid[0] == doctest::Approx(1.0).epsilon(1e-12));   // sin(pi/2)
  CHECK(mid[1] == doctest::Approx(0.0).epsilon(1e-12));   // cos(pi/2)
  CHECK(mid[2] == doctest::Approx(0.0).epsilon(1e-12));   // sin(pi)
  CHECK(mid[3] == doctest::Approx(-1.0).epsilon(1e-12));  // cos(pi)

  // Out-of-span times clamp to the endpoints.
  CHECK(encode_time(-5.0, 2.0, 4.0, 4) == encode_time(2.0, 2.0, 4.0, 4));
  CHECK(encode_time(99.0, 2.0, 4.0, 4) == encode_time(4.0, 2.0, 4.0, 4));
}

TEST_CASE("forward pass matches an independent loop implementation") {
  const int in = 3, width = 5, out = 2, layers = 2;
  const Mlp net(in, layers, width, out);
  std::mt19937_64 rng(41);
  std::vector<double> params(net.param_count());
  net.init_params(params, rng);

  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const std::size_t batch = 7;
  std::vector<double> x(batch * in);
  for (auto& v : x) v = u(rng);

  std::vector<double> y;
  Mlp::Workspace ws;
  net.forward(params, x, batch, y, ws);
  REQUIRE(y.size() == batch * out);

  // Reference: plain loops over the documented parameter layout.
  auto gelu = [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))); };
  std::vector<int> dims{in, width, width, out};
  std::size_t off = 0;
  std::vector<std::vector<double>> weights, biases;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    weights.emplace_back(params.begin() + off, params.begin() + off + dims[l + 1] * dims[l]);
    off += dims[l + 1] * dims[l];
    biases.emplace_back(params.begin() + off, params.begin() + off + dims[l + 1]);
    off += dims[l + 1];
  }
  REQUIRE(off == net.param_count());

  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<double> act(x.begin() + b * in, x.begin() + (b + 1) * in);
    for (std::size_t l = 0; l < weights.size(); ++l) {
      std::vector<double> next(dims[l + 1]);
      for (int o = 0; o < dims[l + 1]; ++o) {
        double s = biases[l][o];
        for (int i = 0; i < dims[l]; ++i) s += weights[l][o * dims[l] + i] * act[i];
        next[o] = (l + 1 < weights.size()) ? gelu(s) : s;
      }
      act = std::move(next);
    }
    for (int o = 0; o < out; ++o)
      CHECK(y[b * out + o] == doctest::Approx(act[o]).epsilon(1e-12));
  }
}

TEST_CASE("backward pass matches central finite differences") {
  const Mlp net(4, 2, 6, 3);
  std::mt19937_64 rng(42);
  std::vector<double> params(net.param_count());
  net.init_params(params, rng);

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t batch = 5;
  std::vector<double> x(batch * 4);
  for (auto& v : x) v = u(rng);
  std::vector<double> dy(batch * 3);
  for (auto& v : dy) v = u(rng);

  Mlp::Workspace ws;
  std::vector<double> y;
  net.forward(params, x, batch, y, ws);
  std::vector<double> grad(net.param_count(), 0.0);
  net.backward(params, batch, dy, grad, ws);

  auto objective = [&](std::span<const double> p) {
    std::vector<double> yy;
    Mlp::Workspace w2;
    net.forward(p, x, batch, yy, w2);
    double s = 0.0;
    for (std::size_t i = 0; i < yy.size(); ++i) s += dy[i] * yy[i];
    return s;
  };

  const double h = 1e-6;
  std::uniform_int_distribution<std::size_t> pick(0, net.param_count() - 1);
  for (int n = 0; n < 200; ++n) {
    const std::size_t i = pick(rng);
    std::vector<double> hi = params, lo = params;
    hi[i] += h;
    lo[i] -= h;
    const double fd = (objective(hi) - objective(lo)) / (2 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("initialization is deterministic per seed with zero biases") {
  const Mlp net(6, 2, 16, 4);
  std::vector<double> a(net.param_count()), b(net.param_count());
  std::mt19937_64 r1(7), r2(7), r3(8);
  net.init_params(a, r1);
  net.init_params(b, r2);
  CHECK(a == b);
  net.init_params(b, r3);
  CHECK(a != b);

  // Layout puts the first layer's biases right after its 16x6 weight block.
  for (int o = 0; o < 16; ++o) CHECK(a[16 * 6 + o] == 0.0);
}
