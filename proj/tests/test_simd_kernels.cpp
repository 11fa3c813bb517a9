#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "uerw/simd/kernels.hpp"

using namespace uerw::simd;

namespace {

struct BackendGuard {
  ~BackendGuard() { reset_backend(); }
};

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                               double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("backend dispatch and the force hook") {
  BackendGuard guard;
  const Backend detected = active_backend();
  CHECK((detected == Backend::Scalar || detected == Backend::Avx2));
  force_backend(Backend::Scalar);
  CHECK(active_backend() == Backend::Scalar);
  CHECK(backend_name() == "scalar");
  if (detail::cpu_has_avx2()) {
    force_backend(Backend::Avx2);
    CHECK(active_backend() == Backend::Avx2);
    CHECK(backend_name() == "avx2");
  }
  reset_backend();
  CHECK(active_backend() == detected);
}

TEST_CASE("linear kernels agree across backends to tight relative tolerance") {
  if (!detail::cpu_has_avx2()) return;
  std::mt19937_64 rng(51);

  // Odd sizes exercise the vector remainder paths.
  const std::size_t shapes[][3] = {{1, 1, 1}, {3, 5, 7}, {8, 16, 16}, {13, 33, 29}};
  for (const auto& shape : shapes) {
    const std::size_t batch = shape[0], in_dim = shape[1], out_dim = shape[2];
    const auto x = random_vec(batch * in_dim, rng);
    const auto w = random_vec(out_dim * in_dim, rng);
    const auto bias = random_vec(out_dim, rng);
    const auto dy = random_vec(batch * out_dim, rng);

    std::vector<double> y_s(batch * out_dim), y_v(batch * out_dim);
    detail::scalar_table.linear_forward(x.data(), w.data(), bias.data(), y_s.data(), batch,
                                        in_dim, out_dim);
    detail::avx2_table.linear_forward(x.data(), w.data(), bias.data(), y_v.data(), batch,
                                      in_dim, out_dim);
    for (std::size_t i = 0; i < y_s.size(); ++i)
      CHECK(y_v[i] == doctest::Approx(y_s[i]).epsilon(1e-13));

    std::vector<double> dx_s(batch * in_dim), dx_v(batch * in_dim);
    detail::scalar_table.linear_backprop_input(dy.data(), w.data(), dx_s.data(), batch, in_dim,
                                               out_dim);
    detail::avx2_table.linear_backprop_input(dy.data(), w.data(), dx_v.data(), batch, in_dim,
                                             out_dim);
    for (std::size_t i = 0; i < dx_s.size(); ++i)
      CHECK(dx_v[i] == doctest::Approx(dx_s[i]).epsilon(1e-13));

    std::vector<double> dw_s(out_dim * in_dim, 0.5), dw_v(out_dim * in_dim, 0.5);
    std::vector<double> db_s(out_dim, -0.25), db_v(out_dim, -0.25);
    detail::scalar_table.linear_backprop_params(dy.data(), x.data(), dw_s.data(), db_s.data(),
                                                batch, in_dim, out_dim);
    detail::avx2_table.linear_backprop_params(dy.data(), x.data(), dw_v.data(), db_v.data(),
                                              batch, in_dim, out_dim);
    for (std::size_t i = 0; i < dw_s.size(); ++i)
      CHECK(dw_v[i] == doctest::Approx(dw_s[i]).epsilon(1e-13));
    for (std::size_t i = 0; i < db_s.size(); ++i)
      CHECK(db_v[i] == doctest::Approx(db_s[i]).epsilon(1e-13));
  }
}

TEST_CASE("linear forward reference values") {
  // 2x2 case computed by hand: y = W x + b.
  const double x[] = {1.0, 2.0};
  const double w[] = {0.5, -1.0, 2.0, 0.25};
  const double bias[] = {0.1, -0.1};
  double y[2];
  linear_forward(x, w, bias, y, 1, 2, 2);
  CHECK(y[0] == doctest::Approx(0.5 * 1 - 1.0 * 2 + 0.1).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(2.0 * 1 + 0.25 * 2 - 0.1).epsilon(1e-15));
}

TEST_CASE("capture scan is bit-exact across backends including boundaries") {
  std::mt19937_64 rng(52);
  const std::size_t n_points = 517, n_targets = 203;
  auto xs = random_vec(n_points, rng), ys = random_vec(n_points, rng),
       zs = random_vec(n_points, rng);
  auto tx = random_vec(n_targets, rng), ty = random_vec(n_targets, rng),
       tz = random_vec(n_targets, rng);
  std::vector<std::uint8_t> mask(n_points, 1);
  for (std::size_t i = 0; i < n_points; i += 11) mask[i] = 0;

  // Plant exact-boundary cases: a point at distance exactly r from a target.
  const double r = 0.25;
  xs[1] = tx[0] + r;
  ys[1] = ty[0];
  zs[1] = tz[0];
  mask[1] = 1;

  std::vector<std::uint8_t> got_s(n_targets, 0xFF), got_v(n_targets, 0xFF);
  detail::scalar_table.capture_scan(xs.data(), ys.data(), zs.data(), mask.data(), n_points,
                                    tx.data(), ty.data(), tz.data(), n_targets, r * r,
                                    got_s.data());
  CHECK(got_s[0] == 1);  // boundary distance counts as reached
  if (detail::cpu_has_avx2()) {
    detail::avx2_table.capture_scan(xs.data(), ys.data(), zs.data(), mask.data(), n_points,
                                    tx.data(), ty.data(), tz.data(), n_targets, r * r,
                                    got_v.data());
    CHECK(got_s == got_v);
  }
}

TEST_CASE("capture scan skips masked points") {
  const double xs[] = {0.0, 1.0}, ys[] = {0.0, 0.0}, zs[] = {0.0, 0.0};
  const std::uint8_t mask[] = {0, 1};
  const double tx[] = {0.0, 1.0}, ty[] = {0.0, 0.0}, tz[] = {0.0, 0.0};
  std::uint8_t reached[2] = {9, 9};
  capture_scan(xs, ys, zs, mask, 2, tx, ty, tz, 2, 0.01, reached);
  CHECK(reached[0] == 0);  // only the masked point was near target 0
  CHECK(reached[1] == 1);
}
