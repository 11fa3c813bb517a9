// Scalar reference kernels. Compiled with -ffp-contract=off so that the
// capture scan makes bit-identical decisions to the vectorized variant.
#include "uerw/simd/kernels.hpp"

namespace uerw::simd::detail {

namespace {

void linear_forward_scalar(const double* x, const double* w, const double* bias, double* y,
                           std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x + b * in_dim;
    double* yb = y + b * out_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wo = w + o * in_dim;
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += xb[i] * wo[i];
      yb[o] = bias ? acc + bias[o] : acc;
    }
  }
}

void linear_backprop_input_scalar(const double* dy, const double* w, double* dx,
                                  std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  for (std::size_t b = 0; b < batch; ++b) {
    const double* dyb = dy + b * out_dim;
    double* dxb = dx + b * in_dim;
    for (std::size_t i = 0; i < in_dim; ++i) dxb[i] = 0.0;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double g = dyb[o];
      const double* wo = w + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) dxb[i] += g * wo[i];
    }
  }
}

void linear_backprop_params_scalar(const double* dy, const double* x, double* dw, double* db,
                                   std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  for (std::size_t b = 0; b < batch; ++b) {
    const double* dyb = dy + b * out_dim;
    const double* xb = x + b * in_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double g = dyb[o];
      double* dwo = dw + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) dwo[i] += g * xb[i];
      if (db) db[o] += g;
    }
  }
}

void capture_scan_scalar(const double* xs, const double* ys, const double* zs,
                         const std::uint8_t* mask, std::size_t n_points,
                         const double* tx, const double* ty, const double* tz,
                         std::size_t n_targets, double r2, std::uint8_t* reached) {
  for (std::size_t t = 0; t < n_targets; ++t) {
    const double cx = tx[t], cy = ty[t], cz = tz[t];
    std::uint8_t hit = 0;
    for (std::size_t p = 0; p < n_points; ++p) {
      if (mask && !mask[p]) continue;
      const double dx = xs[p] - cx;
      const double dy = ys[p] - cy;
      const double dz = zs[p] - cz;
      const double d2 = dx * dx + dy * dy + dz * dz;
      if (d2 <= r2) {
        hit = 1;
        break;
      }
    }
    reached[t] = hit;
  }
}

}  // namespace

const KernelTable scalar_table = {
    linear_forward_scalar,
    linear_backprop_input_scalar,
    linear_backprop_params_scalar,
    capture_scan_scalar,
};

}  // namespace uerw::simd::detail
