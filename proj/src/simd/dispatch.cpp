#include "uerw/simd/kernels.hpp"

#include <stdexcept>

namespace uerw::simd {

namespace detail {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace detail

namespace {

Backend detect() { return detail::cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar; }

Backend g_backend = detect();

const detail::KernelTable& table() {
  return g_backend == Backend::Avx2 ? detail::avx2_table : detail::scalar_table;
}

}  // namespace

Backend active_backend() { return g_backend; }

const std::string& backend_name() {
  static const std::string scalar = "scalar", avx2 = "avx2";
  return g_backend == Backend::Avx2 ? avx2 : scalar;
}

void force_backend(Backend b) {
  if (b == Backend::Avx2 && !detail::cpu_has_avx2())
    throw std::runtime_error("AVX2 backend requested but not supported on this CPU");
  g_backend = b;
}

void reset_backend() { g_backend = detect(); }

void linear_forward(const double* x, const double* w, const double* bias, double* y,
                    std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  table().linear_forward(x, w, bias, y, batch, in_dim, out_dim);
}

void linear_backprop_input(const double* dy, const double* w, double* dx,
                           std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  table().linear_backprop_input(dy, w, dx, batch, in_dim, out_dim);
}

void linear_backprop_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t batch, std::size_t in_dim, std::size_t out_dim) {
  table().linear_backprop_params(dy, x, dw, db, batch, in_dim, out_dim);
}

void capture_scan(const double* xs, const double* ys, const double* zs,
                  const std::uint8_t* mask, std::size_t n_points,
                  const double* tx, const double* ty, const double* tz,
                  std::size_t n_targets, double r2, std::uint8_t* reached) {
  table().capture_scan(xs, ys, zs, mask, n_points, tx, ty, tz, n_targets, r2, reached);
}

}  // namespace uerw::simd
