#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Data-parallel inner loops used by the fitter and the capture simulation.
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2, a vectorized variant selected at runtime. The capture kernel is
// bit-exact across variants; the linear-algebra kernels may differ by
// FMA rounding and are equivalence-tested to a tight relative tolerance.
namespace uerw::simd {

enum class Backend { Scalar, Avx2 };

// Backend chosen for the current process (auto-detected on first use).
Backend active_backend();
const std::string& backend_name();

// Test hook: force a specific backend. Throws if unsupported on this CPU.
void force_backend(Backend b);
void reset_backend();

// Y[b,o] = sum_i X[b,i] * W[o,i] + bias[o]. Row-major. bias may be null.
void linear_forward(const double* x, const double* w, const double* bias, double* y,
                    std::size_t batch, std::size_t in_dim, std::size_t out_dim);

// dX[b,i] = sum_o dY[b,o] * W[o,i].
void linear_backprop_input(const double* dy, const double* w, double* dx,
                           std::size_t batch, std::size_t in_dim, std::size_t out_dim);

// dW[o,i] += sum_b dY[b,o] * X[b,i];  dB[o] += sum_b dY[b,o]. dB may be null.
void linear_backprop_params(const double* dy, const double* x, double* dw, double* db,
                            std::size_t batch, std::size_t in_dim, std::size_t out_dim);

// reached[t] = 1 if any of the n_points (xs,ys,zs) lies within sqrt(r2) of
// target t. Points with mask[p] == 0 are skipped. Bit-exact across backends.
void capture_scan(const double* xs, const double* ys, const double* zs,
                  const std::uint8_t* mask, std::size_t n_points,
                  const double* tx, const double* ty, const double* tz,
                  std::size_t n_targets, double r2, std::uint8_t* reached);

namespace detail {

struct KernelTable {
  void (*linear_forward)(const double*, const double*, const double*, double*,
                         std::size_t, std::size_t, std::size_t);
  void (*linear_backprop_input)(const double*, const double*, double*,
                                std::size_t, std::size_t, std::size_t);
  void (*linear_backprop_params)(const double*, const double*, double*, double*,
                                 std::size_t, std::size_t, std::size_t);
  void (*capture_scan)(const double*, const double*, const double*, const std::uint8_t*,
                       std::size_t, const double*, const double*, const double*,
                       std::size_t, double, std::uint8_t*);
};

extern const KernelTable scalar_table;
extern const KernelTable avx2_table;
bool cpu_has_avx2();

}  // namespace detail

}  // namespace uerw::simd
