#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace uerw {

// Sinusoidal encoding of normalized time: [sin(2^k pi t), cos(2^k pi t)]
// for k = 0..bands-1. t is clamped to [0, 1].
std::vector<double> encode_time(double t, double span_start, double span_end, int bands);

// Fixed-architecture MLP over externally owned flat parameters.
// Layout: per linear layer, W (out x in, row-major) then bias (out).
// Hidden activations are GELU; the output layer is linear.
class Mlp {
 public:
  Mlp(int in_dim, int hidden_layers, int width, int out_dim);

  std::size_t param_count() const { return param_count_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

  // Small random weights scaled by 1/sqrt(fan_in), zero biases.
  void init_params(std::span<double> params, std::mt19937_64& rng) const;

  // Scratch buffers reused across calls; holds pre-activations for backward.
  struct Workspace {
    std::vector<std::vector<double>> pre;   // per layer, batch x out
    std::vector<std::vector<double>> act;   // per layer input, batch x in
    std::vector<std::vector<double>> grad;  // per layer, batch x out
  };

  // Y (batch x out_dim) from X (batch x in_dim).
  void forward(std::span<const double> params, const std::vector<double>& x,
               std::size_t batch, std::vector<double>& y, Workspace& ws) const;

  // Accumulates dL/dparams from dL/dY after a matching forward() call.
  void backward(std::span<const double> params, std::size_t batch,
                const std::vector<double>& dy, std::span<double> dparams,
                Workspace& ws) const;

 private:
  int in_dim_, out_dim_;
  std::vector<int> layer_in_, layer_out_;  // per linear layer
  std::vector<std::size_t> w_offset_, b_offset_;
  std::size_t param_count_;
};

}  // namespace uerw
