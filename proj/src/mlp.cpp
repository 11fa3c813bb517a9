#include "uerw/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "uerw/simd/kernels.hpp"

namespace uerw {

std::vector<double> encode_time(double t, double span_start, double span_end, int bands) {
  double tn = span_end > span_start ? (t - span_start) / (span_end - span_start) : 0.0;
  tn = std::clamp(tn, 0.0, 1.0);
  std::vector<double> enc(2 * static_cast<std::size_t>(bands));
  double freq = std::numbers::pi;
  for (int k = 0; k < bands; ++k) {
    enc[2 * k] = std::sin(freq * tn);
    enc[2 * k + 1] = std::cos(freq * tn);
    freq *= 2.0;
  }
  return enc;
}

namespace {

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * (1.0 / std::numbers::sqrt2))); }

inline double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * (1.0 / std::numbers::sqrt2)));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

}  // namespace

Mlp::Mlp(int in_dim, int hidden_layers, int width, int out_dim)
    : in_dim_(in_dim), out_dim_(out_dim) {
  int cur = in_dim;
  for (int l = 0; l < hidden_layers; ++l) {
    layer_in_.push_back(cur);
    layer_out_.push_back(width);
    cur = width;
  }
  layer_in_.push_back(cur);
  layer_out_.push_back(out_dim);

  std::size_t off = 0;
  for (std::size_t l = 0; l < layer_in_.size(); ++l) {
    w_offset_.push_back(off);
    off += static_cast<std::size_t>(layer_in_[l]) * layer_out_[l];
    b_offset_.push_back(off);
    off += layer_out_[l];
  }
  param_count_ = off;
}

void Mlp::init_params(std::span<double> params, std::mt19937_64& rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l < layer_in_.size(); ++l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer_in_[l]));
    double* w = params.data() + w_offset_[l];
    for (int i = 0; i < layer_in_[l] * layer_out_[l]; ++i) w[i] = scale * gauss(rng);
    double* b = params.data() + b_offset_[l];
    for (int i = 0; i < layer_out_[l]; ++i) b[i] = 0.0;
  }
}

void Mlp::forward(std::span<const double> params, const std::vector<double>& x,
                  std::size_t batch, std::vector<double>& y, Workspace& ws) const {
  const std::size_t n_layers = layer_in_.size();
  ws.pre.resize(n_layers);
  ws.act.resize(n_layers);

  ws.act[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    ws.pre[l].resize(batch * layer_out_[l]);
    simd::linear_forward(ws.act[l].data(), params.data() + w_offset_[l],
                         params.data() + b_offset_[l], ws.pre[l].data(), batch, layer_in_[l],
                         layer_out_[l]);
    if (l + 1 < n_layers) {
      ws.act[l + 1].resize(batch * layer_out_[l]);
      for (std::size_t i = 0; i < ws.pre[l].size(); ++i) ws.act[l + 1][i] = gelu(ws.pre[l][i]);
    }
  }
  y = ws.pre.back();
}

void Mlp::backward(std::span<const double> params, std::size_t batch,
                   const std::vector<double>& dy, std::span<double> dparams,
                   Workspace& ws) const {
  const std::size_t n_layers = layer_in_.size();
  ws.grad.resize(n_layers);
  ws.grad[n_layers - 1] = dy;

  for (std::size_t li = n_layers; li-- > 0;) {
    simd::linear_backprop_params(ws.grad[li].data(), ws.act[li].data(),
                                 dparams.data() + w_offset_[li], dparams.data() + b_offset_[li],
                                 batch, layer_in_[li], layer_out_[li]);
    if (li == 0) break;
    ws.grad[li - 1].resize(batch * layer_in_[li]);
    simd::linear_backprop_input(ws.grad[li].data(), params.data() + w_offset_[li],
                                ws.grad[li - 1].data(), batch, layer_in_[li], layer_out_[li]);
    // Through the GELU of the previous layer.
    const auto& pre = ws.pre[li - 1];
    for (std::size_t i = 0; i < ws.grad[li - 1].size(); ++i)
      ws.grad[li - 1][i] *= gelu_grad(pre[i]);
  }
}

}  // namespace uerw
