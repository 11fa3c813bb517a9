#include "uerw/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "uerw/errors.hpp"

namespace uerw {

void FitConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ValidationError(std::string(what) + " must be positive");
  };
  positive(lambda1, "lambda1");
  positive(lambda2, "lambda2");
  positive(huber_3d_m, "huber_3d_m");
  positive(huber_2d_px, "huber_2d_px");
  positive(lr_start, "lr_start");
  positive(lr_end, "lr_end");
  if (samples_per_trial < 1) throw ValidationError("samples_per_trial must be >= 1");
  if (iterations < 0) throw ValidationError("iterations must be >= 0");
  if (weight_decay < 0.0) throw ValidationError("weight_decay must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ValidationError("adam moment decay rates must lie in [0, 1)");
  if (hidden_layers < 1 || width < 1 || encoding_bands < 1)
    throw ValidationError("network architecture fields must be >= 1");
  if (!(scale_lo > 0.0 && scale_lo < scale_hi))
    throw ValidationError("scale range must satisfy 0 < lo < hi");
}

FitConfig load_fit_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  FitConfig c;
  c.lambda1 = j.value("lambda1", c.lambda1);
  c.lambda2 = j.value("lambda2", c.lambda2);
  c.huber_3d_m = j.value("huber_3d_m", c.huber_3d_m);
  c.huber_2d_px = j.value("huber_2d_px", c.huber_2d_px);
  c.samples_per_trial = j.value("samples_per_trial", c.samples_per_trial);
  c.iterations = j.value("iterations", c.iterations);
  c.lr_start = j.value("lr_start", c.lr_start);
  c.lr_end = j.value("lr_end", c.lr_end);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.seed = j.value("seed", c.seed);
  c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
  c.width = j.value("width", c.width);
  c.encoding_bands = j.value("encoding_bands", c.encoding_bands);
  c.scale_lo = j.value("scale_lo", c.scale_lo);
  c.scale_hi = j.value("scale_hi", c.scale_hi);
  c.validate();
  return c;
}

double huber(double r, double delta) {
  return r <= delta ? 0.5 * r * r : delta * (r - 0.5 * delta);
}

double loss_3d(std::span<const Vec3> model, std::span<const Sample3> obs, double delta_m) {
  if (model.size() != obs.size()) throw ValidationError("loss_3d shape mismatch");
  if (model.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (!obs[j].present || obs[j].confidence <= 0.0) continue;
    sum += obs[j].confidence * huber((model[j] - obs[j].p).norm(), delta_m);
  }
  return sum / static_cast<double>(model.size());
}

double loss_2d(std::span<const Vec3> model, const CameraModel& cam,
               std::span<const Sample2> obs, double delta_px) {
  if (model.size() != obs.size()) throw ValidationError("loss_2d shape mismatch");
  if (model.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (!obs[j].present || obs[j].confidence <= 0.0) continue;
    const auto px = project(cam, model[j]);
    if (!px) continue;  // behind camera: confidence-0 handling
    const double du = px->u - obs[j].u;
    const double dv = px->v - obs[j].v;
    sum += obs[j].confidence * huber(std::sqrt(du * du + dv * dv), delta_px);
  }
  return sum / static_cast<double>(model.size());
}

FitProblem::FitProblem(const SkeletonSpec& spec, std::vector<CameraModel> cameras,
                       std::vector<TrialObservations> trials, FitConfig config)
    : spec_(spec),
      cameras_(std::move(cameras)),
      trials_(std::move(trials)),
      config_(std::move(config)),
      net_(2 * config_.encoding_bands, config_.hidden_layers, config_.width,
           static_cast<int>(spec.dof_count())) {
  config_.validate();
  spec_.validate();
  if (trials_.empty()) throw ValidationError("fit needs at least one trial");
  for (std::size_t i = 0; i < trials_.size(); ++i) {
    const auto& t = trials_[i];
    if (t.obs3d.frame_count() < 2)
      throw ValidationError("trial " + std::to_string(i) + " needs at least 2 frames");
    if (!t.obs2d.empty() && t.obs2d.size() != cameras_.size())
      throw ValidationError("trial " + std::to_string(i) +
                            ": obs2d count does not match camera count");
    spans_.emplace_back(t.obs3d.timestamps.front(), t.obs3d.timestamps.back());

    std::vector<KeypointBinding> binds(spec_.keypoints.size());
    for (std::size_t k = 0; k < spec_.keypoints.size(); ++k) {
      binds[k].obs3d = t.obs3d.index_of(spec_.keypoints[k].name);
      binds[k].obs2d.assign(cameras_.size(), -1);
      for (std::size_t c = 0; c < t.obs2d.size(); ++c)
        if (t.obs2d[c].frame_count() > 0)
          binds[k].obs2d[c] = t.obs2d[c].index_of(spec_.keypoints[k].name);
    }
    bindings_.push_back(std::move(binds));
  }
}

std::size_t FitProblem::param_count() const {
  return trials_.size() * net_.param_count() + spec_.scale_groups.size() +
         3 * spec_.keypoints.size();
}

void FitProblem::init_params(std::span<double> params, std::mt19937_64& rng) const {
  for (std::size_t i = 0; i < trials_.size(); ++i)
    net_.init_params(params.subspan(i * net_.param_count(), net_.param_count()), rng);
  double* beta = params.data() + trials_.size() * net_.param_count();
  for (std::size_t g = 0; g < spec_.scale_groups.size(); ++g) beta[g] = 1.0;
  double* off = beta + spec_.scale_groups.size();
  std::fill(off, off + 3 * spec_.keypoints.size(), 0.0);
}

std::vector<std::vector<std::size_t>> FitProblem::draw_samples(std::mt19937_64& rng) const {
  std::vector<std::vector<std::size_t>> out(trials_.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int s_count = config_.samples_per_trial;
  for (std::size_t i = 0; i < trials_.size(); ++i) {
    const auto& ts = trials_[i].obs3d.timestamps;
    const auto [t0, t1] = spans_[i];
    out[i].reserve(s_count);
    for (int s = 0; s < s_count; ++s) {
      const double u = (static_cast<double>(s) + unit(rng)) / static_cast<double>(s_count);
      const double t = t0 + u * (t1 - t0);
      // Snap to the nearest observation frame.
      auto it = std::lower_bound(ts.begin(), ts.end(), t);
      std::size_t f;
      if (it == ts.end()) {
        f = ts.size() - 1;
      } else {
        f = static_cast<std::size_t>(it - ts.begin());
        if (f > 0 && t - ts[f - 1] < ts[f] - t) --f;
      }
      out[i].push_back(f);
    }
  }
  return out;
}

Pose FitProblem::decode_pose(std::span<const double> raw, std::span<double> dtheta_draw) const {
  Pose pose;
  pose.q.resize(spec_.dof_count());
  std::size_t di = 0;
  for (const auto& seg : spec_.segments)
    for (const auto& a : seg.axes) {
      if (a.bounded) {
        const double th = std::tanh(raw[di]);
        // The affine rescale can overshoot the bound by one ulp at saturation.
        pose.q[di] = std::clamp(a.lo + 0.5 * (th + 1.0) * (a.hi - a.lo), a.lo, a.hi);
        if (!dtheta_draw.empty()) dtheta_draw[di] = 0.5 * (1.0 - th * th) * (a.hi - a.lo);
      } else {
        pose.q[di] = raw[di];
        if (!dtheta_draw.empty()) dtheta_draw[di] = 1.0;
      }
      ++di;
    }
  return pose;
}

BodyParams FitProblem::body_from_params(std::span<const double> params) const {
  BodyParams body;
  const double* beta = params.data() + trials_.size() * net_.param_count();
  body.scales.assign(beta, beta + spec_.scale_groups.size());
  const double* off = beta + spec_.scale_groups.size();
  body.offsets.resize(spec_.keypoints.size());
  for (std::size_t k = 0; k < spec_.keypoints.size(); ++k)
    body.offsets[k] = {off[3 * k], off[3 * k + 1], off[3 * k + 2]};
  return body;
}

Pose FitProblem::eval_pose(std::span<const double> params, std::size_t trial, double t) const {
  const std::size_t np = net_.param_count();
  const auto phi = params.subspan(trial * np, np);
  const auto [t0, t1] = spans_[trial];
  const std::vector<double> x = encode_time(t, t0, t1, config_.encoding_bands);
  Mlp::Workspace ws;
  std::vector<double> raw;
  net_.forward(phi, x, 1, raw, ws);
  return decode_pose(raw, {});
}

namespace {

// dL/dpixel -> dL/dworld-point for the pinhole projection.
Vec3 backproject_gradient(const CameraModel& cam, const Vec3& p_world, double gu, double gv) {
  const Vec3 pc = cam.to_camera(p_world);
  const double inv_z = 1.0 / pc.z;
  const Vec3 dl_dpc{cam.fx * inv_z * gu, cam.fy * inv_z * gv,
                    -(cam.fx * pc.x * gu + cam.fy * pc.y * gv) * inv_z * inv_z};
  return cam.rotation.transposed() * dl_dpc;
}

}  // namespace

double FitProblem::loss_and_grad(std::span<const double> params,
                                 const std::vector<std::vector<std::size_t>>& samples,
                                 std::span<double> grad) const {
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);

  const std::size_t np = net_.param_count();
  const std::size_t dof = spec_.dof_count();
  const std::size_t n_kp = spec_.keypoints.size();
  const double inv_j = 1.0 / static_cast<double>(n_kp);
  const BodyParams body = body_from_params(params);

  std::span<double> gscales;
  std::vector<Vec3> goffsets(n_kp, Vec3{});
  if (want_grad)
    gscales = {grad.data() + trials_.size() * np, spec_.scale_groups.size()};

  double total = 0.0;
  Mlp::Workspace ws;
  std::vector<double> x_enc, raw, dy;
  std::vector<double> dtheta_draw(dof), dq(dof);
  std::vector<Vec3> dl_dx(n_kp);

  for (std::size_t ti = 0; ti < trials_.size(); ++ti) {
    const auto& trial = trials_[ti];
    const auto& frames = samples[ti];
    const std::size_t batch = frames.size();
    const auto phi = params.subspan(ti * np, np);
    const auto [t0, t1] = spans_[ti];

    x_enc.resize(batch * net_.in_dim());
    for (std::size_t s = 0; s < batch; ++s) {
      const auto enc =
          encode_time(trial.obs3d.timestamps[frames[s]], t0, t1, config_.encoding_bands);
      std::copy(enc.begin(), enc.end(), x_enc.begin() + s * net_.in_dim());
    }
    net_.forward(phi, x_enc, batch, raw, ws);
    if (want_grad) dy.assign(batch * dof, 0.0);

    for (std::size_t s = 0; s < batch; ++s) {
      const std::size_t f = frames[s];
      const Pose pose =
          decode_pose({raw.data() + s * dof, dof}, want_grad ? std::span<double>(dtheta_draw)
                                                             : std::span<double>{});
      const ForwardTrace trace = forward_traced(spec_, pose, body);
      std::fill(dl_dx.begin(), dl_dx.end(), Vec3{});

      // 3D term.
      double l3 = 0.0;
      for (std::size_t k = 0; k < n_kp; ++k) {
        const int bi = bindings_[ti][k].obs3d;
        if (bi < 0) continue;
        const Sample3& ob = trial.obs3d.at(f, bi);
        if (!ob.present || ob.confidence <= 0.0) continue;
        const Vec3 r = trace.keypoints[k] - ob.p;
        const double n = r.norm();
        l3 += ob.confidence * huber(n, config_.huber_3d_m);
        if (want_grad) {
          const double factor = n <= config_.huber_3d_m ? 1.0 : config_.huber_3d_m / n;
          dl_dx[k] += (config_.lambda1 * inv_j * ob.confidence * factor) * r;
        }
      }
      total += config_.lambda1 * l3 * inv_j;

      // 2D terms.
      for (std::size_t ci = 0; ci < trial.obs2d.size(); ++ci) {
        if (trial.obs2d[ci].frame_count() == 0) continue;
        const CameraModel& cam = cameras_[ci];
        double l2 = 0.0;
        for (std::size_t k = 0; k < n_kp; ++k) {
          const int bi = bindings_[ti][k].obs2d[ci];
          if (bi < 0) continue;
          const Sample2& ob = trial.obs2d[ci].at(f, bi);
          if (!ob.present || ob.confidence <= 0.0) continue;
          const auto px = project(cam, trace.keypoints[k]);
          if (!px) continue;
          const double du = px->u - ob.u;
          const double dv = px->v - ob.v;
          const double n = std::sqrt(du * du + dv * dv);
          l2 += ob.confidence * huber(n, config_.huber_2d_px);
          if (want_grad) {
            const double factor = n <= config_.huber_2d_px ? 1.0 : config_.huber_2d_px / n;
            const double w = config_.lambda2 * inv_j * ob.confidence * factor;
            dl_dx[k] += backproject_gradient(cam, trace.keypoints[k], w * du, w * dv);
          }
        }
        total += config_.lambda2 * l2 * inv_j;
      }

      if (want_grad) {
        std::fill(dq.begin(), dq.end(), 0.0);
        std::fill(goffsets.begin(), goffsets.end(), Vec3{});
        backprop_keypoints(spec_, body, trace, dl_dx, dq, gscales, goffsets);
        double* go = grad.data() + trials_.size() * np + spec_.scale_groups.size();
        for (std::size_t k = 0; k < n_kp; ++k) {
          go[3 * k] += goffsets[k].x;
          go[3 * k + 1] += goffsets[k].y;
          go[3 * k + 2] += goffsets[k].z;
        }
        for (std::size_t d = 0; d < dof; ++d) dy[s * dof + d] = dq[d] * dtheta_draw[d];
      }
    }

    if (want_grad)
      net_.backward(phi, batch, dy, grad.subspan(ti * np, np), ws);
  }
  return total;
}

double FitProblem::loss(std::span<const double> params,
                        const std::vector<std::vector<std::size_t>>& samples) const {
  return loss_and_grad(params, samples, {});
}

FitResult fit(const SkeletonSpec& spec, const std::vector<CameraModel>& cameras,
              const std::vector<TrialObservations>& trials, const FitConfig& config,
              const std::vector<double>* initial_params) {
  FitProblem prob(spec, cameras, trials, config);
  const std::size_t n = prob.param_count();

  std::mt19937_64 rng(config.seed);
  std::vector<double> params(n);
  if (initial_params) {
    if (initial_params->size() != n)
      throw ValidationError("initial parameter vector has wrong size");
    params = *initial_params;
  } else {
    prob.init_params(params, rng);
  }

  std::vector<double> grad(n), m(n, 0.0), v(n, 0.0);
  FitResult result;
  result.loss_trace.reserve(config.iterations);

  // A short second-moment memory matters here: the pixel term's gradients are
  // orders of magnitude larger than the metric term's, and once the pixel
  // residuals are small the depth-direction signal only surfaces after the
  // accumulated second moment has decayed.
  const double beta1 = config.adam_beta1, beta2 = config.adam_beta2;
  constexpr double eps = 1e-8;
  const std::size_t beta_begin = prob.trial_count() * prob.phi_size();
  const std::size_t scale_count = spec.scale_groups.size();

  if (config.iterations == 0) {
    auto samples = prob.draw_samples(rng);
    result.loss_trace.push_back(prob.loss(params, samples));
  }

  for (int it = 0; it < config.iterations; ++it) {
    auto samples = prob.draw_samples(rng);
    const double loss = prob.loss_and_grad(params, samples, grad);
    if (!std::isfinite(loss))
      throw NumericError("non-finite total loss at iteration " + std::to_string(it));

    const double progress =
        config.iterations > 1 ? static_cast<double>(it) / (config.iterations - 1) : 1.0;
    const double lr = config.lr_end + 0.5 * (config.lr_start - config.lr_end) *
                                          (1.0 + std::cos(std::numbers::pi * progress));

    const double bc1 = 1.0 - std::pow(beta1, it + 1);
    const double bc2 = 1.0 - std::pow(beta2, it + 1);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      if (config.weight_decay > 0.0 && prob.param_is_network_weight(i))
        params[i] -= lr * config.weight_decay * params[i];
    }
    // Keep body scales inside the configured range.
    for (std::size_t g = 0; g < scale_count; ++g)
      params[beta_begin + g] =
          std::clamp(params[beta_begin + g], config.scale_lo, config.scale_hi);

    result.loss_trace.push_back(loss);
  }

  // Package results: per-trial parameters, body, per-frame poses and
  // reconstructed keypoints at the observation timestamps.
  const std::size_t np = prob.phi_size();
  result.body = prob.body_from_params(params);
  for (std::size_t ti = 0; ti < trials.size(); ++ti) {
    result.phi.emplace_back(params.begin() + ti * np, params.begin() + (ti + 1) * np);

    std::vector<Pose> poses;
    KeypointTrajectory rec;
    rec.timestamps = trials[ti].obs3d.timestamps;
    rec.frame_rate = trials[ti].obs3d.frame_rate;
    for (const auto& kp : spec.keypoints) rec.names.push_back(kp.name);
    rec.samples.reserve(rec.frame_count() * rec.keypoint_count());
    for (double t : rec.timestamps) {
      Pose pose = prob.eval_pose(params, ti, t);
      const auto kps = forward(spec, pose, result.body);
      for (const auto& p : kps) rec.samples.push_back(Sample3{p, 1.0, true});
      poses.push_back(std::move(pose));
    }
    result.poses.push_back(std::move(poses));
    result.reconstructed.push_back(std::move(rec));
  }
  return result;
}

}  // namespace uerw
