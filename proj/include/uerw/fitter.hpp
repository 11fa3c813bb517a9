#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uerw/camera.hpp"
#include "uerw/mlp.hpp"
#include "uerw/skeleton.hpp"
#include "uerw/trajectory.hpp"

namespace uerw {

struct FitConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double huber_3d_m = 0.10;
  double huber_2d_px = 5.0;
  int samples_per_trial = 300;
  int iterations = 2000;
  double lr_start = 1e-3;
  double lr_end = 1e-6;
  double weight_decay = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.99;
  std::uint64_t seed = 0;
  int hidden_layers = 2;
  int width = 128;
  int encoding_bands = 8;
  double scale_lo = 0.5;
  double scale_hi = 2.0;

  void validate() const;
};

FitConfig load_fit_config(const std::string& path);

// One trial's observations. obs2d is parallel to the camera list passed to
// fit(); entries may be empty (no 2D stream for that camera).
struct TrialObservations {
  KeypointTrajectory obs3d;
  std::vector<PixelTrajectory> obs2d;
};

struct FitResult {
  std::vector<std::vector<double>> phi;  // per-trial network parameters
  BodyParams body;
  std::vector<double> loss_trace;        // sampled total loss per iteration
  std::vector<std::vector<Pose>> poses;  // per trial, at observation frames
  std::vector<KeypointTrajectory> reconstructed;  // per trial, scoreable
};

// Huber penalty of a nonnegative residual: quadratic within delta.
double huber(double r, double delta);

// Mean confidence-weighted Huber of 3D residuals; missing obs count as c=0.
double loss_3d(std::span<const Vec3> model, std::span<const Sample3> obs, double delta_m);

// Mean confidence-weighted Huber of reprojection residuals; behind-camera
// model points are treated as confidence 0.
double loss_2d(std::span<const Vec3> model, const CameraModel& cam,
               std::span<const Sample2> obs, double delta_px);

// Joint optimization problem over per-trial network parameters and shared
// body parameters. Parameter layout: [phi_0 | phi_1 | ... | scales | offsets].
class FitProblem {
 public:
  FitProblem(const SkeletonSpec& spec, std::vector<CameraModel> cameras,
             std::vector<TrialObservations> trials, FitConfig config);

  std::size_t trial_count() const { return trials_.size(); }
  std::size_t param_count() const;
  std::size_t phi_size() const { return net_.param_count(); }
  const Mlp& net() const { return net_; }
  const SkeletonSpec& spec() const { return spec_; }
  const FitConfig& config() const { return config_; }

  void init_params(std::span<double> params, std::mt19937_64& rng) const;

  // One stratified-uniform draw of observation frames, per trial.
  std::vector<std::vector<std::size_t>> draw_samples(std::mt19937_64& rng) const;

  double loss(std::span<const double> params,
              const std::vector<std::vector<std::size_t>>& samples) const;
  double loss_and_grad(std::span<const double> params,
                       const std::vector<std::vector<std::size_t>>& samples,
                       std::span<double> grad) const;

  // Pose at time t for one trial under the given full parameter vector.
  Pose eval_pose(std::span<const double> params, std::size_t trial, double t) const;

  BodyParams body_from_params(std::span<const double> params) const;

  bool param_is_network_weight(std::size_t i) const { return i < trials_.size() * phi_size(); }

 private:
  struct KeypointBinding {
    int obs3d = -1;                 // index into trial obs3d names, -1 if absent
    std::vector<int> obs2d;         // per camera
  };

  Pose decode_pose(std::span<const double> raw, std::span<double> dtheta_draw) const;

  SkeletonSpec spec_;
  std::vector<CameraModel> cameras_;
  std::vector<TrialObservations> trials_;
  FitConfig config_;
  Mlp net_;
  std::vector<std::vector<KeypointBinding>> bindings_;  // per trial, per skeleton keypoint
  std::vector<std::pair<double, double>> spans_;        // per trial time span
};

// Runs the configured number of Adam steps (cosine learning-rate decay,
// decoupled weight decay on network weights). Deterministic per seed.
FitResult fit(const SkeletonSpec& spec, const std::vector<CameraModel>& cameras,
              const std::vector<TrialObservations>& trials, const FitConfig& config,
              const std::vector<double>* initial_params = nullptr);

}  // namespace uerw
