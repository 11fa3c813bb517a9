#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uerw/camera.hpp"
#include "uerw/skeleton.hpp"
#include "uerw/torso_frame.hpp"
#include "uerw/trajectory.hpp"
#include "uerw/workspace.hpp"

namespace uerw {

struct ReachDirective {
  OctantLabel octant;
  double duration_s = 2.0;
  int density = 2;  // reach waypoints within the directive window
};

struct NoiseSpec {
  double sigma_3d_m = 0.0;   // isotropic 3D keypoint noise
  double sigma_px = 0.0;     // 2D pixel noise
  double dropout = 0.0;      // per-sample confidence dropout probability
  std::map<std::string, double> depth_sigma_m;  // camera name -> along-ray sigma
};

struct TrialScript {
  std::vector<ReachDirective> directives;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  double frame_rate = 60.0;

  void validate() const;
};

TrialScript load_trial_script(const std::string& path);

struct SyntheticTrial {
  std::vector<double> timestamps;
  std::vector<Pose> poses;                       // ground truth
  KeypointTrajectory clean;
  std::vector<PixelTrajectory> clean_2d;         // per camera
  KeypointTrajectory noisy;                      // isotropic noise + dropout
  std::vector<KeypointTrajectory> noisy_depth;   // per camera, + along-ray noise
  std::vector<PixelTrajectory> noisy_2d;         // per camera, pixel noise + dropout
};

// Deterministic per script seed. Throws ValidationError naming the directive
// when a scripted octant is unreachable under the joint limits.
SyntheticTrial generate_trial(const SkeletonSpec& spec,
                              const std::vector<CameraModel>& cameras,
                              const TrialScript& script);

// Zero-mean Gaussian perturbation along each present point's camera ray.
KeypointTrajectory inject_depth_noise(const KeypointTrajectory& traj, const CameraModel& cam,
                                      double sigma_m, std::uint64_t seed);

// Independent all-pairs reference scorer; no shared code with the capture
// pipeline beyond the data types.
WorkspaceReport brute_force_score(const LocalWristTrajectory& wrist_local,
                                  const TargetSphere& sphere, double capture_radius);

}  // namespace uerw
