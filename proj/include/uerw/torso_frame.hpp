#pragma once

#include <optional>
#include <string>

#include "uerw/geometry.hpp"
#include "uerw/trajectory.hpp"

namespace uerw {

// Anatomical landmarks for one frame, world coordinates in meters.
// Marker names are used here; the keypoint variant maps via LandmarkMap.
struct FrameLandmarks {
  Vec3 sternal_notch;
  Vec3 t1;
  Vec3 t8;
};

// Per-frame right-handed anatomical torso basis.
// +ml = toward subject's right (ipsilateral for the right-arm task),
// +ap = anterior, +v = superior.
struct TorsoFrame {
  Vec3 origin;
  Vec3 ml_axis;
  Vec3 ap_axis;
  Vec3 v_axis;
};

// Maps the three torso landmarks and two wrist landmarks onto trajectory
// keypoint names. Defaults follow the markerless keypoint vocabulary.
struct LandmarkMap {
  std::string sternal_notch = "clavicle";
  std::string t1 = "backneck";
  std::string t8 = "upper_back";
  std::string wrist_radial = "r_wrist_radial";
  std::string wrist_ulnar = "r_wrist_ulnar";
};

LandmarkMap load_landmark_map(const std::string& path);

// Throws ValidationError on collinear/coincident landmarks.
TorsoFrame build_frame(const FrameLandmarks& landmarks);

// Local (ml, ap, v) components of a world point.
Vec3 to_local(const TorsoFrame& frame, const Vec3& p_world);

inline Vec3 wrist_end_effector(const Vec3& radial, const Vec3& ulnar) {
  return (radial + ulnar) * 0.5;
}

// Per-frame torso-local wrist positions for a trajectory. Frames with a
// missing torso landmark or wrist marker are emitted as missing.
struct LocalWristTrajectory {
  std::vector<double> timestamps;
  std::vector<std::optional<Vec3>> local;  // torso-local wrist per frame
};

LocalWristTrajectory local_wrist_trajectory(const KeypointTrajectory& traj,
                                            const LandmarkMap& map);

}  // namespace uerw
