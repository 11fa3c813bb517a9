#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uerw/geometry.hpp"

namespace uerw {

// Calibrated pinhole camera, no lens distortion. World axes follow the
// study convention: +x subject right, +y anterior, +z up.
struct CameraModel {
  std::string name = "camera";
  double fx = 1000.0, fy = 1000.0;  // pixels
  double cx = 500.0, cy = 500.0;    // pixels
  int width = 1000, height = 1000;
  Mat3 rotation;    // world -> camera
  Vec3 translation; // world -> camera, meters

  void validate() const;

  Vec3 to_camera(const Vec3& p_world) const { return rotation * p_world + translation; }

  // Camera center in world coordinates.
  Vec3 center() const { return -(rotation.transposed() * translation); }

  // Unit world-space direction from the camera center through the point.
  Vec3 ray_direction(const Vec3& p_world) const { return normalized(p_world - center()); }
};

struct Pixel {
  double u = 0.0, v = 0.0;
};

// Projects a world point; empty when the point is at or behind the camera
// plane (callers treat that sample as confidence 0).
std::optional<Pixel> project(const CameraModel& cam, const Vec3& p_world);

enum class StudyPoseKind { Frontal, Offset };

// Synthetic-study rig: the frontal camera sits anterior and superior of the
// subject looking at subject_origin; the offset camera is the frontal pose
// rotated 45 degrees azimuthally toward the subject's right.
CameraModel study_pose(StudyPoseKind kind, const Vec3& subject_origin, double distance_m,
                       double elevation_deg);

// Camera config file: array of cameras, each with intrinsics plus either an
// explicit pose or study_pose parameters.
std::vector<CameraModel> load_cameras(const std::string& path);

}  // namespace uerw
