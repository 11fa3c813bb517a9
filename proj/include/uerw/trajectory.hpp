#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uerw/geometry.hpp"

namespace uerw {

// One keypoint observation in one frame. Missing samples are explicit,
// never encoded as sentinel coordinates.
struct Sample3 {
  Vec3 p;
  double confidence = 1.0;
  bool present = false;

  bool operator==(const Sample3&) const = default;
};

struct Sample2 {
  double u = 0.0, v = 0.0;
  double confidence = 1.0;
  bool present = false;

  bool operator==(const Sample2&) const = default;
};

// Time-stamped 3D keypoint trajectory. Storage is frame-major:
// sample(f, k) = samples[f * names.size() + k].
struct KeypointTrajectory {
  double frame_rate = 0.0;  // Hz, informational; downstream math uses timestamps
  std::vector<double> timestamps;
  std::vector<std::string> names;
  std::vector<Sample3> samples;

  std::size_t frame_count() const { return timestamps.size(); }
  std::size_t keypoint_count() const { return names.size(); }

  const Sample3& at(std::size_t frame, std::size_t kp) const {
    return samples[frame * names.size() + kp];
  }
  Sample3& at(std::size_t frame, std::size_t kp) {
    return samples[frame * names.size() + kp];
  }

  // Index of a keypoint name, or -1.
  int index_of(const std::string& name) const;

  // Throws ValidationError on any invariant violation.
  void validate() const;

  bool operator==(const KeypointTrajectory&) const = default;
};

// Same layout with 2D pixel coordinates.
struct PixelTrajectory {
  double frame_rate = 0.0;
  std::vector<double> timestamps;
  std::vector<std::string> names;
  std::vector<Sample2> samples;

  std::size_t frame_count() const { return timestamps.size(); }
  std::size_t keypoint_count() const { return names.size(); }

  const Sample2& at(std::size_t frame, std::size_t kp) const {
    return samples[frame * names.size() + kp];
  }
  Sample2& at(std::size_t frame, std::size_t kp) {
    return samples[frame * names.size() + kp];
  }

  int index_of(const std::string& name) const;
  void validate() const;

  bool operator==(const PixelTrajectory&) const = default;
};

enum class TrajectoryFormat { Csv, Jsonl };

KeypointTrajectory load_trajectory(const std::string& path, TrajectoryFormat format);
void save_trajectory(const KeypointTrajectory& traj, const std::string& path,
                     TrajectoryFormat format);

PixelTrajectory load_pixel_trajectory(const std::string& path);
void save_pixel_trajectory(const PixelTrajectory& traj, const std::string& path);

// Infer a nominal frame rate from the median timestamp spacing; 0 for < 2 frames.
double infer_frame_rate(const std::vector<double>& timestamps);

struct GapSummary {
  std::string name;
  std::size_t missing_count = 0;
  std::size_t longest_run = 0;
};

std::vector<GapSummary> gap_report(const KeypointTrajectory& traj);

}  // namespace uerw
