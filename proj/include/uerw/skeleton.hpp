#pragma once

#include <span>
#include <string>
#include <vector>

#include "uerw/geometry.hpp"

namespace uerw {

enum class AxisKind { Rotation, Translation };

// One degree of freedom: a rotation or translation about/along a unit axis
// in the owning segment's parent-aligned frame, applied in spec order.
struct JointAxis {
  std::string name;
  AxisKind kind = AxisKind::Rotation;
  Vec3 axis{0, 0, 1};
  bool bounded = true;
  double lo = 0.0, hi = 0.0;  // radians (rotation) or meters (translation)
};

struct Segment {
  std::string name;
  int parent = -1;  // index into segments, -1 for the root
  Vec3 rest_offset; // from parent origin, parent frame, meters (pre-scale)
  int scale_group = 0;
  std::vector<JointAxis> axes;
};

struct SkeletonKeypoint {
  std::string name;
  int segment = 0;
  Vec3 rest_local;  // segment frame, meters (pre-scale)
};

struct SkeletonSpec {
  std::vector<std::string> scale_groups;
  std::vector<Segment> segments;   // topologically ordered, parent < child
  std::vector<SkeletonKeypoint> keypoints;

  std::size_t dof_count() const;
  std::size_t rotational_dof_count() const;

  // Flat DoF view: (segment index, axis index) per DoF in traversal order.
  struct DofRef {
    int segment;
    int axis;
  };
  std::vector<DofRef> dofs() const;
  std::vector<std::string> dof_names() const;

  int segment_index(const std::string& name) const;
  int keypoint_index(const std::string& name) const;

  void validate() const;  // throws ValidationError
};

// Shared body parameters: one positive scale per group plus a per-keypoint
// 3D offset in segment-local meters.
struct BodyParams {
  std::vector<double> scales;
  std::vector<Vec3> offsets;

  static BodyParams identity(const SkeletonSpec& spec);
  void validate(const SkeletonSpec& spec, double scale_lo = 0.5, double scale_hi = 2.0) const;
};

// Joint configuration: one value per DoF in spec order.
struct Pose {
  std::vector<double> q;
};

// Per-DoF record needed for reverse-mode accumulation.
struct ForwardTrace {
  std::vector<Transform> segment_world;
  std::vector<Vec3> dof_world_axis;
  std::vector<Vec3> dof_world_origin;  // rotation pivot, world
  std::vector<Vec3> keypoints;
};

// Forward kinematics. With check_limits, an out-of-limit bounded DoF throws
// a ValidationError naming the axis.
std::vector<Vec3> forward(const SkeletonSpec& spec, const Pose& pose, const BodyParams& body,
                          bool check_limits = false);

ForwardTrace forward_traced(const SkeletonSpec& spec, const Pose& pose, const BodyParams& body);

// Accumulates dL/dq, dL/dscales, dL/doffsets from per-keypoint position
// gradients. Output spans must be pre-sized; values are added, not assigned.
void backprop_keypoints(const SkeletonSpec& spec, const BodyParams& body,
                        const ForwardTrace& trace, std::span<const Vec3> dl_dkeypoint,
                        std::span<double> dq, std::span<double> dscales,
                        std::span<Vec3> doffsets);

SkeletonSpec load_skeleton(const std::string& path);
void save_skeleton(const SkeletonSpec& spec, const std::string& path);

// Shipped torso + right-arm chain: 16 DoF, 12 keypoints.
SkeletonSpec default_skeleton();

}  // namespace uerw
