#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uerw/geometry.hpp"
#include "uerw/torso_frame.hpp"

namespace uerw {

// Octant of the torso-local space, identified by the signs of the
// (ml, ap, v) components. A component exactly 0 classifies as positive.
struct OctantLabel {
  bool ml_positive = true;  // + = ipsilateral
  bool ap_positive = true;  // + = anterior
  bool v_positive = true;   // + = superior

  bool operator==(const OctantLabel&) const = default;

  // Canonical name, e.g. "Sup. Ant. Ipsil.".
  std::string name() const;

  // The two posterior-contralateral octants are excluded from analysis.
  bool analyzed() const { return ap_positive || ml_positive; }

  // Dense index in [0, 8): (ml<<2) | (ap<<1) | v.
  int index() const {
    return (ml_positive ? 4 : 0) | (ap_positive ? 2 : 0) | (v_positive ? 1 : 0);
  }
  static OctantLabel from_index(int i) {
    return {(i & 4) != 0, (i & 2) != 0, (i & 1) != 0};
  }
  static OctantLabel from_name(const std::string& name);
};

inline OctantLabel classify_octant(const Vec3& p_local) {
  return {p_local.x >= 0.0, p_local.y >= 0.0, p_local.z >= 0.0};
}

constexpr int kOctantCount = 8;

// Target sphere in torso-local coordinates.
struct TargetSphere {
  double radius = 0.0;
  std::vector<Vec3> targets;
  std::vector<OctantLabel> labels;
};

// Maximum torso-local wrist distance over present frames.
double peak_reach(const LocalWristTrajectory& wrist_local);

// Fibonacci lattice on the sphere; deterministic for a given n, the seed
// controls a global azimuthal offset.
TargetSphere generate_targets(double radius, std::size_t n, std::uint64_t seed);

// reached[i] = some present frame within capture_radius of target i.
std::vector<std::uint8_t> simulate_capture(const LocalWristTrajectory& wrist_local,
                                           const TargetSphere& sphere,
                                           double capture_radius = 0.05);

struct OctantScore {
  OctantLabel octant;
  std::size_t available = 0;
  std::size_t reached = 0;
  // Not applicable when available == 0.
  std::optional<double> percent;
};

struct WorkspaceReport {
  double peak_reach = 0.0;
  std::vector<OctantScore> octants;  // the six analyzed octants, fixed order

  const OctantScore& by_octant(const OctantLabel& o) const;
};

WorkspaceReport percent_reached(const std::vector<std::uint8_t>& flags,
                                const TargetSphere& sphere, double peak_reach_m = 0.0);

// Fixed presentation order for the six analyzed octants (Table-style).
const std::vector<OctantLabel>& analyzed_octants();

}  // namespace uerw
