#include "uerw/workspace.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "uerw/errors.hpp"
#include "uerw/simd/kernels.hpp"

namespace uerw {

std::string OctantLabel::name() const {
  std::string s = v_positive ? "Sup." : "Inf.";
  s += ap_positive ? " Ant." : " Post.";
  s += ml_positive ? " Ipsil." : " Contra.";
  return s;
}

OctantLabel OctantLabel::from_name(const std::string& name) {
  for (int i = 0; i < kOctantCount; ++i) {
    OctantLabel o = from_index(i);
    if (o.name() == name) return o;
  }
  throw ValidationError("unknown octant name '" + name + "'");
}

const std::vector<OctantLabel>& analyzed_octants() {
  // Table I row order.
  static const std::vector<OctantLabel> order = {
      {true, true, true},    // Sup. Ant. Ipsil.
      {false, true, true},   // Sup. Ant. Contra.
      {true, false, true},   // Sup. Post. Ipsil.
      {true, true, false},   // Inf. Ant. Ipsil.
      {false, true, false},  // Inf. Ant. Contra.
      {true, false, false},  // Inf. Post. Ipsil.
  };
  return order;
}

double peak_reach(const LocalWristTrajectory& wrist_local) {
  double best = -1.0;
  for (const auto& p : wrist_local.local)
    if (p) best = std::max(best, p->norm());
  if (best < 0.0) throw ValidationError("peak reach undefined: no present wrist frames");
  return best;
}

TargetSphere generate_targets(double radius, std::size_t n, std::uint64_t seed) {
  if (!(radius > 0.0)) throw ValidationError("target sphere radius must be positive");
  if (n < 8) throw ValidationError("target count must be at least 8");

  std::mt19937_64 rng(seed);
  const double phase =
      std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));

  TargetSphere sphere;
  sphere.radius = radius;
  sphere.targets.reserve(n);
  sphere.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Latitude bands uniform in z, azimuth advancing by the golden angle.
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r_xy = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double az = phase + golden_angle * static_cast<double>(i);
    Vec3 p{r_xy * std::cos(az), r_xy * std::sin(az), z};
    // Renormalize so the radius invariant holds to machine precision.
    p = normalized(p) * radius;
    sphere.targets.push_back(p);
    sphere.labels.push_back(classify_octant(p));
  }
  return sphere;
}

std::vector<std::uint8_t> simulate_capture(const LocalWristTrajectory& wrist_local,
                                           const TargetSphere& sphere, double capture_radius) {
  if (!(capture_radius > 0.0)) throw ValidationError("capture radius must be positive");
  if (sphere.targets.size() != sphere.labels.size())
    throw ValidationError("target sphere labels misaligned");

  // Compact present frames into SoA for the scan kernel.
  std::vector<double> xs, ys, zs;
  xs.reserve(wrist_local.local.size());
  for (const auto& p : wrist_local.local) {
    if (!p) continue;
    xs.push_back(p->x);
    ys.push_back(p->y);
    zs.push_back(p->z);
  }

  const std::size_t nt = sphere.targets.size();
  std::vector<double> tx(nt), ty(nt), tz(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    tx[t] = sphere.targets[t].x;
    ty[t] = sphere.targets[t].y;
    tz[t] = sphere.targets[t].z;
  }

  std::vector<std::uint8_t> reached(nt, 0);
  if (!xs.empty())
    simd::capture_scan(xs.data(), ys.data(), zs.data(), nullptr, xs.size(), tx.data(),
                       ty.data(), tz.data(), nt, capture_radius * capture_radius,
                       reached.data());
  return reached;
}

const OctantScore& WorkspaceReport::by_octant(const OctantLabel& o) const {
  for (const auto& s : octants)
    if (s.octant == o) return s;
  throw ValidationError("octant " + o.name() + " not in report");
}

WorkspaceReport percent_reached(const std::vector<std::uint8_t>& flags,
                                const TargetSphere& sphere, double peak_reach_m) {
  if (flags.size() != sphere.targets.size())
    throw ValidationError("capture flags misaligned with target sphere");

  std::array<std::size_t, kOctantCount> avail{}, hit{};
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const int idx = sphere.labels[i].index();
    ++avail[idx];
    if (flags[i]) ++hit[idx];
  }

  WorkspaceReport report;
  report.peak_reach = peak_reach_m > 0.0 ? peak_reach_m : sphere.radius;
  for (const auto& o : analyzed_octants()) {
    OctantScore s;
    s.octant = o;
    s.available = avail[o.index()];
    s.reached = hit[o.index()];
    if (s.available > 0)
      s.percent = 100.0 * static_cast<double>(s.reached) / static_cast<double>(s.available);
    report.octants.push_back(s);
  }
  return report;
}

}  // namespace uerw
