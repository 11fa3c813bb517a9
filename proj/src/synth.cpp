#include "uerw/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "uerw/errors.hpp"

namespace uerw {

void TrialScript::validate() const {
  if (directives.empty()) throw ValidationError("trial script has no directives");
  for (std::size_t i = 0; i < directives.size(); ++i) {
    if (!(directives[i].duration_s > 0.0))
      throw ValidationError("directive " + std::to_string(i) + ": duration must be positive");
    if (directives[i].density < 1)
      throw ValidationError("directive " + std::to_string(i) + ": density must be >= 1");
  }
  if (noise.sigma_3d_m < 0.0 || noise.sigma_px < 0.0)
    throw ValidationError("noise sigma must be >= 0");
  for (const auto& [name, s] : noise.depth_sigma_m)
    if (s < 0.0) throw ValidationError("depth sigma for '" + name + "' must be >= 0");
  if (!(noise.dropout >= 0.0 && noise.dropout < 1.0))
    throw ValidationError("dropout must be in [0, 1)");
  if (!(frame_rate > 0.0)) throw ValidationError("frame rate must be positive");
}

TrialScript load_trial_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  TrialScript s;
  s.seed = j.value("seed", s.seed);
  s.frame_rate = j.value("frame_rate", s.frame_rate);
  try {
    for (const auto& d : j.at("directives")) {
      ReachDirective rd;
      rd.octant = OctantLabel::from_name(d.at("octant").get<std::string>());
      rd.duration_s = d.value("duration_s", rd.duration_s);
      rd.density = d.value("density", rd.density);
      s.directives.push_back(rd);
    }
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      s.noise.sigma_3d_m = n.value("sigma_3d_m", 0.0);
      s.noise.sigma_px = n.value("sigma_px", 0.0);
      s.noise.dropout = n.value("dropout", 0.0);
      if (n.contains("depth_sigma_m"))
        for (auto& [cam, sig] : n["depth_sigma_m"].items())
          s.noise.depth_sigma_m[cam] = sig.get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  s.validate();
  return s;
}

namespace {

// Mix a stream tag into the script seed so the noise channels draw from
// independent deterministic streams.
std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t x = seed ^ (tag * 0x9E3779B97F4A7C15ull);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

struct ArmDofs {
  std::vector<std::size_t> indices;  // bounded DoF positions in the flat q vector
};

ArmDofs bounded_dofs(const SkeletonSpec& spec) {
  ArmDofs out;
  std::size_t qi = 0;
  for (const auto& seg : spec.segments)
    for (const auto& a : seg.axes) {
      if (a.bounded) out.indices.push_back(qi);
      ++qi;
    }
  return out;
}

Pose neutral_pose(const SkeletonSpec& spec) {
  Pose p;
  p.q.assign(spec.dof_count(), 0.0);
  // Slightly flexed elbow keeps the resting wrist anterior of the torso plane.
  const auto names = spec.dof_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == "elbow_flexion") p.q[i] = 0.6;
  return p;
}

// Torso-local wrist position for a candidate pose.
Vec3 local_wrist(const SkeletonSpec& spec, const Pose& pose, const BodyParams& body) {
  const auto kps = forward(spec, pose, body);
  auto kp = [&](const char* n) { return kps[spec.keypoint_index(n)]; };
  const TorsoFrame frame = build_frame({kp("clavicle"), kp("backneck"), kp("upper_back")});
  const Vec3 wrist = wrist_end_effector(kp("r_wrist_radial"), kp("r_wrist_ulnar"));
  return to_local(frame, wrist);
}

// Catmull-Rom interpolation through knot poses at knot times.
Pose spline_eval(const std::vector<double>& knot_t, const std::vector<Pose>& knots, double t) {
  const std::size_t n = knot_t.size();
  if (t <= knot_t.front()) return knots.front();
  if (t >= knot_t.back()) return knots.back();
  std::size_t i1 = 0;
  while (i1 + 1 < n && knot_t[i1 + 1] < t) ++i1;
  const std::size_t i0 = i1 == 0 ? 0 : i1 - 1;
  const std::size_t i2 = i1 + 1;
  const std::size_t i3 = std::min(i2 + 1, n - 1);
  const double h = knot_t[i2] - knot_t[i1];
  const double u = (t - knot_t[i1]) / h;

  Pose out;
  out.q.resize(knots[0].q.size());
  for (std::size_t d = 0; d < out.q.size(); ++d) {
    const double p0 = knots[i0].q[d], p1 = knots[i1].q[d];
    const double p2 = knots[i2].q[d], p3 = knots[i3].q[d];
    const double m1 = i1 == 0 ? (p2 - p1) : 0.5 * (p2 - p0);
    const double m2 = i2 == n - 1 ? (p2 - p1) : 0.5 * (p3 - p1);
    const double u2 = u * u, u3 = u2 * u;
    out.q[d] = (2 * u3 - 3 * u2 + 1) * p1 + (u3 - 2 * u2 + u) * m1 +
               (-2 * u3 + 3 * u2) * p2 + (u3 - u2) * m2;
  }
  return out;
}

void clamp_to_limits(const SkeletonSpec& spec, Pose& pose) {
  std::size_t qi = 0;
  for (const auto& seg : spec.segments)
    for (const auto& a : seg.axes) {
      if (a.bounded) pose.q[qi] = std::clamp(pose.q[qi], a.lo, a.hi);
      ++qi;
    }
}

}  // namespace

SyntheticTrial generate_trial(const SkeletonSpec& spec,
                              const std::vector<CameraModel>& cameras,
                              const TrialScript& script) {
  script.validate();
  spec.validate();
  const BodyParams body = BodyParams::identity(spec);
  const ArmDofs arm = bounded_dofs(spec);
  const Pose neutral = neutral_pose(spec);

  // Waypoint poses: rejection-sample each directive's reaches inside the
  // joint limits; the directive window ends back at the neutral pose.
  std::mt19937_64 pose_rng(substream(script.seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> knot_t{0.0};
  std::vector<Pose> knots{neutral};
  double t_cursor = 0.0;
  const auto dof_refs = spec.dofs();
  for (std::size_t di = 0; di < script.directives.size(); ++di) {
    const auto& dir = script.directives[di];
    for (int m = 0; m < dir.density; ++m) {
      Pose candidate = neutral;
      bool found = false;
      for (int attempt = 0; attempt < 20000 && !found; ++attempt) {
        for (std::size_t qi : arm.indices) {
          const auto& axis = spec.segments[dof_refs[qi].segment].axes[dof_refs[qi].axis];
          candidate.q[qi] = axis.lo + unit(pose_rng) * (axis.hi - axis.lo);
        }
        const Vec3 lw = local_wrist(spec, candidate, body);
        // Keep waypoints at least 5 cm from every octant boundary plane so a
        // scripted reach is an unambiguous exemplar of its octant.
        found = classify_octant(lw) == dir.octant && lw.norm() >= 0.30 &&
                std::min({std::abs(lw.x), std::abs(lw.y), std::abs(lw.z)}) >= 0.05;
      }
      if (!found)
        throw ValidationError("directive " + std::to_string(di) + ": octant '" +
                              dir.octant.name() + "' unreachable under joint limits");
      knot_t.push_back(t_cursor + dir.duration_s * (m + 1.0) / (dir.density + 1.0));
      knots.push_back(candidate);
    }
    t_cursor += dir.duration_s;
    knot_t.push_back(t_cursor);
    knots.push_back(neutral);
  }

  SyntheticTrial trial;
  const double dt = 1.0 / script.frame_rate;
  const std::size_t n_frames = static_cast<std::size_t>(std::floor(t_cursor / dt)) + 1;
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double t = static_cast<double>(f) * dt;
    trial.timestamps.push_back(t);
    Pose pose = spline_eval(knot_t, knots, t);
    clamp_to_limits(spec, pose);
    trial.poses.push_back(std::move(pose));
  }

  // Clean keypoints and projections.
  trial.clean.frame_rate = script.frame_rate;
  trial.clean.timestamps = trial.timestamps;
  for (const auto& kp : spec.keypoints) trial.clean.names.push_back(kp.name);
  trial.clean_2d.resize(cameras.size());
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    trial.clean_2d[c].frame_rate = script.frame_rate;
    trial.clean_2d[c].timestamps = trial.timestamps;
    trial.clean_2d[c].names = trial.clean.names;
  }
  for (const auto& pose : trial.poses) {
    const auto kps = forward(spec, pose, body);
    for (const auto& p : kps) trial.clean.samples.push_back(Sample3{p, 1.0, true});
    for (std::size_t c = 0; c < cameras.size(); ++c)
      for (const auto& p : kps) {
        Sample2 s;
        if (const auto px = project(cameras[c], p)) {
          s.u = px->u;
          s.v = px->v;
          s.confidence = 1.0;
          s.present = true;
        }
        trial.clean_2d[c].samples.push_back(s);
      }
  }

  // Isotropic 3D noise + dropout.
  trial.noisy = trial.clean;
  {
    std::mt19937_64 rng(substream(script.seed, 2));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (auto& s : trial.noisy.samples) {
      if (!s.present) continue;
      if (script.noise.sigma_3d_m > 0.0)
        s.p += Vec3{gauss(rng), gauss(rng), gauss(rng)} * script.noise.sigma_3d_m;
      if (script.noise.dropout > 0.0 && u01(rng) < script.noise.dropout) {
        s = Sample3{};  // occluded: removed, confidence 0
      }
    }
  }

  // Per-camera depth noise on top of the isotropic stream.
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    double sigma = 0.0;
    if (auto it = script.noise.depth_sigma_m.find(cameras[c].name);
        it != script.noise.depth_sigma_m.end())
      sigma = it->second;
    trial.noisy_depth.push_back(
        inject_depth_noise(trial.noisy, cameras[c], sigma, substream(script.seed, 100 + c)));
  }

  // Pixel noise + dropout.
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    PixelTrajectory noisy2d = trial.clean_2d[c];
    std::mt19937_64 rng(substream(script.seed, 200 + c));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (auto& s : noisy2d.samples) {
      if (!s.present) continue;
      if (script.noise.sigma_px > 0.0) {
        s.u += gauss(rng) * script.noise.sigma_px;
        s.v += gauss(rng) * script.noise.sigma_px;
      }
      if (script.noise.dropout > 0.0 && u01(rng) < script.noise.dropout) s = Sample2{};
    }
    trial.noisy_2d.push_back(std::move(noisy2d));
  }

  return trial;
}

KeypointTrajectory inject_depth_noise(const KeypointTrajectory& traj, const CameraModel& cam,
                                      double sigma_m, std::uint64_t seed) {
  if (sigma_m < 0.0) throw ValidationError("depth noise sigma must be >= 0");
  KeypointTrajectory out = traj;
  if (sigma_m == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma_m);
  for (auto& s : out.samples) {
    if (!s.present) continue;
    s.p += cam.ray_direction(s.p) * gauss(rng);
  }
  return out;
}

WorkspaceReport brute_force_score(const LocalWristTrajectory& wrist_local,
                                  const TargetSphere& sphere, double capture_radius) {
  const double r2 = capture_radius * capture_radius;
  std::array<std::size_t, kOctantCount> avail{}, hit{};
  for (std::size_t t = 0; t < sphere.targets.size(); ++t) {
    const Vec3 tp = sphere.targets[t];
    // Independent sign test, positive on zero.
    const int idx = (tp.x >= 0.0 ? 4 : 0) | (tp.y >= 0.0 ? 2 : 0) | (tp.z >= 0.0 ? 1 : 0);
    ++avail[idx];
    bool reached = false;
    for (const auto& wp : wrist_local.local) {
      if (!wp) continue;
      const double dx = wp->x - tp.x;
      const double dy = wp->y - tp.y;
      const double dz = wp->z - tp.z;
      if (dx * dx + dy * dy + dz * dz <= r2) {
        reached = true;
        break;
      }
    }
    if (reached) ++hit[idx];
  }

  WorkspaceReport report;
  report.peak_reach = sphere.radius;
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
