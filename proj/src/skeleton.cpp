#include "uerw/skeleton.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "uerw/errors.hpp"

namespace uerw {

std::size_t SkeletonSpec::dof_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.axes.size();
  return n;
}

std::size_t SkeletonSpec::rotational_dof_count() const {
  std::size_t n = 0;
  for (const auto& s : segments)
    for (const auto& a : s.axes)
      if (a.kind == AxisKind::Rotation) ++n;
  return n;
}

std::vector<SkeletonSpec::DofRef> SkeletonSpec::dofs() const {
  std::vector<DofRef> out;
  out.reserve(dof_count());
  for (int si = 0; si < static_cast<int>(segments.size()); ++si)
    for (int ai = 0; ai < static_cast<int>(segments[si].axes.size()); ++ai)
      out.push_back({si, ai});
  return out;
}

std::vector<std::string> SkeletonSpec::dof_names() const {
  std::vector<std::string> out;
  for (const auto& s : segments)
    for (const auto& a : s.axes) out.push_back(a.name);
  return out;
}

int SkeletonSpec::segment_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(segments.size()); ++i)
    if (segments[i].name == name) return i;
  return -1;
}

int SkeletonSpec::keypoint_index(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(keypoints.size()); ++i)
    if (keypoints[i].name == name) return i;
  return -1;
}

void SkeletonSpec::validate() const {
  if (segments.empty()) throw ValidationError("skeleton has no segments");
  if (scale_groups.empty()) throw ValidationError("skeleton has no scale groups");
  std::unordered_set<std::string> seg_names;
  for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
    const auto& s = segments[i];
    if (!seg_names.insert(s.name).second)
      throw ValidationError("duplicate segment name '" + s.name + "'");
    if (i == 0) {
      if (s.parent != -1) throw ValidationError("first segment must be the root (parent null)");
    } else if (s.parent < 0 || s.parent >= i) {
      // parent >= i covers both cycles and forward references
      throw ValidationError("segment '" + s.name + "': parent must precede it (cycle or missing parent)");
    }
    if (s.scale_group < 0 || s.scale_group >= static_cast<int>(scale_groups.size()))
      throw ValidationError("segment '" + s.name + "': scale group out of range");
    for (const auto& a : s.axes) {
      if (std::abs(a.axis.norm() - 1.0) > 1e-9)
        throw ValidationError("axis '" + a.name + "': direction is not unit-norm");
      if (a.bounded && !(a.lo < a.hi))
        throw ValidationError("axis '" + a.name + "': limits must satisfy lo < hi");
    }
  }
  for (const auto& k : keypoints)
    if (k.segment < 0 || k.segment >= static_cast<int>(segments.size()))
      throw ValidationError("keypoint '" + k.name + "': segment out of range");
}

BodyParams BodyParams::identity(const SkeletonSpec& spec) {
  BodyParams b;
  b.scales.assign(spec.scale_groups.size(), 1.0);
  b.offsets.assign(spec.keypoints.size(), Vec3{});
  return b;
}

void BodyParams::validate(const SkeletonSpec& spec, double scale_lo, double scale_hi) const {
  if (scales.size() != spec.scale_groups.size())
    throw ValidationError("body params scale count mismatch");
  if (offsets.size() != spec.keypoints.size())
    throw ValidationError("body params offset count mismatch");
  for (std::size_t i = 0; i < scales.size(); ++i)
    if (!(scales[i] >= scale_lo && scales[i] <= scale_hi))
      throw ValidationError("scale '" + spec.scale_groups[i] + "' outside [" +
                            std::to_string(scale_lo) + ", " + std::to_string(scale_hi) + "]");
}

namespace {

ForwardTrace traverse(const SkeletonSpec& spec, const Pose& pose, const BodyParams& body,
                      bool check_limits) {
  if (pose.q.size() != spec.dof_count())
    throw ValidationError("pose has " + std::to_string(pose.q.size()) + " DoF, skeleton needs " +
                          std::to_string(spec.dof_count()));
  ForwardTrace tr;
  tr.segment_world.resize(spec.segments.size());
  tr.dof_world_axis.reserve(spec.dof_count());
  tr.dof_world_origin.reserve(spec.dof_count());

  std::size_t qi = 0;
  for (std::size_t si = 0; si < spec.segments.size(); ++si) {
    const Segment& seg = spec.segments[si];
    Transform t = seg.parent >= 0 ? tr.segment_world[seg.parent] : Transform{};
    t.trans = t.apply(seg.rest_offset * body.scales[seg.scale_group]);
    for (const auto& a : seg.axes) {
      const double q = pose.q[qi++];
      if (check_limits && a.bounded && (q < a.lo - 1e-12 || q > a.hi + 1e-12))
        throw ValidationError("DoF '" + a.name + "' value " + std::to_string(q) +
                              " violates limits [" + std::to_string(a.lo) + ", " +
                              std::to_string(a.hi) + "]");
      const Vec3 world_axis = t.rot * a.axis;
      tr.dof_world_axis.push_back(world_axis);
      tr.dof_world_origin.push_back(t.trans);
      if (a.kind == AxisKind::Rotation) {
        t.rot = t.rot * Mat3::axis_angle(a.axis, q);
      } else {
        t.trans += world_axis * q;
      }
    }
    tr.segment_world[si] = t;
  }

  tr.keypoints.reserve(spec.keypoints.size());
  for (std::size_t ki = 0; ki < spec.keypoints.size(); ++ki) {
    const auto& kp = spec.keypoints[ki];
    const double s = body.scales[spec.segments[kp.segment].scale_group];
    tr.keypoints.push_back(
        tr.segment_world[kp.segment].apply(kp.rest_local * s + body.offsets[ki]));
  }
  return tr;
}

}  // namespace

std::vector<Vec3> forward(const SkeletonSpec& spec, const Pose& pose, const BodyParams& body,
                          bool check_limits) {
  return traverse(spec, pose, body, check_limits).keypoints;
}

ForwardTrace forward_traced(const SkeletonSpec& spec, const Pose& pose, const BodyParams& body) {
  return traverse(spec, pose, body, false);
}

void backprop_keypoints(const SkeletonSpec& spec, const BodyParams& body,
                        const ForwardTrace& trace, std::span<const Vec3> dl_dkeypoint,
                        std::span<double> dq, std::span<double> dscales,
                        std::span<Vec3> doffsets) {
  // Per-segment DoF start index in the flat q vector.
  std::vector<std::size_t> dof_start(spec.segments.size());
  {
    std::size_t qi = 0;
    for (std::size_t si = 0; si < spec.segments.size(); ++si) {
      dof_start[si] = qi;
      qi += spec.segments[si].axes.size();
    }
  }

  for (std::size_t ki = 0; ki < spec.keypoints.size(); ++ki) {
    const Vec3 g = dl_dkeypoint[ki];
    if (g == Vec3{}) continue;
    const auto& kp = spec.keypoints[ki];
    const Vec3 x = trace.keypoints[ki];

    // Offset gradient: x = R_seg * (s * local + offset) + t.
    const Mat3& r_seg = trace.segment_world[kp.segment].rot;
    doffsets[ki] += r_seg.transposed() * g;

    // Keypoint rest-local scale term.
    const int own_group = spec.segments[kp.segment].scale_group;
    dscales[own_group] += dot(g, r_seg * kp.rest_local);

    // Walk the chain from the owning segment to the root.
    for (int si = kp.segment; si >= 0; si = spec.segments[si].parent) {
      const Segment& seg = spec.segments[si];
      for (std::size_t ai = 0; ai < seg.axes.size(); ++ai) {
        const std::size_t di = dof_start[si] + ai;
        const auto& axis = seg.axes[ai];
        if (axis.kind == AxisKind::Rotation)
          dq[di] += dot(g, cross(trace.dof_world_axis[di], x - trace.dof_world_origin[di]));
        else
          dq[di] += dot(g, trace.dof_world_axis[di]);
      }
      // Segment rest-offset scale term, expressed in the parent's world frame.
      const Mat3 parent_rot =
          seg.parent >= 0 ? trace.segment_world[seg.parent].rot : Mat3::identity();
      dscales[seg.scale_group] += dot(g, parent_rot * seg.rest_offset);
    }
  }
  (void)body;
}

// ---------------------------------------------------------------------------
// Spec file I/O

namespace {

Vec3 parse_vec3(const nlohmann::json& a) {
  return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
}

nlohmann::json dump_vec3(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

}  // namespace

SkeletonSpec load_skeleton(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }

  SkeletonSpec spec;
  try {
    for (const auto& g : j.at("scale_groups")) spec.scale_groups.push_back(g.get<std::string>());
    for (const auto& s : j.at("segments")) {
      Segment seg;
      seg.name = s.at("name").get<std::string>();
      if (s.contains("parent") && !s["parent"].is_null()) {
        const std::string pname = s["parent"].get<std::string>();
        seg.parent = spec.segment_index(pname);
        if (seg.parent < 0 && spec.segment_index(seg.name) < 0) {
          // Self-parenting or unknown parent both land here.
          if (pname == seg.name)
            throw ValidationError(path + ": segment '" + seg.name + "' parents itself");
          throw ValidationError(path + ": segment '" + seg.name + "': unknown parent '" + pname + "'");
        }
        if (pname == seg.name)
          throw ValidationError(path + ": segment '" + seg.name + "' parents itself");
      }
      seg.rest_offset = parse_vec3(s.at("offset"));
      const std::string group = s.at("scale_group").get<std::string>();
      for (int gi = 0; gi < static_cast<int>(spec.scale_groups.size()); ++gi)
        if (spec.scale_groups[gi] == group) seg.scale_group = gi;
      if (spec.scale_groups[seg.scale_group] != group)
        throw ValidationError(path + ": unknown scale group '" + group + "'");
      if (s.contains("axes"))
        for (const auto& a : s["axes"]) {
          JointAxis ax;
          ax.name = a.at("name").get<std::string>();
          ax.kind = a.value("type", std::string("rotation")) == "translation"
                        ? AxisKind::Translation
                        : AxisKind::Rotation;
          ax.axis = parse_vec3(a.at("axis"));
          ax.bounded = a.value("bounded", a.contains("lo"));
          if (ax.bounded) {
            ax.lo = a.at("lo").get<double>();
            ax.hi = a.at("hi").get<double>();
          }
          seg.axes.push_back(ax);
        }
      spec.segments.push_back(seg);
    }
    for (const auto& k : j.at("keypoints")) {
      SkeletonKeypoint kp;
      kp.name = k.at("name").get<std::string>();
      kp.segment = spec.segment_index(k.at("segment").get<std::string>());
      if (kp.segment < 0)
        throw ValidationError(path + ": keypoint '" + kp.name + "': unknown segment");
      kp.rest_local = parse_vec3(k.at("local"));
      spec.keypoints.push_back(kp);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return spec;
}

void save_skeleton(const SkeletonSpec& spec, const std::string& path) {
  nlohmann::json j;
  j["scale_groups"] = spec.scale_groups;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : spec.segments) {
    nlohmann::json seg;
    seg["name"] = s.name;
    seg["parent"] = s.parent >= 0 ? nlohmann::json(spec.segments[s.parent].name)
                                  : nlohmann::json(nullptr);
    seg["offset"] = dump_vec3(s.rest_offset);
    seg["scale_group"] = spec.scale_groups[s.scale_group];
    seg["axes"] = nlohmann::json::array();
    for (const auto& a : s.axes) {
      nlohmann::json ax;
      ax["name"] = a.name;
      ax["type"] = a.kind == AxisKind::Translation ? "translation" : "rotation";
      ax["axis"] = dump_vec3(a.axis);
      ax["bounded"] = a.bounded;
      if (a.bounded) {
        ax["lo"] = a.lo;
        ax["hi"] = a.hi;
      }
      seg["axes"].push_back(ax);
    }
    j["segments"].push_back(seg);
  }
  j["keypoints"] = nlohmann::json::array();
  for (const auto& k : spec.keypoints) {
    nlohmann::json kp;
    kp["name"] = k.name;
    kp["segment"] = spec.segments[k.segment].name;
    kp["local"] = dump_vec3(k.rest_local);
    j["keypoints"].push_back(kp);
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

SkeletonSpec default_skeleton() {
  SkeletonSpec spec;
  spec.scale_groups = {"torso", "clavicle", "upper_arm", "forearm", "hand"};

  auto rot = [](std::string name, Vec3 axis, double lo, double hi) {
    return JointAxis{std::move(name), AxisKind::Rotation, axis, true, lo, hi};
  };
  auto free_axis = [](std::string name, AxisKind kind, Vec3 axis) {
    return JointAxis{std::move(name), kind, axis, false, 0, 0};
  };

  // World convention: +x subject right, +y anterior, +z up. Rest pose has
  // the right arm hanging at the side.
  Segment root;
  root.name = "root";
  root.parent = -1;
  root.scale_group = 0;
  root.axes = {
      free_axis("root_tx", AxisKind::Translation, {1, 0, 0}),
      free_axis("root_ty", AxisKind::Translation, {0, 1, 0}),
      free_axis("root_tz", AxisKind::Translation, {0, 0, 1}),
      free_axis("root_rx", AxisKind::Rotation, {1, 0, 0}),
      free_axis("root_ry", AxisKind::Rotation, {0, 1, 0}),
      free_axis("root_rz", AxisKind::Rotation, {0, 0, 1}),
  };

  Segment thorax;
  thorax.name = "thorax";
  thorax.parent = 0;
  thorax.rest_offset = {0, 0, 0.25};
  thorax.scale_group = 0;
  thorax.axes = {rot("thorax_bend", {1, 0, 0}, -0.4, 0.4)};

  Segment clavicle;
  clavicle.name = "clavicle_r";
  clavicle.parent = 1;
  clavicle.rest_offset = {0.02, 0.0, 0.20};
  clavicle.scale_group = 1;
  clavicle.axes = {rot("clav_protraction", {0, 0, 1}, -0.4, 0.4),
                   rot("clav_elevation", {0, 1, 0}, -0.35, 0.35)};

  Segment upper_arm;
  upper_arm.name = "upper_arm_r";
  upper_arm.parent = 2;
  upper_arm.rest_offset = {0.16, 0.0, -0.02};
  upper_arm.scale_group = 2;
  // Adduction stays clear of +-90 deg: at the gimbal the flexion and rotation
  // axes align and the decomposition becomes unobservable.
  upper_arm.axes = {rot("shoulder_flexion", {1, 0, 0}, -1.0, 2.9),
                    rot("shoulder_adduction", {0, 1, 0}, -1.2, 1.2),
                    rot("shoulder_rotation", {0, 0, 1}, -1.6, 1.6)};

  Segment forearm;
  forearm.name = "forearm_r";
  forearm.parent = 3;
  forearm.rest_offset = {0, 0, -0.28};
  forearm.scale_group = 3;
  forearm.axes = {rot("elbow_flexion", {1, 0, 0}, -0.05, 2.6),
                  rot("forearm_pronation", {0, 0, 1}, -1.6, 1.6)};

  Segment hand;
  hand.name = "hand_r";
  hand.parent = 4;
  hand.rest_offset = {0, 0, -0.25};
  hand.scale_group = 4;
  hand.axes = {rot("wrist_flexion", {1, 0, 0}, -1.2, 1.2),
               rot("wrist_deviation", {0, 1, 0}, -0.6, 0.6)};

  spec.segments = {root, thorax, clavicle, upper_arm, forearm, hand};

  auto kp = [&](std::string name, const char* seg, Vec3 local) {
    return SkeletonKeypoint{std::move(name), spec.segment_index(seg), local};
  };
  spec.keypoints = {
      kp("pelvis", "root", {0, 0, 0}),
      kp("clavicle", "thorax", {0.0, 0.06, 0.17}),
      kp("backneck", "thorax", {0.0, -0.05, 0.18}),
      kp("upper_back", "thorax", {0.0, -0.07, -0.05}),
      kp("head", "thorax", {0.0, 0.01, 0.30}),
      kp("l_shoulder", "thorax", {-0.18, 0.0, 0.15}),
      kp("r_shoulder", "upper_arm_r", {0, 0, 0}),
      kp("r_elbow_lat", "upper_arm_r", {0.035, 0.0, -0.28}),
      kp("r_elbow_med", "upper_arm_r", {-0.035, 0.0, -0.28}),
      // The styloids belong to the radius/ulna, so they sit on the distal
      // forearm and observe pronation directly; the hand marker's long lever
      // observes both wrist axes.
      kp("r_wrist_radial", "forearm_r", {0.03, 0.0, -0.25}),
      kp("r_wrist_ulnar", "forearm_r", {-0.03, 0.0, -0.25}),
      kp("r_hand", "hand_r", {0.0, 0.0, -0.09}),
  };

  spec.validate();
  return spec;
}

}  // namespace uerw
