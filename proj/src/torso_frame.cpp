#include "uerw/torso_frame.hpp"

#include <fstream>

#include <json.hpp>

#include "uerw/errors.hpp"

namespace uerw {

LandmarkMap load_landmark_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  LandmarkMap m;
  if (j.contains("sternal_notch")) m.sternal_notch = j["sternal_notch"].get<std::string>();
  if (j.contains("t1")) m.t1 = j["t1"].get<std::string>();
  if (j.contains("t8")) m.t8 = j["t8"].get<std::string>();
  if (j.contains("wrist_radial")) m.wrist_radial = j["wrist_radial"].get<std::string>();
  if (j.contains("wrist_ulnar")) m.wrist_ulnar = j["wrist_ulnar"].get<std::string>();
  return m;
}

TorsoFrame build_frame(const FrameLandmarks& lm) {
  const Vec3 v_raw = lm.t1 - lm.t8;          // inferior -> superior
  const Vec3 ap_temp = lm.sternal_notch - lm.t8;
  const Vec3 ml_raw = cross(ap_temp, v_raw);
  if (ml_raw.norm() < 1e-9)
    throw ValidationError("degenerate torso landmarks: sternal notch, T1, T8 are collinear");

  TorsoFrame f;
  f.origin = (lm.sternal_notch + lm.t1) * 0.5;
  f.v_axis = normalized(v_raw);
  f.ml_axis = normalized(ml_raw);
  f.ap_axis = cross(f.v_axis, f.ml_axis);
  return f;
}

Vec3 to_local(const TorsoFrame& f, const Vec3& p) {
  const Vec3 d = p - f.origin;
  return {dot(f.ml_axis, d), dot(f.ap_axis, d), dot(f.v_axis, d)};
}

LocalWristTrajectory local_wrist_trajectory(const KeypointTrajectory& traj,
                                            const LandmarkMap& map) {
  const int i_sn = traj.index_of(map.sternal_notch);
  const int i_t1 = traj.index_of(map.t1);
  const int i_t8 = traj.index_of(map.t8);
  const int i_wr = traj.index_of(map.wrist_radial);
  const int i_wu = traj.index_of(map.wrist_ulnar);
  auto require = [&](int idx, const std::string& name) {
    if (idx < 0) throw ValidationError("trajectory is missing landmark keypoint '" + name + "'");
  };
  require(i_sn, map.sternal_notch);
  require(i_t1, map.t1);
  require(i_t8, map.t8);
  require(i_wr, map.wrist_radial);
  require(i_wu, map.wrist_ulnar);

  LocalWristTrajectory out;
  out.timestamps = traj.timestamps;
  out.local.resize(traj.frame_count());
  for (std::size_t f = 0; f < traj.frame_count(); ++f) {
    const auto& sn = traj.at(f, i_sn);
    const auto& t1 = traj.at(f, i_t1);
    const auto& t8 = traj.at(f, i_t8);
    const auto& wr = traj.at(f, i_wr);
    const auto& wu = traj.at(f, i_wu);
    if (!sn.present || !t1.present || !t8.present || !wr.present || !wu.present) continue;
    TorsoFrame frame = build_frame({sn.p, t1.p, t8.p});
    out.local[f] = to_local(frame, wrist_end_effector(wr.p, wu.p));
  }
  return out;
}

}  // namespace uerw
