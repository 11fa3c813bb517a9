#include "uerw/camera.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "uerw/errors.hpp"

namespace uerw {

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw ValidationError("camera focal lengths must be positive");
  const Mat3 rtr = rotation.transposed() * rotation;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) > 1e-10)
        throw ValidationError("camera rotation is not orthonormal");
  if (std::abs(rotation.det() - 1.0) > 1e-10)
    throw ValidationError("camera rotation determinant is not +1");
}

std::optional<Pixel> project(const CameraModel& cam, const Vec3& p_world) {
  const Vec3 pc = cam.to_camera(p_world);
  if (!(pc.z > 0.0)) return std::nullopt;
  return Pixel{cam.fx * pc.x / pc.z + cam.cx, cam.fy * pc.y / pc.z + cam.cy};
}

namespace {

// Look-at rotation: camera +z along the optical axis toward the target,
// +x to the image right, +y down (standard pinhole convention).
Mat3 look_at(const Vec3& cam_center, const Vec3& target) {
  const Vec3 z = normalized(target - cam_center);
  const Vec3 world_up{0, 0, 1};
  Vec3 x = cross(z, world_up);
  if (x.norm() < 1e-12) x = {1, 0, 0};  // looking straight up/down
  x = normalized(x);
  const Vec3 y = cross(z, x);
  return Mat3::from_rows(x, y, z);
}

}  // namespace

CameraModel study_pose(StudyPoseKind kind, const Vec3& subject_origin, double distance_m,
                       double elevation_deg) {
  if (!(distance_m > 0.0)) throw ValidationError("study pose distance must be positive");
  const double el = elevation_deg * std::numbers::pi / 180.0;
  // Anterior (+y) direction tilted up by the elevation angle.
  Vec3 dir{0.0, std::cos(el), std::sin(el)};
  if (kind == StudyPoseKind::Offset) {
    // 45 degrees azimuthally toward the subject's right (+x).
    const double az = 45.0 * std::numbers::pi / 180.0;
    dir = {std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};
  }
  CameraModel cam;
  cam.name = kind == StudyPoseKind::Frontal ? "frontal" : "offset";
  const Vec3 center = subject_origin + dir * distance_m;
  cam.rotation = look_at(center, subject_origin);
  cam.translation = -(cam.rotation * center);
  cam.validate();
  return cam;
}

std::vector<CameraModel> load_cameras(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (!j.is_array()) throw ValidationError(path + ": expected a JSON array of cameras");

  std::vector<CameraModel> cams;
  for (const auto& c : j) {
    CameraModel cam;
    if (c.contains("study_pose")) {
      const auto& sp = c["study_pose"];
      const std::string kind = sp.at("kind").get<std::string>();
      if (kind != "frontal" && kind != "offset")
        throw ValidationError(path + ": study_pose kind must be 'frontal' or 'offset'");
      Vec3 origin{0, 0, 0};
      if (sp.contains("subject_origin")) {
        auto& o = sp["subject_origin"];
        origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
      }
      cam = study_pose(kind == "frontal" ? StudyPoseKind::Frontal : StudyPoseKind::Offset,
                       origin, sp.value("distance", 3.0), sp.value("elevation_deg", 20.0));
    } else if (c.contains("pose")) {
      const auto& p = c["pose"];
      const auto& r = p.at("rotation");
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) cam.rotation(i, k) = r.at(i).at(k).get<double>();
      const auto& t = p.at("translation");
      cam.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    } else {
      throw ValidationError(path + ": camera needs either 'pose' or 'study_pose'");
    }
    if (c.contains("name")) cam.name = c["name"].get<std::string>();
    cam.fx = c.value("fx", cam.fx);
    cam.fy = c.value("fy", cam.fy);
    cam.cx = c.value("cx", cam.cx);
    cam.cy = c.value("cy", cam.cy);
    cam.width = c.value("width", cam.width);
    cam.height = c.value("height", cam.height);
    cam.validate();
    cams.push_back(cam);
  }
  return cams;
}

}  // namespace uerw
