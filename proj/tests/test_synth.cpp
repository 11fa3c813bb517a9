#include <doctest.h>

#include <cmath>
#include <set>

#include "uerw/errors.hpp"
#include "uerw/synth.hpp"
#include "uerw/torso_frame.hpp"

using namespace uerw;

namespace {

TrialScript two_reach_script(std::uint64_t seed) {
  TrialScript s;
  s.seed = seed;
  s.frame_rate = 60.0;
  s.directives = {{OctantLabel{true, true, true}, 1.5, 2},
                  {OctantLabel{true, false, false}, 1.5, 2}};
  return s;
}

std::vector<CameraModel> rig() {
  return {study_pose(StudyPoseKind::Frontal, {0, 0, 0.4}, 3.0, 20.0),
          study_pose(StudyPoseKind::Offset, {0, 0, 0.4}, 3.0, 20.0)};
}

}  // namespace

TEST_CASE("trial generation is deterministic per seed") {
  const SkeletonSpec spec = default_skeleton();
  const auto cams = rig();
  const SyntheticTrial a = generate_trial(spec, cams, two_reach_script(42));
  const SyntheticTrial b = generate_trial(spec, cams, two_reach_script(42));
  CHECK(a.clean == b.clean);
  CHECK(a.noisy == b.noisy);
  CHECK(a.clean_2d == b.clean_2d);
  CHECK(a.timestamps == b.timestamps);

  const SyntheticTrial c = generate_trial(spec, cams, two_reach_script(43));
  CHECK(a.clean != c.clean);
}

TEST_CASE("scripted octants are actually visited by the wrist") {
  const SkeletonSpec spec = default_skeleton();
  TrialScript script;
  script.seed = 5;
  script.directives = {{OctantLabel{true, true, true}, 1.5, 2},
                       {OctantLabel{true, true, false}, 1.5, 2},
                       {OctantLabel{true, false, true}, 1.5, 2}};
  const SyntheticTrial trial = generate_trial(spec, {}, script);
  const auto wrist = local_wrist_trajectory(trial.clean, LandmarkMap{});
  std::set<int> visited;
  for (const auto& p : wrist.local)
    if (p && p->norm() >= 0.25) visited.insert(classify_octant(*p).index());
  for (const auto& d : script.directives) CHECK(visited.count(d.octant.index()) == 1);

  // Frames, poses, and keypoint tracks share a common length and clock.
  CHECK(trial.poses.size() == trial.timestamps.size());
  CHECK(trial.clean.frame_count() == trial.timestamps.size());
  const double expected_span = 4.5;
  CHECK(trial.timestamps.back() == doctest::Approx(expected_span).epsilon(1e-9));
}

TEST_CASE("ground-truth poses always respect the joint limits") {
  const SkeletonSpec spec = default_skeleton();
  const SyntheticTrial trial = generate_trial(spec, {}, two_reach_script(17));
  const BodyParams body = BodyParams::identity(spec);
  for (const auto& pose : trial.poses) CHECK_NOTHROW(forward(spec, pose, body, true));
}

TEST_CASE("zero-noise script reproduces the clean channels exactly") {
  const SkeletonSpec spec = default_skeleton();
  const auto cams = rig();
  const SyntheticTrial trial = generate_trial(spec, cams, two_reach_script(3));
  CHECK(trial.noisy == trial.clean);
  CHECK(trial.noisy_2d == trial.clean_2d);
  REQUIRE(trial.noisy_depth.size() == 2);
  CHECK(trial.noisy_depth[0] == trial.clean);
  CHECK(trial.noisy_depth[1] == trial.clean);
}

TEST_CASE("noise channels perturb without changing shape or presence rates much") {
  const SkeletonSpec spec = default_skeleton();
  const auto cams = rig();
  TrialScript script = two_reach_script(11);
  script.noise.sigma_3d_m = 0.02;
  script.noise.sigma_px = 3.0;
  script.noise.dropout = 0.1;
  const SyntheticTrial trial = generate_trial(spec, cams, script);

  CHECK(trial.noisy != trial.clean);
  std::size_t present = 0, total = 0, displaced = 0;
  double sum_d2 = 0.0;
  for (std::size_t i = 0; i < trial.noisy.samples.size(); ++i) {
    ++total;
    if (!trial.noisy.samples[i].present) continue;
    ++present;
    const double d = (trial.noisy.samples[i].p - trial.clean.samples[i].p).norm();
    sum_d2 += d * d;
    if (d > 0) ++displaced;
  }
  const double drop_rate = 1.0 - static_cast<double>(present) / static_cast<double>(total);
  CHECK(drop_rate > 0.05);
  CHECK(drop_rate < 0.15);
  CHECK(displaced == present);
  // E[|d|^2] = 3 sigma^2 for isotropic Gaussian noise.
  const double rms = std::sqrt(sum_d2 / static_cast<double>(present));
  CHECK(rms == doctest::Approx(std::sqrt(3.0) * 0.02).epsilon(0.1));
}

TEST_CASE("depth noise displaces points along the camera ray only") {
  const SkeletonSpec spec = default_skeleton();
  const auto cams = rig();
  const SyntheticTrial base = generate_trial(spec, cams, two_reach_script(23));
  const double sigma = 0.05;
  const KeypointTrajectory noisy = inject_depth_noise(base.clean, cams[0], sigma, 99);

  double sum2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < noisy.samples.size(); ++i) {
    const Vec3 delta = noisy.samples[i].p - base.clean.samples[i].p;
    const Vec3 ray = cams[0].ray_direction(base.clean.samples[i].p);
    CHECK(cross(delta, ray).norm() < 1e-9);  // parallel to the viewing ray
    sum2 += delta.norm2();
    ++n;
  }
  CHECK(std::sqrt(sum2 / static_cast<double>(n)) == doctest::Approx(sigma).epsilon(0.1));

  // Projection through the same camera is unchanged by along-ray motion.
  for (std::size_t i = 0; i < noisy.samples.size(); i += 37) {
    const auto a = project(cams[0], base.clean.samples[i].p);
    const auto b = project(cams[0], noisy.samples[i].p);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->u == doctest::Approx(b->u).epsilon(1e-6));
    CHECK(a->v == doctest::Approx(b->v).epsilon(1e-6));
  }
}

TEST_CASE("script validation and file loading") {
  TrialScript empty;
  CHECK_THROWS_AS(empty.validate(), ValidationError);

  TrialScript bad = two_reach_script(1);
  bad.frame_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  TrialScript bad_noise = two_reach_script(1);
  bad_noise.noise.dropout = 1.5;
  CHECK_THROWS_AS(bad_noise.validate(), ValidationError);

  const TrialScript loaded =
      load_trial_script(std::string(UERW_DATA_DIR) + "/trial_full_sweep.json");
  CHECK(loaded.seed == 7);
  CHECK(loaded.directives.size() == 6);
  CHECK(loaded.directives[0].octant == OctantLabel{true, true, true});
  CHECK(loaded.noise.depth_sigma_m.at("frontal") == 0.03);
}
