#include <doctest.h>

#include <cmath>
#include <random>

#include "uerw/errors.hpp"
#include "uerw/fitter.hpp"

using namespace uerw;

namespace {

// Smooth scripted poses strictly inside the joint limits.
Pose scripted_pose(const SkeletonSpec& spec, double t) {
  Pose pose;
  int i = 0;
  for (const auto& ref : spec.dofs()) {
    const JointAxis& ax = spec.segments[ref.segment].axes[ref.axis];
    if (ax.bounded) {
      const double u = 0.5 + 0.3 * std::sin(1.7 * t + 0.9 * i);
      pose.q.push_back(ax.lo + u * (ax.hi - ax.lo));
    } else {
      pose.q.push_back(0.05 * std::sin(0.8 * t + i));
    }
    ++i;
  }
  return pose;
}

KeypointTrajectory scripted_observations(const SkeletonSpec& spec, std::size_t frames) {
  const BodyParams body = BodyParams::identity(spec);
  KeypointTrajectory t;
  t.frame_rate = 30.0;
  for (const auto& kp : spec.keypoints) t.names.push_back(kp.name);
  for (std::size_t f = 0; f < frames; ++f) {
    const double time = static_cast<double>(f) / 30.0;
    t.timestamps.push_back(time);
    for (const auto& p : forward(spec, scripted_pose(spec, time), body))
      t.samples.push_back(Sample3{p, 1.0, true});
  }
  return t;
}

PixelTrajectory project_observations(const KeypointTrajectory& obs, const CameraModel& cam) {
  PixelTrajectory t;
  t.frame_rate = obs.frame_rate;
  t.timestamps = obs.timestamps;
  t.names = obs.names;
  for (std::size_t f = 0; f < obs.frame_count(); ++f)
    for (std::size_t k = 0; k < obs.keypoint_count(); ++k) {
      Sample2 s;
      const auto& o = obs.at(f, k);
      if (o.present) {
        if (const auto px = project(cam, o.p)) {
          s.u = px->u;
          s.v = px->v;
          s.confidence = o.confidence;
          s.present = true;
        }
      }
      t.samples.push_back(s);
    }
  return t;
}

FitConfig tiny_config() {
  FitConfig c;
  c.width = 16;
  c.hidden_layers = 1;
  c.samples_per_trial = 20;
  c.iterations = 5;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("Huber penalty closed-form values") {
  // The decimal inputs are not exactly representable; match to within 1 ulp.
  CHECK(huber(0.05, 0.1) == doctest::Approx(0.00125).epsilon(1e-15));
  CHECK(huber(0.2, 0.1) == doctest::Approx(0.015).epsilon(1e-15));
  CHECK(huber(3.0, 5.0) == 4.5);
  CHECK(huber(10.0, 5.0) == 37.5);
  CHECK(huber(0.0, 0.1) == 0.0);
  CHECK(huber(0.1, 0.1) == doctest::Approx(0.005).epsilon(1e-15));  // boundary, quadratic side
}

TEST_CASE("3D loss averages over all keypoints and skips missing samples") {
  std::vector<Vec3> model{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  std::vector<Sample3> obs(4);
  obs[0] = {{0.05, 0, 0}, 1.0, true};   // residual 0.05 -> 0.00125
  obs[1] = {{1.2, 0, 0}, 0.5, true};    // residual 0.2 -> 0.5 * 0.015
  obs[2] = {{9, 9, 9}, 1.0, false};     // missing: no contribution
  obs[3] = {{3, 0, 0}, 0.0, true};      // zero confidence: no contribution
  const double expect = (0.00125 + 0.5 * 0.015) / 4.0;
  CHECK(loss_3d(model, obs, 0.1) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("2D loss treats behind-camera points as confidence zero") {
  CameraModel cam;  // identity pose, camera at the origin
  std::vector<Vec3> model{{0, 0, 2}, {0, 0, -2}};
  std::vector<Sample2> obs(2);
  obs[0] = {cam.cx + 3.0, cam.cy, 1.0, true};  // 3 px residual -> 4.5
  obs[1] = {cam.cx, cam.cy, 1.0, true};        // behind the camera
  CHECK(loss_2d(model, cam, obs, 5.0) == doctest::Approx(4.5 / 2.0).epsilon(1e-15));
}

TEST_CASE("total loss is the weighted sum of the 3D and 2D terms") {
  const SkeletonSpec spec = default_skeleton();
  const CameraModel cam = study_pose(StudyPoseKind::Frontal, {0, 0, 0.4}, 3.0, 20.0);

  FitConfig config = tiny_config();
  config.lambda1 = 0.7;
  config.lambda2 = 0.031;

  TrialObservations trial;
  trial.obs3d = scripted_observations(spec, 25);
  trial.obs2d = {project_observations(trial.obs3d, cam)};

  FitProblem prob(spec, {cam}, {trial}, config);
  std::mt19937_64 rng(5);
  std::vector<double> params(prob.param_count());
  prob.init_params(params, rng);
  const auto samples = prob.draw_samples(rng);
  const double total = prob.loss(params, samples);

  // Independent recomputation through the public per-term losses.
  const BodyParams body = prob.body_from_params(params);
  double expect = 0.0;
  for (std::size_t f : samples[0]) {
    const double t = trial.obs3d.timestamps[f];
    const auto kps = forward(spec, prob.eval_pose(params, 0, t), body);
    std::vector<Sample3> obs3;
    std::vector<Sample2> obs2;
    for (std::size_t k = 0; k < spec.keypoints.size(); ++k) {
      obs3.push_back(trial.obs3d.at(f, trial.obs3d.index_of(spec.keypoints[k].name)));
      obs2.push_back(trial.obs2d[0].at(f, trial.obs2d[0].index_of(spec.keypoints[k].name)));
    }
    expect += config.lambda1 * loss_3d(kps, obs3, config.huber_3d_m) +
              config.lambda2 * loss_2d(kps, cam, obs2, config.huber_2d_px);
  }
  CHECK(total == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("analytic total-loss gradient matches central finite differences") {
  const SkeletonSpec spec = default_skeleton();
  const CameraModel cam = study_pose(StudyPoseKind::Frontal, {0, 0, 0.4}, 3.0, 20.0);

  TrialObservations trial;
  trial.obs3d = scripted_observations(spec, 20);
  trial.obs2d = {project_observations(trial.obs3d, cam)};
  // Mix in some dropout so the missing-sample paths are exercised.
  for (std::size_t i = 0; i < trial.obs3d.samples.size(); i += 13)
    trial.obs3d.samples[i].present = false;

  FitConfig config = tiny_config();
  config.samples_per_trial = 12;
  FitProblem prob(spec, {cam}, {trial}, config);

  std::mt19937_64 rng(6);
  std::vector<double> params(prob.param_count());
  prob.init_params(params, rng);
  // Perturb away from the symmetric init so offset/scale gradients are generic.
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (auto& p : params) p += jitter(rng);

  const auto samples = prob.draw_samples(rng);
  std::vector<double> grad(prob.param_count());
  prob.loss_and_grad(params, samples, grad);

  const double h = 1e-5;
  std::uniform_int_distribution<std::size_t> pick(0, prob.param_count() - 1);
  int checked = 0;
  for (int n = 0; n < 120; ++n) {
    const std::size_t i = n < 20 ? prob.param_count() - 1 - n : pick(rng);  // cover all betas
    std::vector<double> hi = params, lo = params;
    hi[i] += h;
    lo[i] -= h;
    const double fd = (prob.loss(hi, samples) - prob.loss(lo, samples)) / (2 * h);
    const double denom = std::max({1.0, std::abs(fd), std::abs(grad[i])});
    CHECK(std::abs(grad[i] - fd) / denom < 1e-4);
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("sample draws are valid, stratified frame indices") {
  const SkeletonSpec spec = default_skeleton();
  TrialObservations trial;
  trial.obs3d = scripted_observations(spec, 90);
  trial.obs2d = {};

  FitConfig config = tiny_config();
  config.samples_per_trial = 300;
  FitProblem prob(spec, {}, {trial}, config);
  std::mt19937_64 rng(8);
  const auto samples = prob.draw_samples(rng);
  REQUIRE(samples.size() == 1);
  REQUIRE(samples[0].size() == 300);
  for (std::size_t f : samples[0]) CHECK(f < 90);
  // Stratified draws are nondecreasing in expectation and span the trial.
  CHECK(samples[0].front() < 5);
  CHECK(samples[0].back() > 85);
}

TEST_CASE("decoded poses always respect the joint limits") {
  const SkeletonSpec spec = default_skeleton();
  TrialObservations trial;
  trial.obs3d = scripted_observations(spec, 10);
  FitProblem prob(spec, {}, {trial}, tiny_config());

  std::mt19937_64 rng(10);
  std::normal_distribution<double> big(0.0, 3.0);
  std::vector<double> params(prob.param_count());
  for (int rep = 0; rep < 20; ++rep) {
    for (auto& p : params) p = big(rng);
    const Pose pose = prob.eval_pose(params, 0, 0.1 * rep);
    std::size_t di = 0;
    for (const auto& ref : spec.dofs()) {
      const JointAxis& ax = spec.segments[ref.segment].axes[ref.axis];
      if (ax.bounded) {
        CHECK(pose.q[di] >= ax.lo);
        CHECK(pose.q[di] <= ax.hi);
      }
      ++di;
    }
  }
}

TEST_CASE("fitting is deterministic per seed") {
  const SkeletonSpec spec = default_skeleton();
  TrialObservations trial;
  trial.obs3d = scripted_observations(spec, 30);

  FitConfig config = tiny_config();
  config.iterations = 8;
  const FitResult a = fit(spec, {}, {trial}, config);
  const FitResult b = fit(spec, {}, {trial}, config);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.phi == b.phi);
  CHECK(a.reconstructed == b.reconstructed);

  config.seed = 10;
  const FitResult c = fit(spec, {}, {trial}, config);
  CHECK(a.loss_trace != c.loss_trace);
}

TEST_CASE("zero iterations with explicit parameters evaluates in place") {
  const SkeletonSpec spec = default_skeleton();
  TrialObservations trial;
  trial.obs3d = scripted_observations(spec, 12);

  FitConfig config = tiny_config();
  config.iterations = 0;
  FitProblem prob(spec, {}, {trial}, config);
  std::mt19937_64 rng(11);
  std::vector<double> params(prob.param_count());
  prob.init_params(params, rng);

  const FitResult r = fit(spec, {}, {trial}, config, &params);
  REQUIRE(r.loss_trace.size() == 1);
  CHECK(r.body.scales == std::vector<double>(spec.scale_groups.size(), 1.0));
  REQUIRE(r.reconstructed.size() == 1);
  CHECK(r.reconstructed[0].frame_count() == 12);

  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(fit(spec, {}, {trial}, config, &wrong), ValidationError);
}

TEST_CASE("config validation rejects malformed settings") {
  FitConfig bad;
  bad.iterations = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  FitConfig bad2;
  bad2.scale_lo = 2.0;
  bad2.scale_hi = 0.5;
  CHECK_THROWS_AS(bad2.validate(), ValidationError);
  FitConfig bad3;
  bad3.huber_3d_m = 0.0;
  CHECK_THROWS_AS(bad3.validate(), ValidationError);
}
