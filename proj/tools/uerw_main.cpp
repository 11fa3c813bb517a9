// uerw: reachable-workspace scoring, agreement statistics, and implicit
// trajectory fitting for 3D keypoint streams.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uerw/agreement.hpp"
#include "uerw/errors.hpp"
#include "uerw/fitter.hpp"
#include "uerw/manifest.hpp"
#include "uerw/report_svg.hpp"
#include "uerw/simd/kernels.hpp"
#include "uerw/skeleton.hpp"
#include "uerw/synth.hpp"
#include "uerw/torso_frame.hpp"
#include "uerw/trajectory.hpp"
#include "uerw/workspace.hpp"

namespace fs = std::filesystem;
using namespace uerw;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

TrajectoryFormat format_for(const std::string& path) {
  return path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl" ? TrajectoryFormat::Jsonl
                                                                      : TrajectoryFormat::Csv;
}

struct ScoreOptions {
  std::size_t targets = 800;
  double capture_radius = 0.05;
  double radius_override = 0.0;  // 0: use trial peak reach
  std::uint64_t seed = 0;
};

struct ScoredTrajectory {
  LocalWristTrajectory wrist;
  WorkspaceReport report;
  TargetSphere sphere;
};

ScoredTrajectory score_trajectory(const KeypointTrajectory& traj, const LandmarkMap& map,
                                  const ScoreOptions& opt) {
  ScoredTrajectory out;
  out.wrist = local_wrist_trajectory(traj, map);
  const double peak = peak_reach(out.wrist);
  const double radius = opt.radius_override > 0.0 ? opt.radius_override : peak;
  out.sphere = generate_targets(radius, opt.targets, opt.seed);
  const auto flags = simulate_capture(out.wrist, out.sphere, opt.capture_radius);
  out.report = percent_reached(flags, out.sphere, peak);
  return out;
}

void write_workspace_csv(const std::string& path,
                         const std::vector<std::pair<std::string, const WorkspaceReport*>>& systems) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "octant,system,available,reached,percent\n";
  for (const auto& [name, report] : systems)
    for (const auto& s : report->octants)
      out << s.octant.name() << ',' << name << ',' << s.available << ',' << s.reached << ','
          << (s.percent ? num(*s.percent) : std::string("NA")) << '\n';
}

void write_workspace_svg(const std::string& path,
                         const std::vector<std::pair<std::string, const WorkspaceReport*>>& systems) {
  std::vector<std::string> cats;
  for (const auto& o : analyzed_octants()) cats.push_back(o.name());
  static const char* colors[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52"};
  std::vector<BarSeries> series;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    BarSeries s;
    s.label = systems[i].first;
    s.color = colors[i % 4];
    for (const auto& o : systems[i].second->octants) s.values.push_back(o.percent);
    series.push_back(std::move(s));
  }
  write_bar_chart_svg(path, "Percent workspace reached per octant", cats, series, "% reached");
}

std::vector<CameraModel> default_cameras() {
  const Vec3 origin{0, 0, 0.4};
  auto frontal = study_pose(StudyPoseKind::Frontal, origin, 3.0, 20.0);
  auto offset = study_pose(StudyPoseKind::Offset, origin, 3.0, 20.0);
  return {frontal, offset};
}

SkeletonSpec skeleton_from(const std::string& path) {
  return path.empty() ? default_skeleton() : load_skeleton(path);
}

int cmd_score(const std::string& traj_path, const std::string& landmarks_path,
              const std::string& out_dir, const std::string& system_name,
              const ScoreOptions& opt) {
  fs::create_directories(out_dir);
  const auto traj = load_trajectory(traj_path, format_for(traj_path));
  const LandmarkMap map =
      landmarks_path.empty() ? LandmarkMap{} : load_landmark_map(landmarks_path);
  const auto scored = score_trajectory(traj, map, opt);

  const std::string csv = out_dir + "/report.csv";
  const std::string svg = out_dir + "/report.svg";
  const std::string summary = out_dir + "/summary.json";
  write_workspace_csv(csv, {{system_name, &scored.report}});
  write_workspace_svg(svg, {{system_name, &scored.report}});
  {
    nlohmann::json j;
    j["system"] = system_name;
    j["peak_reach_m"] = scored.report.peak_reach;
    j["target_count"] = opt.targets;
    j["capture_radius_m"] = opt.capture_radius;
    j["sphere_radius_m"] = scored.sphere.radius;
    std::ofstream out(summary);
    out << j.dump(2) << '\n';
  }

  RunManifest m;
  m.command = "score";
  m.inputs = {traj_path};
  if (!landmarks_path.empty()) m.inputs.push_back(landmarks_path);
  m.outputs = {csv, svg, summary};
  m.seed = opt.seed;
  m.config_hash = config_fingerprint("score|" + std::to_string(opt.targets) + '|' +
                                     num(opt.capture_radius) + '|' + num(opt.radius_override));
  write_manifest(m, out_dir + "/manifest.json");
  return 0;
}

void write_agreement_csv(const std::string& path, const AgreementReport& rep) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "octant,metric,value\n";
  auto emit = [&](const OctantAgreement& o, const char* metric, std::optional<double> v) {
    out << o.octant.name() << ',' << metric << ',' << (v ? num(*v) : std::string("NA")) << '\n';
  };
  for (const auto& o : rep.octants) {
    if (!o.octant.analyzed()) continue;
    out << o.octant.name() << ",frames," << o.ref_frames << '\n';
    emit(o, "agreement_rate", o.agreement_rate());
    emit(o, "err_ap", o.rate(o.err_ap));
    emit(o, "err_si", o.rate(o.err_si));
    emit(o, "err_ml", o.rate(o.err_ml));
  }
}

int cmd_compare(const std::string& ref_path, const std::string& test_path,
                const std::string& landmarks_path, const std::string& out_dir,
                const ScoreOptions& opt) {
  fs::create_directories(out_dir);
  const auto ref_traj = load_trajectory(ref_path, format_for(ref_path));
  const auto test_traj = load_trajectory(test_path, format_for(test_path));
  const LandmarkMap map =
      landmarks_path.empty() ? LandmarkMap{} : load_landmark_map(landmarks_path);

  const auto ref_scored = score_trajectory(ref_traj, map, opt);
  const auto test_scored = score_trajectory(test_traj, map, opt);

  const auto ref_seq = octant_sequence(ref_scored.wrist);
  const auto test_seq = align_to_reference(ref_seq, octant_sequence(test_scored.wrist));
  const auto agreement = agreement_report(ref_seq, test_seq);

  // Bland-Altman over the per-octant percent-reached pairs.
  std::vector<std::pair<double, double>> pairs;
  for (const auto& o : analyzed_octants()) {
    const auto& r = ref_scored.report.by_octant(o);
    const auto& t = test_scored.report.by_octant(o);
    if (r.percent && t.percent) pairs.emplace_back(*t.percent, *r.percent);
  }
  const auto ba = bland_altman(pairs);

  const std::string ws_csv = out_dir + "/workspace.csv";
  const std::string ws_svg = out_dir + "/workspace.svg";
  write_workspace_csv(ws_csv, {{"reference", &ref_scored.report}, {"test", &test_scored.report}});
  write_workspace_svg(ws_svg, {{"reference", &ref_scored.report}, {"test", &test_scored.report}});

  const std::string agr_csv = out_dir + "/agreement.csv";
  write_agreement_csv(agr_csv, agreement);

  const std::string agr_svg = out_dir + "/agreement.svg";
  {
    std::vector<std::string> cats;
    BarSeries agree{"agreement", "#4C72B0", {}};
    BarSeries eap{"AP error", "#DD8452", {}};
    BarSeries esi{"SI error", "#55A868", {}};
    BarSeries eml{"ML error", "#C44E52", {}};
    for (const auto& o : analyzed_octants()) {
      const auto& a = agreement.by_octant(o);
      cats.push_back(o.name());
      agree.values.push_back(a.agreement_rate());
      eap.values.push_back(a.rate(a.err_ap));
      esi.values.push_back(a.rate(a.err_si));
      eml.values.push_back(a.rate(a.err_ml));
    }
    write_bar_chart_svg(agr_svg, "Octant agreement and directional error rates", cats,
                        {agree, eap, esi, eml}, "% of octant frames");
  }

  const std::string ba_csv = out_dir + "/bland_altman.csv";
  {
    std::ofstream out(ba_csv);
    out << "scope,mean_difference,sd,lower_limit,upper_limit,n\n";
    out << "All Octants," << num(ba.mean_difference) << ',' << num(ba.sd) << ','
        << num(ba.lower_limit) << ',' << num(ba.upper_limit) << ',' << ba.n << '\n';
  }

  RunManifest m;
  m.command = "compare";
  m.inputs = {ref_path, test_path};
  if (!landmarks_path.empty()) m.inputs.push_back(landmarks_path);
  m.outputs = {ws_csv, ws_svg, agr_csv, agr_svg, ba_csv};
  m.seed = opt.seed;
  m.config_hash = config_fingerprint("compare|" + std::to_string(opt.targets) + '|' +
                                     num(opt.capture_radius));
  write_manifest(m, out_dir + "/manifest.json");
  return 0;
}

int cmd_fit(const std::vector<std::string>& trial_paths,
            const std::vector<std::string>& obs2d_args, const std::string& skeleton_path,
            const std::string& cameras_path, const std::string& config_path,
            std::int64_t seed_override, const std::string& out_dir) {
  if (trial_paths.empty()) throw CLI::ValidationError("fit", "at least one --trial is required");
  fs::create_directories(out_dir);

  const SkeletonSpec spec = skeleton_from(skeleton_path);
  const std::vector<CameraModel> cameras =
      cameras_path.empty() ? default_cameras() : load_cameras(cameras_path);
  FitConfig config = config_path.empty() ? FitConfig{} : load_fit_config(config_path);
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);

  std::vector<TrialObservations> trials;
  for (const auto& p : trial_paths) {
    TrialObservations t;
    t.obs3d = load_trajectory(p, format_for(p));
    t.obs2d.resize(cameras.size());
    trials.push_back(std::move(t));
  }
  // --obs2d trial:camera:path
  for (const auto& arg : obs2d_args) {
    const auto c1 = arg.find(':');
    const auto c2 = arg.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw CLI::ValidationError("--obs2d", "expected <trial-index>:<camera-name>:<path>");
    const std::size_t ti = std::stoul(arg.substr(0, c1));
    const std::string cam_name = arg.substr(c1 + 1, c2 - c1 - 1);
    const std::string path = arg.substr(c2 + 1);
    if (ti >= trials.size()) throw CLI::ValidationError("--obs2d", "trial index out of range");
    int ci = -1;
    for (std::size_t c = 0; c < cameras.size(); ++c)
      if (cameras[c].name == cam_name) ci = static_cast<int>(c);
    if (ci < 0) throw CLI::ValidationError("--obs2d", "unknown camera '" + cam_name + "'");
    trials[ti].obs2d[ci] = load_pixel_trajectory(path);
  }

  const FitResult result = fit(spec, cameras, trials, config);

  std::vector<std::string> outputs;
  {
    const std::string path = out_dir + "/loss_trace.csv";
    std::ofstream out(path);
    out << "iteration,total_loss\n";
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
      out << i << ',' << num(result.loss_trace[i]) << '\n';
    outputs.push_back(path);
  }
  for (std::size_t ti = 0; ti < trials.size(); ++ti) {
    const std::string path = out_dir + "/reconstructed_" + std::to_string(ti) + ".csv";
    save_trajectory(result.reconstructed[ti], path, TrajectoryFormat::Csv);
    outputs.push_back(path);
  }
  {
    const std::string path = out_dir + "/body_params.json";
    nlohmann::json j;
    for (std::size_t g = 0; g < spec.scale_groups.size(); ++g)
      j["scales"][spec.scale_groups[g]] = result.body.scales[g];
    for (std::size_t k = 0; k < spec.keypoints.size(); ++k)
      j["offsets"][spec.keypoints[k].name] = {result.body.offsets[k].x, result.body.offsets[k].y,
                                              result.body.offsets[k].z};
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    outputs.push_back(path);
  }
  {
    const std::string path = out_dir + "/fit_summary.json";
    nlohmann::json j;
    j["iterations"] = config.iterations;
    j["final_loss"] = result.loss_trace.empty() ? 0.0 : result.loss_trace.back();
    j["trials"] = trials.size();
    j["simd_backend"] = simd::backend_name();
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    outputs.push_back(path);
  }

  RunManifest m;
  m.command = "fit";
  m.inputs = trial_paths;
  if (!skeleton_path.empty()) m.inputs.push_back(skeleton_path);
  if (!cameras_path.empty()) m.inputs.push_back(cameras_path);
  if (!config_path.empty()) m.inputs.push_back(config_path);
  m.outputs = outputs;
  m.seed = config.seed;
  m.config_hash = config_fingerprint(
      "fit|" + std::to_string(config.iterations) + '|' + std::to_string(config.width) + '|' +
      std::to_string(config.hidden_layers) + '|' + num(config.lambda2));
  write_manifest(m, out_dir + "/manifest.json");
  return 0;
}

int cmd_synth(const std::string& script_path, const std::string& skeleton_path,
              const std::string& cameras_path, std::int64_t seed_override,
              const std::string& out_dir) {
  fs::create_directories(out_dir);
  const SkeletonSpec spec = skeleton_from(skeleton_path);
  const std::vector<CameraModel> cameras =
      cameras_path.empty() ? default_cameras() : load_cameras(cameras_path);
  TrialScript script = load_trial_script(script_path);
  if (seed_override >= 0) script.seed = static_cast<std::uint64_t>(seed_override);

  const SyntheticTrial trial = generate_trial(spec, cameras, script);

  std::vector<std::string> outputs;
  {
    const std::string path = out_dir + "/ground_truth_poses.csv";
    std::ofstream out(path);
    out << "time";
    for (const auto& n : spec.dof_names()) out << ',' << n;
    out << '\n';
    for (std::size_t f = 0; f < trial.timestamps.size(); ++f) {
      out << num(trial.timestamps[f]);
      for (double q : trial.poses[f].q) out << ',' << num(q);
      out << '\n';
    }
    outputs.push_back(path);
  }
  auto dump3d = [&](const KeypointTrajectory& t, const std::string& name) {
    const std::string path = out_dir + '/' + name;
    save_trajectory(t, path, TrajectoryFormat::Csv);
    outputs.push_back(path);
  };
  auto dump2d = [&](const PixelTrajectory& t, const std::string& name) {
    const std::string path = out_dir + '/' + name;
    save_pixel_trajectory(t, path);
    outputs.push_back(path);
  };
  dump3d(trial.clean, "clean.csv");
  dump3d(trial.noisy, "noisy.csv");
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    dump3d(trial.noisy_depth[c], "noisy_depth_" + cameras[c].name + ".csv");
    dump2d(trial.clean_2d[c], "clean_2d_" + cameras[c].name + ".csv");
    dump2d(trial.noisy_2d[c], "noisy_2d_" + cameras[c].name + ".csv");
  }

  RunManifest m;
  m.command = "synth";
  m.inputs = {script_path};
  if (!skeleton_path.empty()) m.inputs.push_back(skeleton_path);
  if (!cameras_path.empty()) m.inputs.push_back(cameras_path);
  m.outputs = outputs;
  m.seed = script.seed;
  m.config_hash = config_fingerprint("synth|" + std::to_string(script.directives.size()) + '|' +
                                     num(script.frame_rate));
  write_manifest(m, out_dir + "/manifest.json");
  return 0;
}

int cmd_report(const std::vector<std::string>& csv_paths, const std::string& out_dir) {
  if (csv_paths.empty()) throw CLI::ValidationError("report", "at least one CSV is required");
  fs::create_directories(out_dir);

  // Merge tidy workspace CSVs (octant,system,available,reached,percent).
  std::map<std::string, std::map<std::string, std::optional<double>>> by_system;
  for (const auto& path : csv_paths) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("octant,system,", 0) != 0)
      throw ValidationError(path + ": not a workspace report CSV");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::string cur;
      for (char c : line) {
        if (c == ',') {
          cells.push_back(cur);
          cur.clear();
        } else
          cur += c;
      }
      cells.push_back(cur);
      if (cells.size() != 5) throw ValidationError(path + ": malformed row '" + line + "'");
      by_system[cells[1]][cells[0]] =
          cells[4] == "NA" ? std::nullopt : std::optional<double>(std::stod(cells[4]));
    }
  }

  std::vector<std::string> cats;
  for (const auto& o : analyzed_octants()) cats.push_back(o.name());
  static const char* colors[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52"};
  std::vector<BarSeries> series;
  std::size_t i = 0;
  for (const auto& [system, values] : by_system) {
    BarSeries s{system, colors[i++ % 4], {}};
    for (const auto& c : cats) {
      auto it = values.find(c);
      s.values.push_back(it == values.end() ? std::nullopt : it->second);
    }
    series.push_back(std::move(s));
  }
  const std::string svg = out_dir + "/combined.svg";
  write_bar_chart_svg(svg, "Percent workspace reached per octant", cats, series, "% reached");

  RunManifest m;
  m.command = "report";
  m.inputs = csv_paths;
  m.outputs = {svg};
  m.config_hash = config_fingerprint("report");
  write_manifest(m, out_dir + "/manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upper-extremity reachable workspace analysis"};
  app.require_subcommand(1);

  std::string traj_path, ref_path, test_path, landmarks_path, out_dir = ".";
  std::string skeleton_path, cameras_path, config_path, script_path, system_name = "test";
  std::vector<std::string> trial_paths, obs2d_args, report_csvs;
  ScoreOptions opt;
  std::int64_t seed = -1;

  auto add_score_opts = [&](CLI::App* c) {
    c->add_option("--targets", opt.targets, "Number of sphere targets");
    c->add_option("--capture-radius", opt.capture_radius, "Capture radius in meters");
    c->add_option("--radius", opt.radius_override, "Override target sphere radius (meters)");
    c->add_option("--landmarks", landmarks_path, "Landmark-name map JSON");
    c->add_option("--seed", seed, "Random seed");
    c->add_option("--out-dir", out_dir, "Output directory");
  };

  auto* score = app.add_subcommand("score", "Score percent workspace reached per octant");
  score->add_option("trajectory", traj_path, "Keypoint trajectory (CSV or JSONL)")->required();
  score->add_option("--system-name", system_name, "System label in the report");
  add_score_opts(score);

  auto* compare = app.add_subcommand("compare", "Agreement statistics between two streams");
  compare->add_option("reference", ref_path, "Reference trajectory")->required();
  compare->add_option("test", test_path, "Test trajectory")->required();
  add_score_opts(compare);

  auto* fitc = app.add_subcommand("fit", "Fit implicit joint-angle trajectories to observations");
  fitc->add_option("--trial", trial_paths, "3D observation trajectory (repeatable)");
  fitc->add_option("--obs2d", obs2d_args, "2D observations as <trial>:<camera>:<path>");
  fitc->add_option("--skeleton", skeleton_path, "Skeleton spec JSON");
  fitc->add_option("--cameras", cameras_path, "Camera config JSON");
  fitc->add_option("--config", config_path, "Fit config JSON");
  fitc->add_option("--seed", seed, "Seed override");
  fitc->add_option("--out-dir", out_dir, "Output directory");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic ground-truth trial");
  synth->add_option("script", script_path, "Trial script JSON")->required();
  synth->add_option("--skeleton", skeleton_path, "Skeleton spec JSON");
  synth->add_option("--cameras", cameras_path, "Camera config JSON");
  synth->add_option("--seed", seed, "Seed override");
  synth->add_option("--out-dir", out_dir, "Output directory");

  auto* report = app.add_subcommand("report", "Combine workspace CSVs into one chart");
  report->add_option("csv", report_csvs, "Workspace report CSVs")->required();
  report->add_option("--out-dir", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
    if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
    if (score->parsed())
      return cmd_score(traj_path, landmarks_path, out_dir, system_name, opt);
    if (compare->parsed()) return cmd_compare(ref_path, test_path, landmarks_path, out_dir, opt);
    if (fitc->parsed())
      return cmd_fit(trial_paths, obs2d_args, skeleton_path, cameras_path, config_path, seed,
                     out_dir);
    if (synth->parsed())
      return cmd_synth(script_path, skeleton_path, cameras_path, seed, out_dir);
    if (report->parsed()) return cmd_report(report_csvs, out_dir);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
