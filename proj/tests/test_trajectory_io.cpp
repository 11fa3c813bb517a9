#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "uerw/errors.hpp"
#include "uerw/trajectory.hpp"

using namespace uerw;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

KeypointTrajectory random_trajectory(std::uint64_t seed, std::size_t frames,
                                     double dropout = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> c(0.0, 1.0);
  KeypointTrajectory t;
  t.names = {"alpha", "beta", "gamma"};
  t.frame_rate = 60.0;
  for (std::size_t f = 0; f < frames; ++f) {
    t.timestamps.push_back(static_cast<double>(f) / 60.0);
    for (std::size_t k = 0; k < t.names.size(); ++k) {
      Sample3 s;
      s.present = c(rng) >= dropout;
      if (s.present) {
        s.p = {u(rng), u(rng), u(rng)};
        s.confidence = c(rng);
      }
      t.samples.push_back(s);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("CSV round trip is lossless and byte-stable") {
  const auto t = random_trajectory(100, 40);
  const std::string p1 = temp_path("uerw_rt1.csv");
  const std::string p2 = temp_path("uerw_rt2.csv");
  save_trajectory(t, p1, TrajectoryFormat::Csv);
  const auto back = load_trajectory(p1, TrajectoryFormat::Csv);
  CHECK(back == t);
  save_trajectory(back, p2, TrajectoryFormat::Csv);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("JSONL round trip is lossless and byte-stable") {
  const auto t = random_trajectory(101, 25);
  const std::string p1 = temp_path("uerw_rt1.jsonl");
  const std::string p2 = temp_path("uerw_rt2.jsonl");
  save_trajectory(t, p1, TrajectoryFormat::Jsonl);
  const auto back = load_trajectory(p1, TrajectoryFormat::Jsonl);
  CHECK(back == t);
  save_trajectory(back, p2, TrajectoryFormat::Jsonl);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("pixel trajectory round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  PixelTrajectory t;
  t.names = {"a", "b"};
  t.frame_rate = 30.0;
  for (int f = 0; f < 20; ++f) {
    t.timestamps.push_back(f / 30.0);
    for (int k = 0; k < 2; ++k) {
      Sample2 s;
      s.present = (f + k) % 7 != 0;
      if (s.present) {
        s.u = u(rng);
        s.v = u(rng);
        s.confidence = 0.5;
      }
      t.samples.push_back(s);
    }
  }
  const std::string p = temp_path("uerw_px.csv");
  save_pixel_trajectory(t, p);
  CHECK(load_pixel_trajectory(p) == t);
}

TEST_CASE("extreme double values survive the text round trip bit-exactly") {
  KeypointTrajectory t;
  t.names = {"kp"};
  t.frame_rate = 1.0;
  const double values[] = {0.1, 1.0 / 3.0, 1e-300, 12345.6789012345678,
                           -2.2250738585072014e-308, 9007199254740993.0};
  int f = 0;
  for (double v : values) {
    t.timestamps.push_back(f++);
    t.samples.push_back({{v, -v, v * 3}, 1.0, true});
  }
  const std::string p = temp_path("uerw_bits.csv");
  save_trajectory(t, p, TrajectoryFormat::Csv);
  CHECK(load_trajectory(p, TrajectoryFormat::Csv) == t);
}

TEST_CASE("missing samples are empty cells; partial missing is rejected") {
  const std::string p = temp_path("uerw_missing.csv");
  {
    std::ofstream out(p);
    out << "time,kp_x,kp_y,kp_z,kp_c\n";
    out << "0,1,2,3,0.9\n";
    out << "0.1,,,,\n";
  }
  const auto t = load_trajectory(p, TrajectoryFormat::Csv);
  CHECK(t.at(0, 0).present);
  CHECK_FALSE(t.at(1, 0).present);

  {
    std::ofstream out(p);
    out << "time,kp_x,kp_y,kp_z,kp_c\n";
    out << "0,1,,3,0.9\n";
  }
  CHECK_THROWS_AS(load_trajectory(p, TrajectoryFormat::Csv), ValidationError);
}

TEST_CASE("validation names the offending row") {
  auto t = random_trajectory(102, 10, 0.0);
  t.timestamps[5] = t.timestamps[4];  // not strictly increasing
  CHECK_THROWS_AS(t.validate(), ValidationError);

  auto t2 = random_trajectory(103, 10, 0.0);
  t2.at(3, 1).confidence = 1.5;
  CHECK_THROWS_AS(t2.validate(), ValidationError);

  auto t3 = random_trajectory(104, 10, 0.0);
  t3.at(2, 0).p.x = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(t3.validate(), ValidationError);
}

TEST_CASE("frame rate inference snaps near-integer rates") {
  std::vector<double> ts;
  for (int f = 0; f < 120; ++f) ts.push_back(f / 60.0 + (f % 2 ? 1e-5 : 0.0));
  CHECK(infer_frame_rate(ts) == doctest::Approx(60.0));
  CHECK(infer_frame_rate({0.0}) == 0.0);
  CHECK(infer_frame_rate({0.0, 0.4}) == doctest::Approx(2.5));
}

TEST_CASE("gap report counts missing samples and longest run") {
  KeypointTrajectory t;
  t.names = {"kp"};
  t.frame_rate = 10.0;
  for (int f = 0; f < 6; ++f) {
    t.timestamps.push_back(f / 10.0);
    Sample3 s;
    s.present = !(f == 1 || f == 2 || f == 4);
    if (s.present) s.p = {0, 0, 0};
    t.samples.push_back(s);
  }
  const auto report = gap_report(t);
  REQUIRE(report.size() == 1);
  CHECK(report[0].name == "kp");
  CHECK(report[0].missing_count == 3);
  CHECK(report[0].longest_run == 2);
}
