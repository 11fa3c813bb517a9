#include "uerw/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uerw/errors.hpp"

namespace uerw {

namespace {

// Shortest decimal that round-trips the double exactly.
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Try shorter representations; keep the shortest that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char cand[32];
    std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
    if (std::strtod(cand, nullptr) == v) return cand;
  }
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& cell, std::size_t row, const char* what) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  double v;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw ValidationError("row " + std::to_string(row) + ": malformed " + what + " '" + cell + "'");
  return v;
}

void check_timestamps(const std::vector<double>& ts) {
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i] > ts[i - 1]))
      throw ValidationError("non-monotonic timestamps at row " + std::to_string(i + 2) +
                            " (t=" + std::to_string(ts[i]) + " after t=" + std::to_string(ts[i - 1]) + ")");
  }
}

template <class Traj>
int index_of_impl(const Traj& t, const std::string& name) {
  auto it = std::find(t.names.begin(), t.names.end(), name);
  return it == t.names.end() ? -1 : static_cast<int>(it - t.names.begin());
}

}  // namespace

int KeypointTrajectory::index_of(const std::string& name) const { return index_of_impl(*this, name); }
int PixelTrajectory::index_of(const std::string& name) const { return index_of_impl(*this, name); }

void KeypointTrajectory::validate() const {
  check_timestamps(timestamps);
  if (samples.size() != timestamps.size() * names.size())
    throw ValidationError("trajectory shape mismatch: " + std::to_string(samples.size()) +
                          " samples for " + std::to_string(timestamps.size()) + "x" +
                          std::to_string(names.size()));
  for (std::size_t f = 0; f < frame_count(); ++f)
    for (std::size_t k = 0; k < keypoint_count(); ++k) {
      const auto& s = at(f, k);
      if (!s.present) continue;
      if (!s.p.finite())
        throw ValidationError("non-finite position at frame " + std::to_string(f) + " keypoint " + names[k]);
      if (!(s.confidence >= 0.0 && s.confidence <= 1.0))
        throw ValidationError("confidence out of range at frame " + std::to_string(f) +
                              " keypoint " + names[k]);
    }
}

void PixelTrajectory::validate() const {
  check_timestamps(timestamps);
  if (samples.size() != timestamps.size() * names.size())
    throw ValidationError("pixel trajectory shape mismatch");
  for (std::size_t f = 0; f < frame_count(); ++f)
    for (std::size_t k = 0; k < keypoint_count(); ++k) {
      const auto& s = at(f, k);
      if (!s.present) continue;
      if (!std::isfinite(s.u) || !std::isfinite(s.v))
        throw ValidationError("non-finite pixel at frame " + std::to_string(f) + " keypoint " + names[k]);
      if (!(s.confidence >= 0.0 && s.confidence <= 1.0))
        throw ValidationError("confidence out of range at frame " + std::to_string(f) +
                              " keypoint " + names[k]);
    }
}

double infer_frame_rate(const std::vector<double>& timestamps) {
  if (timestamps.size() < 2) return 0.0;
  std::vector<double> dts;
  dts.reserve(timestamps.size() - 1);
  for (std::size_t i = 1; i < timestamps.size(); ++i) dts.push_back(timestamps[i] - timestamps[i - 1]);
  std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
  double median = dts[dts.size() / 2];
  if (median <= 0.0) return 0.0;
  double rate = 1.0 / median;
  // Snap to an integer rate when within half a percent (60 Hz from 0.0167 s etc).
  double rounded = std::round(rate);
  if (rounded > 0 && std::abs(rate - rounded) / rounded < 0.005) return rounded;
  return rate;
}

namespace {

KeypointTrajectory load_csv_3d(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "time")
    throw ValidationError(path + ": malformed header, first column must be 'time'");
  if ((header.size() - 1) % 4 != 0)
    throw ValidationError(path + ": malformed header, expected groups of <name>_x,_y,_z,_c");

  KeypointTrajectory traj;
  for (std::size_t i = 1; i < header.size(); i += 4) {
    auto strip = [&](const std::string& col, const char* suffix) -> std::string {
      std::string suf = suffix;
      if (col.size() <= suf.size() || col.substr(col.size() - suf.size()) != suf)
        throw ValidationError(path + ": malformed header column '" + col + "', expected *" + suf);
      return col.substr(0, col.size() - suf.size());
    };
    std::string name = strip(header[i], "_x");
    if (strip(header[i + 1], "_y") != name || strip(header[i + 2], "_z") != name ||
        strip(header[i + 3], "_c") != name)
      throw ValidationError(path + ": inconsistent header group for '" + name + "'");
    traj.names.push_back(name);
  }

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError(path + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    traj.timestamps.push_back(parse_number(cells[0], row, "timestamp"));
    for (std::size_t k = 0; k < traj.names.size(); ++k) {
      const std::string& cx = cells[1 + 4 * k];
      const std::string& cy = cells[2 + 4 * k];
      const std::string& cz = cells[3 + 4 * k];
      const std::string& cc = cells[4 + 4 * k];
      Sample3 s;
      bool any = !cx.empty() || !cy.empty() || !cz.empty() || !cc.empty();
      bool all = !cx.empty() && !cy.empty() && !cz.empty();
      if (any && !all)
        throw ValidationError(path + ": row " + std::to_string(row) + " keypoint " +
                              traj.names[k] + ": partially missing sample");
      if (all) {
        s.p = {parse_number(cx, row, "x"), parse_number(cy, row, "y"), parse_number(cz, row, "z")};
        s.confidence = cc.empty() ? 1.0 : parse_number(cc, row, "confidence");
        s.present = true;
      }
      traj.samples.push_back(s);
    }
  }
  try {
    traj.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  traj.frame_rate = infer_frame_rate(traj.timestamps);
  return traj;
}

void save_csv_3d(const KeypointTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "time";
  for (const auto& n : traj.names) out << ',' << n << "_x," << n << "_y," << n << "_z," << n << "_c";
  out << '\n';
  for (std::size_t f = 0; f < traj.frame_count(); ++f) {
    out << fmt_double(traj.timestamps[f]);
    for (std::size_t k = 0; k < traj.keypoint_count(); ++k) {
      const auto& s = traj.at(f, k);
      if (s.present)
        out << ',' << fmt_double(s.p.x) << ',' << fmt_double(s.p.y) << ',' << fmt_double(s.p.z)
            << ',' << fmt_double(s.confidence);
      else
        out << ",,,,";
    }
    out << '\n';
  }
}

KeypointTrajectory load_jsonl_3d(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  KeypointTrajectory traj;
  std::string line;
  std::size_t row = 0;
  std::vector<std::vector<std::pair<std::string, Sample3>>> frames;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw ValidationError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
    if (!j.contains("t") || !j["t"].is_number())
      throw ValidationError(path + ": row " + std::to_string(row) + ": missing numeric 't'");
    traj.timestamps.push_back(j["t"].get<double>());
    std::vector<std::pair<std::string, Sample3>> frame;
    if (j.contains("kp")) {
      for (auto& [name, arr] : j["kp"].items()) {
        if (!arr.is_array() || arr.size() != 4)
          throw ValidationError(path + ": row " + std::to_string(row) + " keypoint " + name +
                                ": expected [x,y,z,c]");
        Sample3 s;
        s.p = {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
        s.confidence = arr[3].get<double>();
        s.present = true;
        frame.emplace_back(name, s);
        if (traj.index_of(name) < 0) traj.names.push_back(name);
      }
    }
    frames.push_back(std::move(frame));
  }
  std::sort(traj.names.begin(), traj.names.end());
  traj.samples.assign(traj.frame_count() * traj.keypoint_count(), Sample3{});
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (auto& [name, s] : frames[f]) traj.at(f, traj.index_of(name)) = s;
  try {
    traj.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  traj.frame_rate = infer_frame_rate(traj.timestamps);
  return traj;
}

void save_jsonl_3d(const KeypointTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  for (std::size_t f = 0; f < traj.frame_count(); ++f) {
    out << "{\"t\":" << fmt_double(traj.timestamps[f]) << ",\"kp\":{";
    bool first = true;
    for (std::size_t k = 0; k < traj.keypoint_count(); ++k) {
      const auto& s = traj.at(f, k);
      if (!s.present) continue;
      if (!first) out << ',';
      first = false;
      out << '"' << traj.names[k] << "\":[" << fmt_double(s.p.x) << ',' << fmt_double(s.p.y)
          << ',' << fmt_double(s.p.z) << ',' << fmt_double(s.confidence) << ']';
    }
    out << "}}\n";
  }
}

}  // namespace

KeypointTrajectory load_trajectory(const std::string& path, TrajectoryFormat format) {
  return format == TrajectoryFormat::Csv ? load_csv_3d(path) : load_jsonl_3d(path);
}

void save_trajectory(const KeypointTrajectory& traj, const std::string& path,
                     TrajectoryFormat format) {
  traj.validate();
  if (format == TrajectoryFormat::Csv)
    save_csv_3d(traj, path);
  else
    save_jsonl_3d(traj, path);
}

PixelTrajectory load_pixel_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "time")
    throw ValidationError(path + ": malformed header, first column must be 'time'");
  if ((header.size() - 1) % 3 != 0)
    throw ValidationError(path + ": malformed header, expected groups of <name>_u,_v,_c");

  PixelTrajectory traj;
  for (std::size_t i = 1; i < header.size(); i += 3) {
    auto strip = [&](const std::string& col, const char* suffix) -> std::string {
      std::string suf = suffix;
      if (col.size() <= suf.size() || col.substr(col.size() - suf.size()) != suf)
        throw ValidationError(path + ": malformed header column '" + col + "'");
      return col.substr(0, col.size() - suf.size());
    };
    std::string name = strip(header[i], "_u");
    if (strip(header[i + 1], "_v") != name || strip(header[i + 2], "_c") != name)
      throw ValidationError(path + ": inconsistent header group for '" + name + "'");
    traj.names.push_back(name);
  }

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError(path + ": row " + std::to_string(row) + " has wrong cell count");
    traj.timestamps.push_back(parse_number(cells[0], row, "timestamp"));
    for (std::size_t k = 0; k < traj.names.size(); ++k) {
      const std::string& cu = cells[1 + 3 * k];
      const std::string& cv = cells[2 + 3 * k];
      const std::string& cc = cells[3 + 3 * k];
      Sample2 s;
      bool any = !cu.empty() || !cv.empty() || !cc.empty();
      bool all = !cu.empty() && !cv.empty();
      if (any && !all)
        throw ValidationError(path + ": row " + std::to_string(row) + " keypoint " +
                              traj.names[k] + ": partially missing sample");
      if (all) {
        s.u = parse_number(cu, row, "u");
        s.v = parse_number(cv, row, "v");
        s.confidence = cc.empty() ? 1.0 : parse_number(cc, row, "confidence");
        s.present = true;
      }
      traj.samples.push_back(s);
    }
  }
  try {
    traj.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  traj.frame_rate = infer_frame_rate(traj.timestamps);
  return traj;
}

void save_pixel_trajectory(const PixelTrajectory& traj, const std::string& path) {
  traj.validate();
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "time";
  for (const auto& n : traj.names) out << ',' << n << "_u," << n << "_v," << n << "_c";
  out << '\n';
  for (std::size_t f = 0; f < traj.frame_count(); ++f) {
    out << fmt_double(traj.timestamps[f]);
    for (std::size_t k = 0; k < traj.keypoint_count(); ++k) {
      const auto& s = traj.at(f, k);
      if (s.present)
        out << ',' << fmt_double(s.u) << ',' << fmt_double(s.v) << ',' << fmt_double(s.confidence);
      else
        out << ",,,";
    }
    out << '\n';
  }
}

std::vector<GapSummary> gap_report(const KeypointTrajectory& traj) {
  std::vector<GapSummary> out;
  out.reserve(traj.keypoint_count());
  for (std::size_t k = 0; k < traj.keypoint_count(); ++k) {
    GapSummary g;
    g.name = traj.names[k];
    std::size_t run = 0;
    for (std::size_t f = 0; f < traj.frame_count(); ++f) {
      if (!traj.at(f, k).present) {
        ++g.missing_count;
        ++run;
        g.longest_run = std::max(g.longest_run, run);
      } else {
        run = 0;
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace uerw
