// SPDX-License-Identifier: Apache-2.0
#include "dcmp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace dcmp {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(trim(item)));
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CodecConfig parse_codec_config(const std::string& text) {
  CodecConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "rows") cfg.params.rows = std::stoi(value);
      else if (key == "cols") cfg.params.cols = std::stoi(value);
      else if (key == "elev_min_deg") cfg.params.elevation_min = deg_to_rad(std::stod(value));
      else if (key == "elev_max_deg") cfg.params.elevation_max = deg_to_rad(std::stod(value));
      else if (key == "range_max_m") cfg.params.range_max = std::stod(value);
      else if (key == "elev_table_deg") {
        cfg.params.row_elevations = parse_double_list(value);
        for (double& e : cfg.params.row_elevations) e = deg_to_rad(e);
      } else if (key == "t_key_m") cfg.t_key = std::stod(value);
      else if (key == "tau") cfg.intra.tau = std::stod(value);
      else if (key == "g_min") cfg.intra.g_min = std::stod(value);
      else if (key == "kappa_m") cfg.icp.kappa = std::stod(value);
      else if (key == "keyframe_interval") cfg.keyframe_interval = std::stoi(value);
      else if (key == "adwt_alpha") cfg.adwt_alpha = std::stod(value);
      else if (key == "q") cfg.q = std::stod(value);
      else if (key == "dataset") {
        if (value == "kitti") cfg.dataset = RcDataset::Kitti;
        else if (value == "nuscenes") cfg.dataset = RcDataset::NuScenes;
        else if (value == "waymo") cfg.dataset = RcDataset::Waymo;
        else throw std::runtime_error("unknown dataset '" + value + "'");
      } else {
        throw std::runtime_error("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  cfg.params.validate();
  return cfg;
}

CodecConfig load_codec_config(const std::string& path) {
  return parse_codec_config(read_text_file(path));
}

std::vector<Pose> load_pose_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pose file '" + path + "'");
  std::vector<Pose> poses;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double v[12];
    for (double& x : v)
      if (!(ls >> x)) throw std::runtime_error("pose file: expected 12 floats per line");
    Pose p;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) p.rotation(r, c) = v[3 * r + c];
    p.translation = Eigen::Vector3d(v[9], v[10], v[11]);
    if (!p.is_rigid(1e-3))
      throw std::runtime_error("pose file: line is not a rigid transform");
    poses.push_back(p);
  }
  return poses;
}

double RateSchedule::target_for(std::uint32_t frame) const {
  if (entries.empty()) throw std::runtime_error("empty rate schedule");
  double t = entries.front().second;
  for (const auto& [f, bpp] : entries) {
    if (f > frame) break;
    t = bpp;
  }
  return t;
}

RateSchedule parse_schedule(const std::string& text) {
  RateSchedule sched;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("schedule line " + std::to_string(lineno) +
                               ": expected frame_index,target_bpp");
    const long frame = std::stol(trim(line.substr(0, comma)));
    const double bpp = std::stod(trim(line.substr(comma + 1)));
    if (frame < 0 || !(bpp > 0.0))
      throw std::runtime_error("schedule line " + std::to_string(lineno) +
                               ": frame must be >= 0 and target > 0");
    sched.entries.emplace_back(static_cast<std::uint32_t>(frame), bpp);
  }
  std::sort(sched.entries.begin(), sched.entries.end());
  return sched;
}

RateSchedule load_schedule(const std::string& path) {
  return parse_schedule(read_text_file(path));
}

}  // namespace dcmp
