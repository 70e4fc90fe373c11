// SPDX-License-Identifier: Apache-2.0
#include "dcmp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

namespace dcmp {
namespace {

// Hand-rolled RNG so frames are byte-identical across standard libraries.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {  // splitmix64
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal(double sigma) {  // Box-Muller
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  Rng r(seed ^ (salt * 0x9e3779b97f4a7c15ull + 0x7f4a7c15ull));
  return r.next();
}

}  // namespace

SyntheticScene::SyntheticScene(const SyntheticSceneConfig& config) : cfg_(config) {
  cfg_.params.validate();
  Rng rng(mix_seed(cfg_.seed, 0xb0c5));
  boxes_.reserve(cfg_.box_count);
  for (int i = 0; i < cfg_.box_count; ++i) {
    Box b;
    const double cx = rng.uniform(6.0, 0.8 * cfg_.params.range_max);
    const double cy = rng.uniform(-cfg_.wall_y + 2.0, cfg_.wall_y - 2.0);
    const double wx = rng.uniform(0.8, 4.0);
    const double wy = rng.uniform(0.8, 4.0);
    const double h = rng.uniform(0.6, 3.2);
    b.min[0] = cx - 0.5 * wx;
    b.max[0] = cx + 0.5 * wx;
    b.min[1] = cy - 0.5 * wy;
    b.max[1] = cy + 0.5 * wy;
    b.min[2] = cfg_.ground_z;
    b.max[2] = cfg_.ground_z + h;
    b.vel[0] = rng.uniform(-cfg_.box_speed, cfg_.box_speed);
    b.vel[1] = rng.uniform(-cfg_.box_speed, cfg_.box_speed);
    boxes_.push_back(b);
  }
}

SyntheticScene::SensorPose SyntheticScene::sensor_pose(int index) const {
  SensorPose p{0.0, 0.0, 0.0};
  const double yaw_step = deg_to_rad(cfg_.yaw_rate_deg);
  for (int i = 0; i < index; ++i) {
    p.x += cfg_.speed * std::cos(p.yaw);
    p.y += cfg_.speed * std::sin(p.yaw);
    p.yaw += yaw_step;
  }
  return p;
}

double SyntheticScene::cast_ray(const double origin[3], const double dir[3], int index) const {
  double best = std::numeric_limits<double>::infinity();

  if (dir[2] < -1e-9) {  // ground plane
    const double t = (cfg_.ground_z - origin[2]) / dir[2];
    if (t > 0.0) best = std::min(best, t);
  }
  for (double wy : {cfg_.wall_y, -cfg_.wall_y}) {  // corridor walls, 5 m tall
    if (std::abs(dir[1]) < 1e-9) continue;
    const double t = (wy - origin[1]) / dir[1];
    if (t <= 0.0) continue;
    const double z = origin[2] + t * dir[2];
    if (z >= cfg_.ground_z && z <= cfg_.ground_z + 5.0) best = std::min(best, t);
  }
  for (const Box& b : boxes_) {  // slab test, boxes drift with time
    const double shift[3] = {b.vel[0] * index, b.vel[1] * index, 0.0};
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    bool hit = true;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(dir[a]) < 1e-12) {
        if (origin[a] < b.min[a] + shift[a] || origin[a] > b.max[a] + shift[a]) { hit = false; break; }
        continue;
      }
      double ta = (b.min[a] + shift[a] - origin[a]) / dir[a];
      double tb = (b.max[a] + shift[a] - origin[a]) / dir[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) { hit = false; break; }
    }
    if (hit && t0 > 0.0) best = std::min(best, t0);
  }
  return best;
}

PointCloud SyntheticScene::frame(int index) const {
  const SensorPose sp = sensor_pose(index);
  const double cy = std::cos(sp.yaw), sy = std::sin(sp.yaw);
  const double origin[3] = {sp.x, sp.y, 0.0};

  Rng noise(mix_seed(cfg_.seed, 0x5eed0000ull + static_cast<std::uint64_t>(index)));
  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(cfg_.params.rows) * cfg_.params.cols / 2);

  for (int r = 0; r < cfg_.params.rows; ++r) {
    const double e = cfg_.params.elevation_of_row(r);
    const double ce = std::cos(e), se = std::sin(e);
    for (int c = 0; c < cfg_.params.cols; ++c) {
      const double a = cfg_.params.azimuth_of_col(c);
      // sensor-frame direction, then yaw into the world
      const double ds[3] = {ce * std::cos(a), ce * std::sin(a), se};
      const double dw[3] = {cy * ds[0] - sy * ds[1], sy * ds[0] + cy * ds[1], ds[2]};
      double t = cast_ray(origin, dw, index);
      if (!std::isfinite(t)) continue;
      t += noise.normal(cfg_.noise_sigma);
      if (t <= 0.05 || t > cfg_.params.range_max) continue;
      cloud.points.emplace_back(t * ds[0], t * ds[1], t * ds[2]);
    }
  }
  return cloud;
}

Pose SyntheticScene::relative_pose(int from, int to) const {
  const SensorPose pf = sensor_pose(from);
  const SensorPose pt = sensor_pose(to);
  const double dyaw = pf.yaw - pt.yaw;
  Pose pose;
  pose.rotation = Eigen::AngleAxisd(dyaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d dp(pf.x - pt.x, pf.y - pt.y, 0.0);
  pose.translation =
      Eigen::AngleAxisd(-pt.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix() * dp;
  return pose;
}

}  // namespace dcmp
