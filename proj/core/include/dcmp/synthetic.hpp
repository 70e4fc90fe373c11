// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "dcmp/geometry.hpp"

namespace dcmp {

/// Deterministic ray-cast scene (ground, corridor walls, boxes) with a
/// sensor driving through it. Frames are reproducible per (seed, index)
/// regardless of generation order; the generator owns its RNG so output is
/// byte-identical across platforms.
struct SyntheticSceneConfig {
  std::uint64_t seed = 1234;
  ProjectionParams params;
  int box_count = 14;
  double noise_sigma = 0.01;       // range noise, meters
  double speed = 0.6;              // forward motion per frame, meters
  double yaw_rate_deg = 0.15;      // heading drift per frame, degrees
  double ground_z = -1.7;
  double wall_y = 14.0;            // corridor half-width
  double box_speed = 0.05;         // box drift per frame, meters
};

class SyntheticScene {
 public:
  explicit SyntheticScene(const SyntheticSceneConfig& config = {});

  /// Point cloud of frame `index` in the sensor frame.
  PointCloud frame(int index) const;

  /// Ground-truth relative pose mapping frame `from` points into frame
  /// `to` coordinates: p_to = R p_from + t.
  Pose relative_pose(int from, int to) const;

  const SyntheticSceneConfig& config() const { return cfg_; }

 private:
  struct Box {
    double min[3], max[3];
    double vel[2];
  };

  struct SensorPose {
    double x, y, yaw;
  };
  SensorPose sensor_pose(int index) const;

  double cast_ray(const double origin[3], const double dir[3], int index) const;

  SyntheticSceneConfig cfg_;
  std::vector<Box> boxes_;
};

}  // namespace dcmp
