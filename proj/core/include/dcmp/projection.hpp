// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dcmp/geometry.hpp"

namespace dcmp {

struct ProjectStats {
  std::size_t dropped_out_of_fov = 0;  // elevation outside bounds
  std::size_t dropped_range = 0;       // range > range_max or <= 0
  std::size_t collisions = 0;          // points displaced by a nearer one
};

/// Spherical projection of a cloud onto a range image. Pixel collisions keep
/// the nearest point; drops are counted, never fatal. When `winners` is
/// given it receives, per pixel, the index of the point stored there
/// (-1 for empty pixels).
RangeImage project(const PointCloud& cloud, const ProjectionParams& params,
                   ProjectStats* stats = nullptr,
                   std::vector<std::int32_t>* winners = nullptr);

/// One point per masked pixel, at the bin-center direction with the stored
/// range. project(back_project(img)) == img exactly.
PointCloud back_project(const RangeImage& image);

}  // namespace dcmp
