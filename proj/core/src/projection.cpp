// SPDX-License-Identifier: Apache-2.0
#include "dcmp/projection.hpp"

#include <algorithm>

namespace dcmp {

RangeImage project(const PointCloud& cloud, const ProjectionParams& params,
                   ProjectStats* stats, std::vector<std::int32_t>* winners) {
  params.validate();
  RangeImage image(params);
  ProjectStats local;
  if (winners) winners->assign(image.values.size(), -1);

  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point3& p = cloud.points[i];
    const double range = p.norm();
    if (!(range > 0.0) || range > params.range_max) {
      ++local.dropped_range;
      continue;
    }
    const double se = std::clamp(p.z / range, -1.0, 1.0);
    const int row = params.row_of_elevation(std::asin(se));
    if (row < 0) {
      ++local.dropped_out_of_fov;
      continue;
    }
    const int col = params.col_of_azimuth(std::atan2(p.y, p.x));

    const float value = static_cast<float>(range);
    const std::size_t at = image.idx(row, col);
    if (image.mask[at]) {
      ++local.collisions;
      if (value < image.values[at]) {
        image.values[at] = value;
        if (winners) (*winners)[at] = static_cast<std::int32_t>(i);
      }
    } else {
      image.values[at] = value;
      image.mask[at] = 1;
      if (winners) (*winners)[at] = static_cast<std::int32_t>(i);
    }
  }
  if (stats) *stats = local;
  return image;
}

PointCloud back_project(const RangeImage& image) {
  PointCloud cloud;
  cloud.points.reserve(image.mask_count());
  for (int r = 0; r < image.rows; ++r) {
    const double e = image.params.elevation_of_row(r);
    const double ce = std::cos(e), se = std::sin(e);
    for (int c = 0; c < image.cols; ++c) {
      if (!image.masked(r, c)) continue;
      const double a = image.params.azimuth_of_col(c);
      const double d = image.at(r, c);
      cloud.points.emplace_back(d * ce * std::cos(a), d * ce * std::sin(a), d * se);
    }
  }
  return cloud;
}

}  // namespace dcmp
