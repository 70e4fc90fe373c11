// SPDX-License-Identifier: Apache-2.0
#include "dcmp/prediction.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dcmp {
namespace {

// Scan geometry of a leaf direction: per-step offset and the set of line
// start pixels (those without an in-leaf predecessor).
struct ScanGeom {
  int dr, dc;
};

ScanGeom scan_geom(Direction dir) {
  switch (dir) {
    case Direction::Horizontal: return {0, 1};
    case Direction::Vertical: return {1, 0};
    case Direction::DiagonalDown: return {1, 1};
    default: return {-1, 1};  // DiagonalUp
  }
}

template <typename LineFn>
void for_each_scan_line(int r0, int c0, int size, Direction dir, LineFn&& fn) {
  switch (dir) {
    case Direction::Horizontal:
      for (int r = r0; r < r0 + size; ++r) fn(r, c0);
      break;
    case Direction::Vertical:
      for (int c = c0; c < c0 + size; ++c) fn(r0, c);
      break;
    case Direction::DiagonalDown:
      for (int c = c0; c < c0 + size; ++c) fn(r0, c);
      for (int r = r0 + 1; r < r0 + size; ++r) fn(r, c0);
      break;
    case Direction::DiagonalUp:
      for (int c = c0; c < c0 + size; ++c) fn(r0 + size - 1, c);
      for (int r = r0; r < r0 + size - 1; ++r) fn(r, c0);
      break;
  }
}

// Visits every leaf of a macroblock partition in a fixed order shared by
// predict and reconstruct.
template <typename LeafFn>
void for_each_leaf(const MacroblockPartition& mb, int mb_r0, int mb_c0, LeafFn&& fn) {
  if (!mb.split) {
    fn(mb_r0, mb_c0, kMacroblockSize, mb.dir);
    return;
  }
  for (int i = 0; i < 4; ++i) {
    const int r8 = mb_r0 + (i / 2) * 8, c8 = mb_c0 + (i % 2) * 8;
    const auto& sub = mb.sub[i];
    if (!sub.split) {
      fn(r8, c8, 8, sub.dir);
      continue;
    }
    for (int j = 0; j < 4; ++j)
      fn(r8 + (j / 2) * kMinLeafSize, c8 + (j % 2) * kMinLeafSize, kMinLeafSize, sub.leaf[j]);
  }
}

}  // namespace

GradientField pixel_gradients(const RangeImage& image) {
  GradientField g;
  g.rows = image.rows;
  g.cols = image.cols;
  g.du.assign(static_cast<std::size_t>(image.rows) * image.cols, 0.0);
  g.dv.assign(static_cast<std::size_t>(image.rows) * image.cols, 0.0);

  for (int r = 0; r < image.rows; ++r) {
    for (int c = 0; c < image.cols; ++c) {
      if (!image.masked(r, c)) continue;
      double du = 0.0, dv = 0.0;
      bool ok = true;
      if (r > 0 && r + 1 < image.rows) {
        if (image.masked(r - 1, c) && image.masked(r + 1, c))
          du = 0.5 * (static_cast<double>(image.at(r + 1, c)) - image.at(r - 1, c));
        else
          ok = false;
      } else if (r + 1 < image.rows) {  // top border
        if (image.masked(r + 1, c))
          du = static_cast<double>(image.at(r + 1, c)) - image.at(r, c);
        else
          ok = false;
      } else if (r > 0) {  // bottom border
        if (image.masked(r - 1, c))
          du = static_cast<double>(image.at(r, c)) - image.at(r - 1, c);
        else
          ok = false;
      }
      if (c > 0 && c + 1 < image.cols) {
        if (image.masked(r, c - 1) && image.masked(r, c + 1))
          dv = 0.5 * (static_cast<double>(image.at(r, c + 1)) - image.at(r, c - 1));
        else
          ok = false;
      } else if (c + 1 < image.cols) {
        if (image.masked(r, c + 1))
          dv = static_cast<double>(image.at(r, c + 1)) - image.at(r, c);
        else
          ok = false;
      } else if (c > 0) {
        if (image.masked(r, c - 1))
          dv = static_cast<double>(image.at(r, c)) - image.at(r, c - 1);
        else
          ok = false;
      }
      if (!ok) continue;  // any needed neighbor unmasked -> (0, 0)
      g.du[g.idx(r, c)] = du;
      g.dv[g.idx(r, c)] = dv;
    }
  }
  return g;
}

std::optional<Direction> dominant_direction(const GradientField& g, int row0, int col0,
                                            int size, const IntraConfig& cfg,
                                            bool* flat_out) {
  // Orientation bins centered on 0, 45, 90, 135 degrees (mod 180), weighted
  // by gradient magnitude. The delta direction is orthogonal to the bin.
  static constexpr Direction kBinToDir[4] = {
      Direction::Horizontal,    // gradient along rows
      Direction::DiagonalUp,    // gradient along (+r, +c)
      Direction::Vertical,      // gradient along columns
      Direction::DiagonalDown,  // gradient along (-r, +c)
  };
  double bins[4] = {0, 0, 0, 0};
  double total = 0.0;
  for (int r = row0; r < row0 + size && r < g.rows; ++r) {
    for (int c = col0; c < col0 + size && c < g.cols; ++c) {
      const double du = g.du[g.idx(r, c)], dv = g.dv[g.idx(r, c)];
      const double mag = std::hypot(du, dv);
      if (mag <= cfg.g_min) continue;
      double theta = std::atan2(dv, du);
      if (theta < 0) theta += std::numbers::pi;
      const int bin = static_cast<int>(std::lround(theta / (std::numbers::pi / 4.0))) % 4;
      bins[bin] += mag;
      total += mag;
    }
  }
  if (flat_out) *flat_out = (total == 0.0);
  if (total == 0.0) return std::nullopt;
  int best = 0;
  for (int b = 1; b < 4; ++b)
    if (bins[b] > bins[best]) best = b;
  if (bins[best] / total < cfg.tau) return std::nullopt;
  return kBinToDir[best];
}

std::size_t IntraSideInfo::bit_cost() const {
  std::size_t bits = 0;
  for (const auto& mb : blocks) {
    bits += 1;
    if (!mb.split) {
      bits += 2;
      continue;
    }
    for (const auto& sub : mb.sub) bits += 1 + (sub.split ? 8 : 2);
  }
  return bits;
}

namespace {

MacroblockPartition partition_macroblock(const GradientField& g, int r0, int c0,
                                         const IntraConfig& cfg) {
  MacroblockPartition mb;
  bool flat = false;
  if (auto dir = dominant_direction(g, r0, c0, kMacroblockSize, cfg, &flat)) {
    mb.dir = *dir;
    return mb;
  }
  if (flat) return mb;  // flat-block rule: horizontal without splitting
  mb.split = true;
  for (int i = 0; i < 4; ++i) {
    auto& sub = mb.sub[i];
    const int r8 = r0 + (i / 2) * 8, c8 = c0 + (i % 2) * 8;
    if (auto dir = dominant_direction(g, r8, c8, 8, cfg, &flat)) {
      sub.dir = *dir;
      continue;
    }
    if (flat) continue;  // horizontal leaf
    sub.split = true;
    for (int j = 0; j < 4; ++j) {
      const int r4 = r8 + (j / 2) * kMinLeafSize, c4 = c8 + (j % 2) * kMinLeafSize;
      // At the minimum size horizontal is the default when still ambiguous.
      sub.leaf[j] = dominant_direction(g, r4, c4, kMinLeafSize, cfg)
                        .value_or(Direction::Horizontal);
    }
  }
  return mb;
}

}  // namespace

std::pair<ResidualImage, IntraSideInfo> intra_predict(const RangeImage& image,
                                                      const IntraConfig& cfg) {
  const GradientField g = pixel_gradients(image);

  IntraSideInfo side;
  side.mb_rows = (image.rows + kMacroblockSize - 1) / kMacroblockSize;
  side.mb_cols = (image.cols + kMacroblockSize - 1) / kMacroblockSize;
  side.blocks.reserve(static_cast<std::size_t>(side.mb_rows) * side.mb_cols);

  ResidualImage residual(image.rows, image.cols);
  residual.mask = image.mask;
  residual.mode = PredictionMode::Intra;

  for (int mr = 0; mr < side.mb_rows; ++mr) {
    for (int mc = 0; mc < side.mb_cols; ++mc) {
      const int r0 = mr * kMacroblockSize, c0 = mc * kMacroblockSize;
      MacroblockPartition mb = partition_macroblock(g, r0, c0, cfg);
      for_each_leaf(mb, r0, c0, [&](int lr, int lc, int size, Direction dir) {
        const ScanGeom step = scan_geom(dir);
        for_each_scan_line(lr, lc, size, dir, [&](int sr, int sc) {
          bool have_prev = false;
          double prev = 0.0;
          for (int r = sr, c = sc;
               r >= lr && r < lr + size && c >= lc && c < lc + size;
               r += step.dr, c += step.dc) {
            if (r >= image.rows || c >= image.cols || !image.masked(r, c)) continue;
            const double x = image.at(r, c);
            residual.at(r, c) = have_prev ? x - prev : x;
            prev = x;
            have_prev = true;
          }
        });
      });
      side.blocks.push_back(mb);
    }
  }
  return {std::move(residual), std::move(side)};
}

RangeImage intra_reconstruct(const ResidualImage& residual, const IntraSideInfo& side,
                             const ProjectionParams& params) {
  const int want_rows = (residual.rows + kMacroblockSize - 1) / kMacroblockSize;
  const int want_cols = (residual.cols + kMacroblockSize - 1) / kMacroblockSize;
  if (side.mb_rows != want_rows || side.mb_cols != want_cols ||
      side.blocks.size() != static_cast<std::size_t>(want_rows) * want_cols)
    throw std::invalid_argument("intra side info does not tile the residual");

  RangeImage image(params);
  if (image.rows != residual.rows || image.cols != residual.cols)
    throw std::invalid_argument("projection params do not match residual dimensions");
  image.mask = residual.mask;

  for (int mr = 0; mr < side.mb_rows; ++mr) {
    for (int mc = 0; mc < side.mb_cols; ++mc) {
      const int r0 = mr * kMacroblockSize, c0 = mc * kMacroblockSize;
      const MacroblockPartition& mb = side.blocks[static_cast<std::size_t>(mr) * side.mb_cols + mc];
      for_each_leaf(mb, r0, c0, [&](int lr, int lc, int size, Direction dir) {
        const ScanGeom step = scan_geom(dir);
        for_each_scan_line(lr, lc, size, dir, [&](int sr, int sc) {
          bool have_prev = false;
          float prev = 0.0f;
          for (int r = sr, c = sc;
               r >= lr && r < lr + size && c >= lc && c < lc + size;
               r += step.dr, c += step.dc) {
            if (r >= image.rows || c >= image.cols || !residual.masked(r, c)) continue;
            // Rounding to float32 each step keeps the lossless round trip
            // exact: the stored residual is the exact double difference of
            // two float32 values.
            const float x = static_cast<float>((have_prev ? static_cast<double>(prev) : 0.0) +
                                               residual.at(r, c));
            image.at(r, c) = x;
            prev = x;
            have_prev = true;
          }
        });
      });
    }
  }
  return image;
}

RangeImage project_with_pose(const PointCloud& prev_recon, const Pose& pose,
                             const ProjectionParams& params) {
  PointCloud moved;
  moved.points.reserve(prev_recon.size());
  for (const Point3& p : prev_recon.points) moved.points.push_back(pose.apply(p));
  return project(moved, params);
}

ResidualImage inter_residual(const RangeImage& cur, const RangeImage& predicted) {
  ResidualImage residual(cur.rows, cur.cols);
  residual.mask = cur.mask;
  residual.mode = PredictionMode::Inter;
  for (int r = 0; r < cur.rows; ++r) {
    for (int c = 0; c < cur.cols; ++c) {
      if (!cur.masked(r, c)) continue;
      const double x = cur.at(r, c);
      residual.at(r, c) = predicted.masked(r, c) ? x - static_cast<double>(predicted.at(r, c)) : x;
    }
  }
  return residual;
}

double mean_abs_comasked(const RangeImage& cur, const RangeImage& predicted) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < cur.values.size(); ++i) {
    if (cur.mask[i] && predicted.mask[i]) {
      sum += std::abs(static_cast<double>(cur.values[i]) - predicted.values[i]);
      ++n;
    }
  }
  if (n == 0) return std::numeric_limits<double>::infinity();
  return sum / static_cast<double>(n);
}

ResidualImage inter_predict(const PointCloud& prev_recon, const Pose& pose,
                            const ProjectionParams& params, const RangeImage& cur) {
  return inter_residual(cur, project_with_pose(prev_recon, pose, params));
}

}  // namespace dcmp
