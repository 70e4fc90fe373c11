// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "dcmp/geometry.hpp"
#include "dcmp/projection.hpp"

namespace dcmp {

inline constexpr int kMacroblockSize = 16;
inline constexpr int kMinLeafSize = 4;

/// Delta-coding scan direction of a quadtree leaf. The scan runs along the
/// axis of pixel similarity, orthogonal to the block's dominant gradient.
enum class Direction : std::uint8_t {
  Horizontal = 0,    // along columns, constant row
  Vertical = 1,      // along rows, constant column
  DiagonalDown = 2,  // along (+row, +col)
  DiagonalUp = 3,    // along (-row, +col)
};

/// Per-pixel range gradients (d/drow, d/dcol). Central differences where
/// both neighbors are masked, one-sided at image borders, zero where any
/// needed neighbor is unmasked.
struct GradientField {
  int rows = 0, cols = 0;
  std::vector<double> du;  // d/drow
  std::vector<double> dv;  // d/dcol

  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
};

GradientField pixel_gradients(const RangeImage& image);

struct IntraConfig {
  double tau = 0.6;     // dominant-bin magnitude share threshold
  double g_min = 0.05;  // gradient magnitude floor, m/pixel
};

/// Dominant delta direction of a size x size block of gradients, or nullopt
/// when no orientation bin reaches the tau share. flat_out reports whether
/// no pixel exceeded g_min at all (caller then applies the flat-block rule).
std::optional<Direction> dominant_direction(const GradientField& g, int row0, int col0,
                                            int size, const IntraConfig& cfg,
                                            bool* flat_out = nullptr);

/// Fixed-depth quadtree per 16x16 macroblock: an unsplit macroblock is one
/// directional leaf; a split one holds four 8x8 nodes, each either a leaf
/// or four direction-coded 4x4 leaves.
struct MacroblockPartition {
  struct Sub {
    bool split = false;
    Direction dir = Direction::Horizontal;  // when !split
    std::array<Direction, 4> leaf{};        // when split, raster order
  };
  bool split = false;
  Direction dir = Direction::Horizontal;  // when !split
  std::array<Sub, 4> sub{};               // when split, raster order
};

struct IntraSideInfo {
  int mb_rows = 0, mb_cols = 0;
  std::vector<MacroblockPartition> blocks;  // raster order

  /// Serialized size in bits (split flags + 2-bit leaf directions).
  std::size_t bit_cost() const;
};

/// Gradient-directed delta coding. The image is tiled into 16x16
/// macroblocks (short border blocks are handled as if padded with unmasked
/// pixels); each quadtree leaf is delta-coded along its direction with the
/// first masked pixel of every scan line kept verbatim. Exactly invertible
/// through intra_reconstruct.
std::pair<ResidualImage, IntraSideInfo> intra_predict(const RangeImage& image,
                                                      const IntraConfig& cfg = {});

/// Prefix sums along each leaf's scan lines; exact inverse of intra_predict
/// when the residual is unmodified. Throws std::invalid_argument when the
/// side info's macroblock grid does not tile the residual.
RangeImage intra_reconstruct(const ResidualImage& residual, const IntraSideInfo& side,
                             const ProjectionParams& params);

/// Previous reconstruction carried into the current frame: apply the pose
/// to every point, then project.
RangeImage project_with_pose(const PointCloud& prev_recon, const Pose& pose,
                             const ProjectionParams& params);

/// Residual of cur against a predicted image. Co-masked pixels carry
/// cur - predicted, pixels masked only in cur carry their raw value (no
/// reference), unmasked pixels are zero.
ResidualImage inter_residual(const RangeImage& cur, const RangeImage& predicted);

/// Mean absolute difference over co-masked pixels; +inf when none exist.
double mean_abs_comasked(const RangeImage& cur, const RangeImage& predicted);

/// inter_residual(cur, project_with_pose(prev_recon, pose)).
ResidualImage inter_predict(const PointCloud& prev_recon, const Pose& pose,
                            const ProjectionParams& params, const RangeImage& cur);

}  // namespace dcmp
