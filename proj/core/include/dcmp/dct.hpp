// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>

#include "dcmp/adwt.hpp"

namespace dcmp {

/// 8x8 orthonormal type-II DCT applied to every 8x8 sub-block of a 64x64
/// tile (ablation baseline). Coefficients are stored plane-major: plane
/// p = 8u + v holds coefficient (u, v) of all 64 sub-blocks, raster order
/// of the sub-block grid.
struct DctTile {
  std::array<double, kBlockPixels> coeff{};
};

DctTile forward_dct8(std::span<const double, kBlockPixels> block);
void inverse_dct8(const DctTile& tile, std::span<double, kBlockPixels> block);

}  // namespace dcmp
