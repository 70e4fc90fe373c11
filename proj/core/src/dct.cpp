// SPDX-License-Identifier: Apache-2.0
#include "dcmp/dct.hpp"

#include <cmath>
#include <numbers>

namespace dcmp {
namespace {

struct DctBasis {
  double c[8][8];  // c[k][n] = s(k) cos(pi (2n+1) k / 16)

  DctBasis() {
    for (int k = 0; k < 8; ++k) {
      const double s = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n)
        c[k][n] = s * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

// y = C x C^T over one 8x8 sub-block (or the transpose pair for inverse).
void dct2d(const double in[8][8], double out[8][8], bool inverse) {
  const auto& b = basis();
  double tmp[8][8];
  for (int u = 0; u < 8; ++u)
    for (int n = 0; n < 8; ++n) {
      double s = 0.0;
      for (int m = 0; m < 8; ++m) s += (inverse ? b.c[m][u] : b.c[u][m]) * in[m][n];
      tmp[u][n] = s;
    }
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int n = 0; n < 8; ++n) s += tmp[u][n] * (inverse ? b.c[n][v] : b.c[v][n]);
      out[u][v] = s;
    }
}

}  // namespace

DctTile forward_dct8(std::span<const double, kBlockPixels> block) {
  DctTile tile;
  for (int br = 0; br < 8; ++br) {
    for (int bc = 0; bc < 8; ++bc) {
      double in[8][8], out[8][8];
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          in[r][c] = block[static_cast<std::size_t>(br * 8 + r) * kBlockSize + bc * 8 + c];
      dct2d(in, out, false);
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v)
          tile.coeff[static_cast<std::size_t>(u * 8 + v) * 64 + br * 8 + bc] = out[u][v];
    }
  }
  return tile;
}

void inverse_dct8(const DctTile& tile, std::span<double, kBlockPixels> block) {
  for (int br = 0; br < 8; ++br) {
    for (int bc = 0; bc < 8; ++bc) {
      double in[8][8], out[8][8];
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v)
          in[u][v] = tile.coeff[static_cast<std::size_t>(u * 8 + v) * 64 + br * 8 + bc];
      dct2d(in, out, true);
      for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c)
          block[static_cast<std::size_t>(br * 8 + r) * kBlockSize + bc * 8 + c] = out[r][c];
    }
  }
}

}  // namespace dcmp
