// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace dcmp {

// 64x64 residual tiles, 3-level orthonormal Haar decomposition.
inline constexpr int kBlockSize = 64;
inline constexpr int kBlockPixels = kBlockSize * kBlockSize;
inline constexpr int kDwtLevels = 3;

// Quantization step bounds; steps travel as 16-bit log-scale codes.
inline constexpr double kQuantStepMin = 0.001;
inline constexpr double kQuantStepMax = 32.0;

/// Subband identifiers in serialization order.
enum Subband : int {
  kLL3 = 0,
  kHL3 = 1,
  kLH3 = 2,
  kHH3 = 3,
  kHL2 = 4,
  kLH2 = 5,
  kHH2 = 6,
  kHL1 = 7,
  kLH1 = 8,
  kHH1 = 9,
};
inline constexpr int kSubbandCount = 10;

/// Side length of a subband grid (8 at level 3, 16 at level 2, 32 at level 1).
int subband_size(int sb);
/// Decomposition level of a subband (3, 2 or 1).
int subband_level(int sb);

/// Placement of a subband inside the 64x64 Mallat layout.
struct SubbandRect {
  int row0, col0, size;
};
SubbandRect subband_rect(int sb);

/// 3-level Haar coefficients of one 64x64 block, Mallat layout:
/// LL3 in rows [0,8) x cols [0,8), HL^k top-right, LH^k bottom-left,
/// HH^k bottom-right of the level-k quadrant split.
struct SubbandPyramid {
  std::array<double, kBlockPixels> coeff{};

  double at(int r, int c) const { return coeff[static_cast<std::size_t>(r) * kBlockSize + c]; }
  double& at(int r, int c) { return coeff[static_cast<std::size_t>(r) * kBlockSize + c]; }
};

struct QuantizedPyramid {
  std::array<std::int32_t, kBlockPixels> index{};
};

/// Per-subband energies E_sub^(k) = sum of squared coefficients.
struct SubbandEnergies {
  std::array<double, kSubbandCount> e{};

  double level_sum(int level) const;  // E_sum^(k); equals E_LL^(k-1)
};

/// Per-subband quantization steps. base equals the externally supplied
/// q_LL^(3); the other nine are derived from the subband energies.
struct QuantMap {
  std::array<double, kSubbandCount> q{};
  double adwt_alpha = 0.53;
};

/// Orthonormal Haar analysis applied three times to the running LL band.
/// Energy-preserving; exact inverse of inverse_dwt3.
SubbandPyramid forward_dwt3(std::span<const double, kBlockPixels> block);
void inverse_dwt3(const SubbandPyramid& pyramid, std::span<double, kBlockPixels> block);

SubbandEnergies subband_energies(const SubbandPyramid& pyramid);

/// Energy-adaptive step assignment, level 3 down to level 1:
///   q_HH = alpha * log2(E_LL/E_HH + 1) * q_LL
///   q_HL, q_LH = energy-weighted blend of q_LL and q_HH
///   next level's q_LL = energy-weighted mean of the four steps above it.
/// Derived steps are clamped to [kQuantStepMin, kQuantStepMax]; the base
/// step is stored as supplied.
QuantMap assign_quant_steps(const SubbandEnergies& energies, double q_ll3,
                            double adwt_alpha = 0.53);

/// Uniform step map (plain-DWT ablation variant).
QuantMap uniform_quant_map(double q);

/// index = round(c / q), half away from zero.
QuantizedPyramid quantize(const SubbandPyramid& pyramid, const QuantMap& qmap);
/// c_hat = index * q; reconstruction error <= q/2 per coefficient.
SubbandPyramid dequantize(const QuantizedPyramid& indices, const QuantMap& qmap);

/// 16-bit log-scale step codes: step = kQuantStepMin * 2^(code / 2048).
std::uint16_t quant_step_to_code(double step);
double quant_step_from_code(std::uint16_t code);

}  // namespace dcmp
