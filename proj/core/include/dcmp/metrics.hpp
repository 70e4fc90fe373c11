// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "dcmp/geometry.hpp"

namespace dcmp {

/// Mean squared range difference over co-masked pixels (0 when none).
double mse(const RangeImage& original, const RangeImage& reconstructed);

/// 10 log10(d_m^2 / MSE), d_m the peak range of the input clouds
/// (original.params.range_max). +inf for identical images.
double psnr(const RangeImage& original, const RangeImage& reconstructed);

/// e_R = (1/N) sum |R_real - R_target| / R_target. Throws
/// std::invalid_argument on length mismatch or non-positive targets.
double bitrate_error(const std::vector<double>& targets, const std::vector<double>& reals);

/// max over frames of the per-frame bitrate error.
double peak_bitrate_error(const std::vector<double>& targets, const std::vector<double>& reals);

}  // namespace dcmp
