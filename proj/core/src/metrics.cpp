// SPDX-License-Identifier: Apache-2.0
#include "dcmp/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcmp {

double mse(const RangeImage& original, const RangeImage& reconstructed) {
  if (original.rows != reconstructed.rows || original.cols != reconstructed.cols)
    throw std::invalid_argument("mse: image dimensions differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < original.values.size(); ++i) {
    if (!original.mask[i] || !reconstructed.mask[i]) continue;
    const double d = static_cast<double>(original.values[i]) - reconstructed.values[i];
    sum += d * d;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double psnr(const RangeImage& original, const RangeImage& reconstructed) {
  const double m = mse(original, reconstructed);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  const double dm = original.params.range_max;
  return 10.0 * std::log10(dm * dm / m);
}

double bitrate_error(const std::vector<double>& targets, const std::vector<double>& reals) {
  if (targets.size() != reals.size())
    throw std::invalid_argument("bitrate_error: length mismatch");
  if (targets.empty()) throw std::invalid_argument("bitrate_error: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0)) throw std::invalid_argument("bitrate_error: target must be > 0");
    sum += std::abs(reals[i] - targets[i]) / targets[i];
  }
  return sum / static_cast<double>(targets.size());
}

double peak_bitrate_error(const std::vector<double>& targets, const std::vector<double>& reals) {
  if (targets.size() != reals.size())
    throw std::invalid_argument("bitrate_error: length mismatch");
  if (targets.empty()) throw std::invalid_argument("bitrate_error: empty input");
  double peak = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0)) throw std::invalid_argument("bitrate_error: target must be > 0");
    peak = std::max(peak, std::abs(reals[i] - targets[i]) / targets[i]);
  }
  return peak;
}

}  // namespace dcmp
