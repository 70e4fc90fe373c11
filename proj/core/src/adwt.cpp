// SPDX-License-Identifier: Apache-2.0
#include "dcmp/adwt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dcmp {
namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

// One orthonormal Haar split of the leading n values of a length-64 line:
// lows to [0, n/2), highs to [n/2, n).
void haar_split(double* line, int n) {
  double tmp[kBlockSize];
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    const double a = line[2 * i], b = line[2 * i + 1];
    tmp[i] = (a + b) * kInvSqrt2;
    tmp[half + i] = (a - b) * kInvSqrt2;
  }
  std::copy(tmp, tmp + n, line);
}

void haar_merge(double* line, int n) {
  double tmp[kBlockSize];
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    const double lo = line[i], hi = line[half + i];
    tmp[2 * i] = (lo + hi) * kInvSqrt2;
    tmp[2 * i + 1] = (lo - hi) * kInvSqrt2;
  }
  std::copy(tmp, tmp + n, line);
}

void transpose_region(double* m, int n) {
  for (int r = 0; r < n; ++r)
    for (int c = r + 1; c < n; ++c)
      std::swap(m[r * kBlockSize + c], m[c * kBlockSize + r]);
}

double clamp_step(double q) { return std::clamp(q, kQuantStepMin, kQuantStepMax); }

// Steps for the three high bands of one level given the level's four
// energies and its base (LL) step.
void assign_level(double e_ll, double e_hl, double e_lh, double e_hh, double q_ll,
                  double alpha, double& q_hl, double& q_lh, double& q_hh) {
  if (e_hh <= 0.0) {
    q_hh = clamp_step(q_ll);  // nothing to code, but the step must stay finite
  } else {
    double ll = e_ll;
    if (ll <= 0.0)
      ll = std::numeric_limits<double>::epsilon() * (e_ll + e_hl + e_lh + e_hh);
    q_hh = clamp_step(alpha * std::log2(ll / e_hh + 1.0) * q_ll);
  }
  const double e_mix = e_hl + e_lh;
  if (e_mix <= 0.0) {
    q_hl = q_lh = clamp_step(0.5 * (q_ll + q_hh));
    return;
  }
  const double w_hl = e_hl / e_mix;
  const double w_lh = e_lh / e_mix;
  q_hl = clamp_step(w_hl * q_ll + (1.0 - w_hl) * q_hh);
  q_lh = clamp_step(w_lh * q_ll + (1.0 - w_lh) * q_hh);
}

// Energy-weighted mean of the four level-k steps; uniform weights when the
// level carries no energy.
double next_base(double e_ll, double e_hl, double e_lh, double e_hh, double q_ll,
                 double q_hl, double q_lh, double q_hh) {
  const double e_sum = e_ll + e_hl + e_lh + e_hh;
  if (e_sum <= 0.0) return clamp_step(0.25 * (q_ll + q_hl + q_lh + q_hh));
  return clamp_step((q_ll * e_ll + q_hl * e_hl + q_lh * e_lh + q_hh * e_hh) / e_sum);
}

}  // namespace

int subband_size(int sb) {
  switch (sb) {
    case kLL3: case kHL3: case kLH3: case kHH3: return 8;
    case kHL2: case kLH2: case kHH2: return 16;
    default: return 32;
  }
}

int subband_level(int sb) {
  if (sb <= kHH3) return 3;
  if (sb <= kHH2) return 2;
  return 1;
}

SubbandRect subband_rect(int sb) {
  const int s = subband_size(sb);
  switch (sb) {
    case kLL3: return {0, 0, s};
    case kHL3: case kHL2: case kHL1: return {0, s, s};
    case kLH3: case kLH2: case kLH1: return {s, 0, s};
    default: return {s, s, s};
  }
}

SubbandPyramid forward_dwt3(std::span<const double, kBlockPixels> block) {
  SubbandPyramid p;
  std::copy(block.begin(), block.end(), p.coeff.begin());
  int n = kBlockSize;
  for (int level = 0; level < kDwtLevels; ++level) {
    for (int r = 0; r < n; ++r) haar_split(p.coeff.data() + r * kBlockSize, n);
    transpose_region(p.coeff.data(), n);
    for (int r = 0; r < n; ++r) haar_split(p.coeff.data() + r * kBlockSize, n);
    transpose_region(p.coeff.data(), n);
    n /= 2;
  }
  return p;
}

void inverse_dwt3(const SubbandPyramid& pyramid, std::span<double, kBlockPixels> block) {
  SubbandPyramid p = pyramid;
  int n = kBlockSize >> (kDwtLevels - 1);
  for (int level = 0; level < kDwtLevels; ++level) {
    transpose_region(p.coeff.data(), n);
    for (int r = 0; r < n; ++r) haar_merge(p.coeff.data() + r * kBlockSize, n);
    transpose_region(p.coeff.data(), n);
    for (int r = 0; r < n; ++r) haar_merge(p.coeff.data() + r * kBlockSize, n);
    n *= 2;
  }
  std::copy(p.coeff.begin(), p.coeff.end(), block.begin());
}

SubbandEnergies subband_energies(const SubbandPyramid& pyramid) {
  SubbandEnergies out;
  for (int sb = 0; sb < kSubbandCount; ++sb) {
    const SubbandRect rect = subband_rect(sb);
    double sum = 0.0;
    for (int r = rect.row0; r < rect.row0 + rect.size; ++r)
      for (int c = rect.col0; c < rect.col0 + rect.size; ++c) {
        const double v = pyramid.at(r, c);
        sum += v * v;
      }
    out.e[sb] = sum;
  }
  return out;
}

double SubbandEnergies::level_sum(int level) const {
  switch (level) {
    case 3: return e[kLL3] + e[kHL3] + e[kLH3] + e[kHH3];
    case 2: return level_sum(3) + e[kHL2] + e[kLH2] + e[kHH2];
    case 1: return level_sum(2) + e[kHL1] + e[kLH1] + e[kHH1];
    default: throw std::invalid_argument("level must be 1..3");
  }
}

QuantMap assign_quant_steps(const SubbandEnergies& en, double q_ll3, double adwt_alpha) {
  if (!(q_ll3 > 0.0)) throw std::invalid_argument("q_ll3 must be > 0");
  if (!(adwt_alpha > 0.0)) throw std::invalid_argument("adwt_alpha must be > 0");

  QuantMap qm;
  qm.adwt_alpha = adwt_alpha;
  qm.q[kLL3] = q_ll3;
  assign_level(en.e[kLL3], en.e[kHL3], en.e[kLH3], en.e[kHH3], q_ll3, adwt_alpha,
               qm.q[kHL3], qm.q[kLH3], qm.q[kHH3]);

  // E_LL at level 2 equals the total level-3 energy.
  const double e_ll2 = en.level_sum(3);
  const double q_ll2 = next_base(en.e[kLL3], en.e[kHL3], en.e[kLH3], en.e[kHH3],
                                 q_ll3, qm.q[kHL3], qm.q[kLH3], qm.q[kHH3]);
  assign_level(e_ll2, en.e[kHL2], en.e[kLH2], en.e[kHH2], q_ll2, adwt_alpha,
               qm.q[kHL2], qm.q[kLH2], qm.q[kHH2]);

  const double e_ll1 = en.level_sum(2);
  const double q_ll1 = next_base(e_ll2, en.e[kHL2], en.e[kLH2], en.e[kHH2],
                                 q_ll2, qm.q[kHL2], qm.q[kLH2], qm.q[kHH2]);
  assign_level(e_ll1, en.e[kHL1], en.e[kLH1], en.e[kHH1], q_ll1, adwt_alpha,
               qm.q[kHL1], qm.q[kLH1], qm.q[kHH1]);
  return qm;
}

QuantMap uniform_quant_map(double q) {
  QuantMap qm;
  qm.q.fill(q);
  return qm;
}

QuantizedPyramid quantize(const SubbandPyramid& pyramid, const QuantMap& qmap) {
  QuantizedPyramid out;
  for (int sb = 0; sb < kSubbandCount; ++sb) {
    const SubbandRect rect = subband_rect(sb);
    const double q = qmap.q[sb];
    for (int r = rect.row0; r < rect.row0 + rect.size; ++r)
      for (int c = rect.col0; c < rect.col0 + rect.size; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * kBlockSize + c;
        out.index[i] = static_cast<std::int32_t>(std::llround(pyramid.coeff[i] / q));
      }
  }
  return out;
}

SubbandPyramid dequantize(const QuantizedPyramid& indices, const QuantMap& qmap) {
  SubbandPyramid out;
  for (int sb = 0; sb < kSubbandCount; ++sb) {
    const SubbandRect rect = subband_rect(sb);
    const double q = qmap.q[sb];
    for (int r = rect.row0; r < rect.row0 + rect.size; ++r)
      for (int c = rect.col0; c < rect.col0 + rect.size; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * kBlockSize + c;
        out.coeff[i] = indices.index[i] * q;
      }
  }
  return out;
}

std::uint16_t quant_step_to_code(double step) {
  step = clamp_step(step);
  const double code = 2048.0 * std::log2(step / kQuantStepMin);
  const long c = std::lround(code);
  return static_cast<std::uint16_t>(std::clamp(c, 0L, 65535L));
}

double quant_step_from_code(std::uint16_t code) {
  return clamp_step(kQuantStepMin * std::exp2(code / 2048.0));
}

}  // namespace dcmp
