// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dcmp/geometry.hpp"

namespace dcmp::test {

// Deterministic RNG for reproducible test inputs.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ull) { next(); }

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double normal(double sigma = 1.0) {
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * uniform());
  }
};

inline ProjectionParams small_params(int rows = 64, int cols = 256) {
  ProjectionParams p;
  p.rows = rows;
  p.cols = cols;
  return p;
}

// Random occupancy and ranges; values stay well inside (0, range_max] so
// float32 deltas are exact in double.
inline RangeImage random_range_image(Rng& rng, const ProjectionParams& params,
                                     double fill_prob = 0.9, double lo = 0.5,
                                     double hi = 0.0) {
  if (hi <= 0.0) hi = params.range_max;
  RangeImage img(params);
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c)
      if (rng.uniform() < fill_prob)
        img.set(r, c, static_cast<float>(rng.uniform(lo, hi)));
  return img;
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, double lo = 2.0, double hi = 80.0) {
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double range = rng.uniform(lo, hi);
    const double az = rng.uniform(-3.1415926, 3.1415926);
    const double el = rng.uniform(deg_to_rad(-24.0), deg_to_rad(1.8));
    cloud.points.emplace_back(range * std::cos(el) * std::cos(az),
                              range * std::cos(el) * std::sin(az), range * std::sin(el));
  }
  return cloud;
}

}  // namespace dcmp::test
