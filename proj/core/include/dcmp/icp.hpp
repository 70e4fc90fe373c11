// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "dcmp/geometry.hpp"
#include "dcmp/projection.hpp"

namespace dcmp {

struct IcpConfig {
  double kappa = 0.5;            // horizontal depth-discontinuity threshold, meters
  int max_iterations = 20;
  double rel_improvement = 1e-6; // convergence threshold on mean residual
  double trim_ratio = 0.8;       // correspondences kept per iteration
  int min_matches = 30;
};

enum class PoseFailure { None, FewKeypoints, NonConvergent };

/// Keypoints are range-image pixels whose range differs from a masked
/// horizontal neighbor by more than kappa, back-projected to 3-D.
PointCloud extract_keypoints(const PointCloud& cloud, const ProjectionParams& params,
                             double kappa);

/// Trimmed point-to-point ICP over depth-discontinuity keypoints:
/// nearest-neighbor matching, best-80% trimming, closed-form rotation from
/// the cross-covariance factorization, translation from centroids. Returns
/// nullopt on FewKeypoints or NonConvergent; the caller falls back to
/// intra coding.
std::optional<Pose> estimate_pose(const PointCloud& prev, const PointCloud& cur,
                                  const ProjectionParams& params,
                                  const IcpConfig& cfg = {},
                                  PoseFailure* failure = nullptr);

}  // namespace dcmp
