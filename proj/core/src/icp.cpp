// SPDX-License-Identifier: Apache-2.0
#include "dcmp/icp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace dcmp {
namespace {

// Minimal 3-D kd-tree for nearest-neighbor queries over keypoints.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Eigen::Vector3d>& pts) : pts_(pts) {
    index_.resize(pts.size());
    std::iota(index_.begin(), index_.end(), 0u);
    if (!pts.empty()) root_ = build(0, pts_.size(), 0);
  }

  // Returns (index, squared distance) of the nearest point.
  std::pair<std::size_t, double> nearest(const Eigen::Vector3d& q) const {
    best_ = std::numeric_limits<double>::infinity();
    best_idx_ = 0;
    search(root_, q, 0);
    return {best_idx_, best_};
  }

 private:
  static constexpr int kNil = -1;

  struct Node {
    std::size_t point;
    int left = kNil, right = kNil;
  };

  int build(std::size_t lo, std::size_t hi, int axis) {
    if (lo >= hi) return kNil;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                     [&](std::size_t a, std::size_t b) { return pts_[a][axis] < pts_[b][axis]; });
    Node n;
    n.point = index_[mid];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    nodes_[self].left = build(lo, mid, (axis + 1) % 3);
    nodes_[self].right = build(mid + 1, hi, (axis + 1) % 3);
    return self;
  }

  void search(int node, const Eigen::Vector3d& q, int axis) const {
    if (node == kNil) return;
    const Node& n = nodes_[node];
    const Eigen::Vector3d& p = pts_[n.point];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_) {
      best_ = d2;
      best_idx_ = n.point;
    }
    const double delta = q[axis] - p[axis];
    const int near = delta < 0 ? n.left : n.right;
    const int far = delta < 0 ? n.right : n.left;
    search(near, q, (axis + 1) % 3);
    if (delta * delta < best_) search(far, q, (axis + 1) % 3);
  }

  const std::vector<Eigen::Vector3d>& pts_;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
  int root_ = kNil;
  mutable double best_ = 0.0;
  mutable std::size_t best_idx_ = 0;
};

// Closed-form least-squares rigid alignment of src onto dst via SVD of the
// cross-covariance; rotation projected to det +1.
Pose kabsch(const std::vector<Eigen::Vector3d>& src, const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (const auto& p : src) cs += p;
  for (const auto& p : dst) cd += p;
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) h += (src[i] - cs) * (dst[i] - cd).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  Pose pose;
  pose.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  pose.translation = cd - pose.rotation * cs;
  return pose;
}

}  // namespace

PointCloud extract_keypoints(const PointCloud& cloud, const ProjectionParams& params,
                             double kappa) {
  std::vector<std::int32_t> winners;
  const RangeImage img = project(cloud, params, nullptr, &winners);
  PointCloud keypoints;
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      if (!img.masked(r, c)) continue;
      // Occluder side only: the far side of a jump is an occlusion shadow
      // that moves with the sensor, which would anchor ICP to zero motion.
      bool edge = false;
      if (c > 0 && img.masked(r, c - 1) &&
          static_cast<double>(img.at(r, c - 1)) - img.at(r, c) > kappa)
        edge = true;
      if (!edge && c + 1 < img.cols && img.masked(r, c + 1) &&
          static_cast<double>(img.at(r, c + 1)) - img.at(r, c) > kappa)
        edge = true;
      if (!edge) continue;
      // the pixel's surviving source point, free of bin quantization
      keypoints.points.push_back(cloud.points[winners[img.idx(r, c)]]);
    }
  }
  return keypoints;
}

std::optional<Pose> estimate_pose(const PointCloud& prev, const PointCloud& cur,
                                  const ProjectionParams& params, const IcpConfig& cfg,
                                  PoseFailure* failure) {
  auto fail = [&](PoseFailure f) -> std::optional<Pose> {
    if (failure) *failure = f;
    return std::nullopt;
  };
  if (failure) *failure = PoseFailure::None;
  if (prev.empty() || cur.empty()) return fail(PoseFailure::FewKeypoints);

  const PointCloud kp_prev = extract_keypoints(prev, params, cfg.kappa);
  const PointCloud kp_cur = extract_keypoints(cur, params, cfg.kappa);
  if (static_cast<int>(kp_prev.size()) < cfg.min_matches ||
      static_cast<int>(kp_cur.size()) < cfg.min_matches)
    return fail(PoseFailure::FewKeypoints);

  std::vector<Eigen::Vector3d> target(kp_cur.size());
  for (std::size_t i = 0; i < kp_cur.size(); ++i) target[i] = kp_cur.points[i].vec();
  const KdTree3 tree(target);

  std::vector<Eigen::Vector3d> source(kp_prev.size());
  for (std::size_t i = 0; i < kp_prev.size(); ++i) source[i] = kp_prev.points[i].vec();

  Pose pose;
  double last_mean = std::numeric_limits<double>::infinity();
  double best_mean = std::numeric_limits<double>::infinity();
  int worse_streak = 0;

  struct Match {
    std::size_t src, dst;
    double d2;
  };
  std::vector<Match> matches;
  matches.reserve(source.size());

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    matches.clear();
    for (std::size_t i = 0; i < source.size(); ++i) {
      const Eigen::Vector3d moved = pose.rotation * source[i] + pose.translation;
      const auto [j, d2] = tree.nearest(moved);
      matches.push_back({i, j, d2});
    }
    // Trim to the best correspondences by distance.
    const std::size_t keep =
        std::max<std::size_t>(1, static_cast<std::size_t>(cfg.trim_ratio * matches.size()));
    std::nth_element(matches.begin(), matches.begin() + keep - 1, matches.end(),
                     [](const Match& a, const Match& b) { return a.d2 < b.d2; });
    matches.resize(keep);
    if (static_cast<int>(keep) < cfg.min_matches) return fail(PoseFailure::FewKeypoints);

    double mean = 0.0;
    for (const Match& m : matches) mean += std::sqrt(m.d2);
    mean /= static_cast<double>(matches.size());

    if (iter > 0) {
      // divergence: the residual keeps growing well past the best seen
      if (mean > 1.5 * best_mean + 1e-12) {
        if (++worse_streak >= 3) return fail(PoseFailure::NonConvergent);
      } else {
        worse_streak = 0;
      }
      if (std::abs(last_mean - mean) < cfg.rel_improvement * std::max(last_mean, 1e-12))
        break;
    }
    last_mean = mean;
    best_mean = std::min(best_mean, mean);

    std::vector<Eigen::Vector3d> src, dst;
    src.reserve(keep);
    dst.reserve(keep);
    for (const Match& m : matches) {
      src.push_back(source[m.src]);
      dst.push_back(target[m.dst]);
    }
    pose = kabsch(src, dst);  // re-solved from scratch; rotation stays exact
  }

  if (!pose.is_rigid()) return fail(PoseFailure::NonConvergent);
  return pose;
}

}  // namespace dcmp
