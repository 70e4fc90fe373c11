// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

namespace dcmp {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  float intensity = 0.0f;  // carried through, never compressed

  Point3() = default;
  Point3(double x_, double y_, double z_, float i_ = 0.0f)
      : x(x_), y(y_), z(z_), intensity(i_) {}

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Eigen::Vector3d vec() const { return {x, y, z}; }
};

struct PointCloud {
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void clear() { points.clear(); }
  auto begin() const { return points.begin(); }
  auto end() const { return points.end(); }
};

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Spherical projection geometry. Rows map to elevation bins (row 0 at
/// elevation_max), columns to azimuth bins covering [-pi, pi). Rows are
/// uniformly spaced unless a per-row elevation table is supplied
/// (strictly decreasing, one entry per row).
struct ProjectionParams {
  int rows = 64;
  int cols = 2048;
  double elevation_min = deg_to_rad(-24.8);
  double elevation_max = deg_to_rad(2.0);
  double range_max = 120.0;                 // d_m, peak range in meters
  std::vector<double> row_elevations;       // optional calibration table

  void validate() const {
    if (rows < 1 || cols < 1)
      throw std::invalid_argument("projection: rows/cols must be >= 1");
    if (!(elevation_min < elevation_max))
      throw std::invalid_argument("projection: elevation_min < elevation_max required");
    if (!(range_max > 0.0))
      throw std::invalid_argument("projection: range_max must be > 0");
    if (!row_elevations.empty()) {
      if (static_cast<int>(row_elevations.size()) != rows)
        throw std::invalid_argument("projection: elevation table size != rows");
      for (std::size_t i = 1; i < row_elevations.size(); ++i)
        if (!(row_elevations[i] < row_elevations[i - 1]))
          throw std::invalid_argument("projection: elevation table must be strictly decreasing");
    }
  }

  double elevation_step() const { return (elevation_max - elevation_min) / rows; }
  double azimuth_step() const { return 2.0 * std::numbers::pi / cols; }

  /// Bin-center elevation of a row.
  double elevation_of_row(int r) const {
    if (!row_elevations.empty()) return row_elevations[r];
    return elevation_max - (r + 0.5) * elevation_step();
  }

  /// Bin-center azimuth of a column.
  double azimuth_of_col(int c) const {
    return -std::numbers::pi + (c + 0.5) * azimuth_step();
  }

  /// Row whose bin contains the elevation, or -1 if out of bounds.
  int row_of_elevation(double e) const {
    if (row_elevations.empty()) {
      if (e > elevation_max || e < elevation_min) return -1;
      int r = static_cast<int>(std::floor((elevation_max - e) / elevation_step()));
      return (r >= 0 && r < rows) ? r : -1;
    }
    // Table mode: bins bounded by midpoints between consecutive entries,
    // outer bins extended by half the adjacent gap.
    const auto& t = row_elevations;
    double top = (rows > 1) ? t[0] + 0.5 * (t[0] - t[1]) : t[0] + 0.5 * elevation_step();
    double bot = (rows > 1) ? t[rows - 1] - 0.5 * (t[rows - 2] - t[rows - 1])
                            : t[0] - 0.5 * elevation_step();
    if (e > top || e < bot) return -1;
    int lo = 0, hi = rows - 1;
    while (lo < hi) {  // find first row whose lower boundary is <= e
      int mid = (lo + hi) / 2;
      double boundary = 0.5 * (t[mid] + t[mid + 1]);
      if (e >= boundary)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

  /// Column whose bin contains the azimuth (always valid; wraps at pi).
  int col_of_azimuth(double a) const {
    int c = static_cast<int>(std::floor((a + std::numbers::pi) / azimuth_step()));
    if (c >= cols) c -= cols;
    if (c < 0) c = 0;
    return c;
  }
};

/// 2-D grid of ranges in meters. Masked pixels hold 0 < value <= range_max,
/// unmasked pixels hold exactly 0. Values are float32 so that prediction
/// residuals (formed in double) are exact and invertible.
struct RangeImage {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> mask;
  ProjectionParams params;

  RangeImage() = default;
  explicit RangeImage(const ProjectionParams& p)
      : rows(p.rows), cols(p.cols),
        values(static_cast<std::size_t>(p.rows) * p.cols, 0.0f),
        mask(static_cast<std::size_t>(p.rows) * p.cols, 0),
        params(p) {}

  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
  float at(int r, int c) const { return values[idx(r, c)]; }
  float& at(int r, int c) { return values[idx(r, c)]; }
  bool masked(int r, int c) const { return mask[idx(r, c)] != 0; }
  void set(int r, int c, float v) { values[idx(r, c)] = v; mask[idx(r, c)] = 1; }

  std::size_t mask_count() const {
    std::size_t n = 0;
    for (auto m : mask) n += (m != 0);
    return n;
  }

  bool operator==(const RangeImage& o) const {
    return rows == o.rows && cols == o.cols && values == o.values && mask == o.mask;
  }
};

enum class PredictionMode : std::uint8_t { Intra = 0, Inter = 1 };

/// Signed per-pixel prediction residual in meters. Residuals are doubles:
/// the difference of two float32 range values is exact in double for any
/// pair within a 2^28 dynamic range, which makes delta coding invertible.
struct ResidualImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // occupancy of the source image
  PredictionMode mode = PredictionMode::Intra;

  ResidualImage() = default;
  ResidualImage(int r, int c)
      : rows(r), cols(c),
        values(static_cast<std::size_t>(r) * c, 0.0),
        mask(static_cast<std::size_t>(r) * c, 0) {}

  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
  double at(int r, int c) const { return values[idx(r, c)]; }
  double& at(int r, int c) { return values[idx(r, c)]; }
  bool masked(int r, int c) const { return mask[idx(r, c)] != 0; }
};

/// Rigid transform p' = R p + t. R is kept orthonormal (det +1).
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Point3 apply(const Point3& p) const {
    Eigen::Vector3d v = rotation * p.vec() + translation;
    return {v.x(), v.y(), v.z(), p.intensity};
  }

  bool is_rigid(double tol = 1e-5) const {
    Eigen::Matrix3d g = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    return g.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
  }

  /// Round-trip through the 12 serialized float32 values.
  Pose quantized() const {
    Pose q;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c)
        q.rotation(r, c) = static_cast<float>(rotation(r, c));
      q.translation(r) = static_cast<float>(translation(r));
    }
    return q;
  }
};

}  // namespace dcmp
