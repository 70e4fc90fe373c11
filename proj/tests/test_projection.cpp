// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "dcmp/projection.hpp"
#include "testutil.hpp"

using namespace dcmp;

TEST_SUITE("projection") {

TEST_CASE("axis-aligned point lands at the center azimuth column") {
  ProjectionParams p;  // default 64x2048 grid
  const double d = 42.0;
  PointCloud cloud;
  cloud.points.emplace_back(d, 0.0, 0.0);
  const RangeImage img = project(cloud, p);

  const int row = p.row_of_elevation(0.0);
  const int col = p.cols / 2;  // azimuth 0 is the first column of the upper half
  REQUIRE(img.mask_count() == 1);
  CHECK(img.masked(row, col));
  CHECK(img.at(row, col) == doctest::Approx(d).epsilon(1e-12));
}

TEST_CASE("pixel collision keeps the nearest point") {
  ProjectionParams p;
  PointCloud cloud;
  cloud.points.emplace_back(7.0, 0.0, 0.0);
  cloud.points.emplace_back(5.0, 0.0, 0.0);
  ProjectStats stats;
  const RangeImage img = project(cloud, p, &stats);
  REQUIRE(img.mask_count() == 1);
  CHECK(img.at(p.row_of_elevation(0.0), p.cols / 2) == 5.0f);
  CHECK(stats.collisions == 1);
}

TEST_CASE("empty cloud projects to an empty image") {
  const RangeImage img = project(PointCloud{}, ProjectionParams{});
  CHECK(img.mask_count() == 0);
  for (float v : img.values) CHECK(v == 0.0f);
}

TEST_CASE("points beyond range_max or outside the FOV are dropped and counted") {
  ProjectionParams p;
  PointCloud cloud;
  cloud.points.emplace_back(p.range_max + 1.0, 0.0, 0.0);
  cloud.points.emplace_back(10.0, 0.0, 9.0);  // elevation way above elevation_max
  ProjectStats stats;
  const RangeImage img = project(cloud, p, &stats);
  CHECK(img.mask_count() == 0);
  CHECK(stats.dropped_range == 1);
  CHECK(stats.dropped_out_of_fov == 1);
}

TEST_CASE("projection idempotence: project(back_project(R)) == R exactly") {
  test::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto params = test::small_params(64, 512);
    const RangeImage img = test::random_range_image(rng, params, 0.7);
    const RangeImage again = project(back_project(img), params);
    CHECK(again == img);
  }
}

TEST_CASE("idempotence holds with a per-row elevation table") {
  test::Rng rng(12);
  ProjectionParams p = test::small_params(16, 128);
  // mildly non-uniform, strictly decreasing table
  p.row_elevations.resize(p.rows);
  for (int r = 0; r < p.rows; ++r)
    p.row_elevations[r] =
        p.elevation_max - (r + 0.5) * p.elevation_step() * (1.0 + 0.3 * std::sin(r));
  std::sort(p.row_elevations.begin(), p.row_elevations.end(), std::greater<>());
  p.row_elevations.front() += 1e-4;  // ensure strict ordering
  p.validate();

  const RangeImage img = test::random_range_image(rng, p, 0.8);
  CHECK(project(back_project(img), p) == img);
}

TEST_CASE("monotone occupancy and back-projected norms") {
  test::Rng rng(13);
  const ProjectionParams p = test::small_params();
  const PointCloud cloud = test::random_cloud(rng, 3000);
  const RangeImage img = project(cloud, p);
  CHECK(img.mask_count() <= cloud.size());

  for (const Point3& q : back_project(img)) {
    const double n = q.norm();
    CHECK(n > 0.0);
    CHECK(n <= p.range_max * (1.0 + 1e-12));
  }
}

TEST_CASE("round-trip error is bounded by the angular bin size") {
  // Brute-force oracle: for every masked pixel, find the surviving source
  // point (nearest range among points mapping to that pixel) and compare
  // against the bin-center reconstruction. The chord bound is
  // d * (elev_half_bin + azim_half_bin).
  test::Rng rng(14);
  ProjectionParams p;  // 64 x 2048
  const PointCloud cloud = test::random_cloud(rng, 1000, 1.0, p.range_max * 0.99);
  const RangeImage img = project(cloud, p);
  const PointCloud recon = back_project(img);

  // map pixels to reconstructed points
  std::vector<std::size_t> pixel_of_point;
  std::size_t k = 0;
  std::vector<const Point3*> recon_at(img.values.size(), nullptr);
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c)
      if (img.masked(r, c)) recon_at[img.idx(r, c)] = &recon.points[k++];
  REQUIRE(k == recon.size());

  const double bound_angle = 0.5 * p.elevation_step() + 0.5 * p.azimuth_step();
  std::size_t checked = 0;
  for (const Point3& q : cloud.points) {
    const double range = q.norm();
    if (range > p.range_max) continue;
    const int row = p.row_of_elevation(std::asin(q.z / range));
    if (row < 0) continue;
    const int col = p.col_of_azimuth(std::atan2(q.y, q.x));
    if (static_cast<double>(img.at(row, col)) != static_cast<float>(range))
      continue;  // displaced by a nearer collision
    const Point3* r = recon_at[img.idx(row, col)];
    REQUIRE(r != nullptr);
    const double err = std::sqrt((q.x - r->x) * (q.x - r->x) + (q.y - r->y) * (q.y - r->y) +
                                 (q.z - r->z) * (q.z - r->z));
    CHECK(err <= range * bound_angle * (1.0 + 1e-9) + 1e-9);
    ++checked;
  }
  CHECK(checked > 900);  // almost all random points survive
}

TEST_CASE("invalid projection parameters are rejected") {
  ProjectionParams p;
  p.rows = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProjectionParams{};
  p.elevation_min = p.elevation_max;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProjectionParams{};
  p.range_max = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProjectionParams{};
  p.row_elevations = {0.1, 0.2};  // wrong size and not decreasing
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

}  // TEST_SUITE
