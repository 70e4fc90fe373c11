// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "dcmp/pointcloud_io.hpp"
#include "testutil.hpp"

using namespace dcmp;

namespace {

std::vector<std::uint8_t> kitti_record(float x, float y, float z, float i) {
  std::vector<std::uint8_t> out(16);
  float v[4] = {x, y, z, i};
  std::memcpy(out.data(), v, 16);  // test host is little-endian
  return out;
}

}  // namespace

TEST_SUITE("pointcloud_io") {

TEST_CASE("kitti-bin single record decodes to one point") {
  const auto bytes = kitti_record(1.0f, 2.0f, 3.0f, 0.5f);
  const PointCloud cloud = load_point_cloud(bytes, CloudFormat::KittiBin);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].x == 1.0);
  CHECK(cloud.points[0].y == 2.0);
  CHECK(cloud.points[0].z == 3.0);
  CHECK(cloud.points[0].intensity == 0.5f);
}

TEST_CASE("kitti-bin empty input yields empty cloud") {
  const PointCloud cloud = load_point_cloud({}, CloudFormat::KittiBin);
  CHECK(cloud.empty());
}

TEST_CASE("kitti-bin truncated record is rejected") {
  std::vector<std::uint8_t> bytes(24, 0);
  CHECK_THROWS_AS(load_point_cloud(bytes, CloudFormat::KittiBin), std::runtime_error);
}

TEST_CASE("non-finite records are dropped and counted") {
  auto bytes = kitti_record(1.0f, 2.0f, 3.0f, 0.0f);
  const auto bad = kitti_record(std::nanf(""), 0.0f, 0.0f, 0.0f);
  bytes.insert(bytes.end(), bad.begin(), bad.end());
  const auto inf = kitti_record(1.0f, std::numeric_limits<float>::infinity(), 0.0f, 0.0f);
  bytes.insert(bytes.end(), inf.begin(), inf.end());
  LoadStats stats;
  const PointCloud cloud = load_point_cloud(bytes, CloudFormat::KittiBin, &stats);
  CHECK(cloud.size() == 1);
  CHECK(stats.rejected == 2);
}

TEST_CASE("unknown format extension is rejected") {
  CHECK_THROWS_AS(cloud_format_from_path("scan.xyz"), std::runtime_error);
  CHECK(cloud_format_from_path("scan.bin") == CloudFormat::KittiBin);
  CHECK(cloud_format_from_path("scan.pcd") == CloudFormat::PcdAscii);
  CHECK(cloud_format_from_path("scan.ply") == CloudFormat::PlyAscii);
}

TEST_CASE("pcd and ply writers round-trip through their readers") {
  test::Rng rng(7);
  const PointCloud cloud = test::random_cloud(rng, 200);
  const auto dir = std::filesystem::temp_directory_path();
  for (CloudFormat fmt : {CloudFormat::PcdAscii, CloudFormat::PlyAscii, CloudFormat::KittiBin}) {
    const std::string path =
        (dir / ("dcmp_io_test" + std::to_string(static_cast<int>(fmt)))).string();
    save_point_cloud_file(path, cloud, fmt);
    const PointCloud back = load_point_cloud_file(path, fmt);
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      // writers emit float32-precision coordinates
      CHECK(back.points[i].x == doctest::Approx(cloud.points[i].x).epsilon(1e-6));
      CHECK(back.points[i].z == doctest::Approx(cloud.points[i].z).epsilon(1e-6));
    }
    std::filesystem::remove(path);
  }
}

TEST_CASE("pcd missing DATA section is an error") {
  const std::string text = "FIELDS x y z\nPOINTS 1\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  CHECK_THROWS_AS(load_point_cloud(bytes, CloudFormat::PcdAscii), std::runtime_error);
}

}  // TEST_SUITE
