// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "dcmp/geometry.hpp"

namespace dcmp {

enum class CloudFormat { KittiBin, PcdAscii, PlyAscii };

/// Resolve a format from a file extension (.bin/.pcd/.ply).
CloudFormat cloud_format_from_path(const std::string& path);

struct LoadStats {
  std::size_t rejected = 0;  // records with non-finite coordinates
};

/// Decode a point cloud from raw bytes. kitti-bin is a sequence of
/// little-endian float32 (x, y, z, intensity); pcd/ply are the ASCII
/// subsets described in the README. Non-finite records are dropped and
/// counted, structural problems throw std::runtime_error.
PointCloud load_point_cloud(std::span<const std::uint8_t> bytes, CloudFormat format,
                            LoadStats* stats = nullptr);

PointCloud load_point_cloud_file(const std::string& path, CloudFormat format,
                                 LoadStats* stats = nullptr);
PointCloud load_point_cloud_file(const std::string& path, LoadStats* stats = nullptr);

void save_point_cloud_file(const std::string& path, const PointCloud& cloud,
                           CloudFormat format);

}  // namespace dcmp
