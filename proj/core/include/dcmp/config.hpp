// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dcmp/codec.hpp"

namespace dcmp {

/// key = value codec configuration (one pair per line, '#' comments).
/// Recognized keys: rows, cols, elev_min_deg, elev_max_deg, range_max_m,
/// elev_table_deg (comma list, one entry per row), t_key_m, tau, g_min,
/// kappa_m, keyframe_interval, adwt_alpha, q, dataset (kitti|nuscenes|waymo).
CodecConfig parse_codec_config(const std::string& text);
CodecConfig load_codec_config(const std::string& path);

/// Pose file: one line per frame, 12 whitespace-separated floats
/// (row-major rotation, then translation).
std::vector<Pose> load_pose_file(const std::string& path);

/// Bitrate schedule: lines of `frame_index,target_bpp`. Frames after the
/// last listed index reuse the last target.
struct RateSchedule {
  std::vector<std::pair<std::uint32_t, double>> entries;  // sorted by frame

  double target_for(std::uint32_t frame) const;
  bool empty() const { return entries.empty(); }
};

RateSchedule parse_schedule(const std::string& text);
RateSchedule load_schedule(const std::string& path);

}  // namespace dcmp
