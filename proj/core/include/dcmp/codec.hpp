// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>

#include "dcmp/bitstream.hpp"
#include "dcmp/icp.hpp"
#include "dcmp/prediction.hpp"
#include "dcmp/ratecontrol.hpp"

namespace dcmp {

enum class PoseSource { Icp, File, None };

/// Reconstruction clamp floor in meters. Format-fixed: encoder and decoder
/// must clamp identically to stay synchronized.
inline constexpr double kRangeFloor = 0.001;

struct CodecConfig {
  ProjectionParams params;
  IntraConfig intra;
  IcpConfig icp;
  double adwt_alpha = 0.53;
  double t_key = 0.5;           // keyframe threshold on mean |inter residual|, m
  int keyframe_interval = 64;   // K_max: forced intra at least this often
  double q = 0.05;              // base step in constant-Q mode
  PoseSource pose_source = PoseSource::Icp;
  RcDataset dataset = RcDataset::Kitti;
  TransformKind transform = TransformKind::Adwt;

  StreamHeader header(bool rate_control) const {
    return {params, rate_control, transform};
  }
};

struct FrameStats {
  std::uint32_t frame_index = 0;
  PredictionMode mode = PredictionMode::Intra;
  std::size_t packet_bytes = 0;
  double bpp = 0.0;
  std::optional<double> target_bpp;
  double mse = 0.0;
  double psnr_db = 0.0;
  std::size_t points = 0;
  std::size_t dropped_points = 0;
};

/// Closed-loop encoder. Prediction always references the encoder's own
/// lossy reconstruction so the decoder can mirror it bit-exactly.
class Encoder {
 public:
  explicit Encoder(const CodecConfig& config);
  ~Encoder();
  Encoder(Encoder&&) noexcept;
  Encoder& operator=(Encoder&&) noexcept;

  /// Encode the next frame. target_bpp engages rate control; external_pose
  /// is required per frame when pose_source is File.
  FramePacket encode(const PointCloud& cloud, std::optional<double> target_bpp = {},
                     const std::optional<Pose>& external_pose = {},
                     FrameStats* stats = nullptr);

  /// Projection of the most recent input, and the matching local
  /// reconstruction (what the decoder will produce).
  const RangeImage& last_original() const;
  const RangeImage& last_reconstruction() const;

  void reset();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class Decoder {
 public:
  explicit Decoder(const StreamHeader& header);
  ~Decoder();
  Decoder(Decoder&&) noexcept;
  Decoder& operator=(Decoder&&) noexcept;

  /// Decode one packet. Throws CorruptStream on malformed payloads (state
  /// is left at the last good frame) and MissingReference for an inter
  /// packet without a reference.
  PointCloud decode(const FramePacket& packet);

  const RangeImage& last_reconstruction() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dcmp
