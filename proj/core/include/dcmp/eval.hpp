// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dcmp/codec.hpp"
#include "dcmp/config.hpp"
#include "dcmp/ratecontrol.hpp"

namespace dcmp {

/// A finite sequence of frames, either preloaded or generated on demand.
struct FrameSequence {
  std::size_t count = 0;
  std::function<PointCloud(std::size_t)> get;
};

struct FrameRow {
  std::uint32_t index = 0;
  PredictionMode mode = PredictionMode::Intra;
  std::size_t bytes = 0;
  double bpp = 0.0;
  std::optional<double> target_bpp;
  double encode_ms = 0.0;
  double decode_ms = 0.0;
  double mse = 0.0;
  double psnr_db = 0.0;
};

struct RunReport {
  std::vector<FrameRow> rows;
  double mean_bpp = 0.0;
  double mean_psnr_db = 0.0;  // over frames with finite PSNR
  double avg_bitrate_error = 0.0;   // only when targets were set
  double peak_bitrate_error = 0.0;
  double total_encode_ms = 0.0;
  double total_decode_ms = 0.0;

  void recompute_aggregates();
  void write_csv(std::ostream& out) const;
};

struct EncodeOptions {
  std::optional<RateSchedule> schedule;
  std::optional<double> target_bpp;      // constant target (overridden by schedule)
  std::vector<Pose> poses;               // required when pose_source == File
  std::ostream* container_out = nullptr; // .dcmp bytes, when set
  bool verify_decode = true;             // run the decoder and check sync
};

/// Encode (and by default decode) a sequence; throws std::runtime_error if
/// verification finds an encoder/decoder reconstruction mismatch.
RunReport run_encode(const FrameSequence& frames, const CodecConfig& config,
                     const EncodeOptions& options);

struct RdPoint {
  double q = 0.0;
  double bpp = 0.0;
  double mse = 0.0;
  double psnr_db = 0.0;
};

struct RdCurve {
  std::vector<RdPoint> points;
  DqFit dq;
  RqFit rq;
};

/// Constant-Q sweep with D-Q / R-Q model fits over the sweep points.
RdCurve rd_curve(const FrameSequence& frames, const CodecConfig& config,
                 const std::vector<double>& q_values);

struct AblationRow {
  TransformKind transform;
  double target_bpp = 0.0;
  double achieved_bpp = 0.0;
  double q = 0.0;
  double psnr_db = 0.0;
};

/// Matched-bpp transform comparison: per transform and target, bisect the
/// base step until mean bpp lands within `tolerance` of the target.
std::vector<AblationRow> ablation(const FrameSequence& frames, const CodecConfig& config,
                                  const std::vector<double>& bpp_targets,
                                  const std::vector<TransformKind>& transforms,
                                  double tolerance = 0.02);

/// Rate-controlled run against a schedule; report carries per-frame and
/// aggregate bitrate errors.
RunReport stream_sim(const FrameSequence& frames, const CodecConfig& config,
                     const RateSchedule& schedule, std::ostream* container_out = nullptr);

const char* transform_name(TransformKind t);
const char* mode_name(PredictionMode m);

}  // namespace dcmp
