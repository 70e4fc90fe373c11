// SPDX-License-Identifier: Apache-2.0
#include "dcmp/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dcmp/adwt.hpp"
#include "dcmp/dct.hpp"
#include "dcmp/metrics.hpp"
#include "dcmp/projection.hpp"

namespace dcmp {
namespace {

int tiles_rows(const ProjectionParams& p) { return (p.rows + kBlockSize - 1) / kBlockSize; }
int tiles_cols(const ProjectionParams& p) { return (p.cols + kBlockSize - 1) / kBlockSize; }

void extract_block(const ResidualImage& res, int tr, int tc, double* out) {
  std::fill(out, out + kBlockPixels, 0.0);
  const int r0 = tr * kBlockSize, c0 = tc * kBlockSize;
  const int rmax = std::min(kBlockSize, res.rows - r0);
  const int cmax = std::min(kBlockSize, res.cols - c0);
  for (int r = 0; r < rmax; ++r)
    for (int c = 0; c < cmax; ++c) out[r * kBlockSize + c] = res.at(r0 + r, c0 + c);
}

void deposit_block(ResidualImage& res, int tr, int tc, const double* in) {
  const int r0 = tr * kBlockSize, c0 = tc * kBlockSize;
  const int rmax = std::min(kBlockSize, res.rows - r0);
  const int cmax = std::min(kBlockSize, res.cols - c0);
  for (int r = 0; r < rmax; ++r)
    for (int c = 0; c < cmax; ++c) res.at(r0 + r, c0 + c) = in[r * kBlockSize + c];
}

void clamp_masked(RangeImage& img, double floor) {
  const float lo = static_cast<float>(floor);
  const float hi = static_cast<float>(img.params.range_max);
  for (std::size_t i = 0; i < img.values.size(); ++i)
    if (img.mask[i]) img.values[i] = std::clamp(img.values[i], lo, hi);
}

// ------------------------- side info serialization -------------------------

void encode_direction(RangeEncoder& enc, FrameContexts& ctx, Direction d) {
  const int v = static_cast<int>(d);
  enc.encode_bit(ctx.direction_bit[0], (v >> 1) & 1);
  enc.encode_bit(ctx.direction_bit[1], v & 1);
}

Direction decode_direction(RangeDecoder& dec, FrameContexts& ctx) {
  const int hi = dec.decode_bit(ctx.direction_bit[0]);
  const int lo = dec.decode_bit(ctx.direction_bit[1]);
  return static_cast<Direction>((hi << 1) | lo);
}

std::vector<std::uint8_t> encode_side_info(const IntraSideInfo& side, FrameContexts& ctx) {
  std::vector<std::uint8_t> out;
  RangeEncoder enc(out);
  for (const MacroblockPartition& mb : side.blocks) {
    enc.encode_bit(ctx.split_flag[0], mb.split ? 1 : 0);
    if (!mb.split) {
      encode_direction(enc, ctx, mb.dir);
      continue;
    }
    for (const auto& sub : mb.sub) {
      enc.encode_bit(ctx.split_flag[1], sub.split ? 1 : 0);
      if (!sub.split) {
        encode_direction(enc, ctx, sub.dir);
      } else {
        for (Direction d : sub.leaf) encode_direction(enc, ctx, d);
      }
    }
  }
  enc.flush();
  return out;
}

IntraSideInfo decode_side_info(std::span<const std::uint8_t> bytes, int mb_rows, int mb_cols,
                               FrameContexts& ctx) {
  IntraSideInfo side;
  side.mb_rows = mb_rows;
  side.mb_cols = mb_cols;
  side.blocks.resize(static_cast<std::size_t>(mb_rows) * mb_cols);
  RangeDecoder dec(bytes);
  for (MacroblockPartition& mb : side.blocks) {
    mb.split = dec.decode_bit(ctx.split_flag[0]) != 0;
    if (!mb.split) {
      mb.dir = decode_direction(dec, ctx);
      continue;
    }
    for (auto& sub : mb.sub) {
      sub.split = dec.decode_bit(ctx.split_flag[1]) != 0;
      if (!sub.split) {
        sub.dir = decode_direction(dec, ctx);
      } else {
        for (Direction& d : sub.leaf) d = decode_direction(dec, ctx);
      }
    }
  }
  return side;
}

// ----------------------------- DCT tile coding -----------------------------

constexpr int kDctPlanes = 64;

int dct_ctx_class(int plane) {
  return std::min(kContextClasses - 1, plane / 8 + plane % 8);  // by diagonal u+v
}

std::vector<std::uint8_t> encode_dct_tile(const DctTile& tile, double step,
                                          FrameContexts& ctx, DctTile& decoded) {
  const auto& order = morton_scan(8);
  std::array<std::int32_t, kBlockPixels> scanned;
  for (int p = 0; p < kDctPlanes; ++p)
    for (int i = 0; i < 64; ++i) {
      const double c = tile.coeff[static_cast<std::size_t>(p) * 64 + order[i]];
      scanned[static_cast<std::size_t>(p) * 64 + i] =
          static_cast<std::int32_t>(std::llround(c / step));
    }
  std::array<CoeffSegment, kDctPlanes> segs;
  for (int p = 0; p < kDctPlanes; ++p)
    segs[p] = {dct_ctx_class(p),
               std::span<const std::int32_t>(scanned.data() + p * 64, 64)};
  std::vector<std::uint8_t> out;
  RangeEncoder enc(out);
  encode_segments(enc, ctx, segs);
  enc.flush();
  for (int p = 0; p < kDctPlanes; ++p)
    for (int i = 0; i < 64; ++i)
      decoded.coeff[static_cast<std::size_t>(p) * 64 + order[i]] =
          scanned[static_cast<std::size_t>(p) * 64 + i] * step;
  return out;
}

DctTile decode_dct_tile(std::span<const std::uint8_t> bytes, double step, FrameContexts& ctx) {
  const auto& order = morton_scan(8);
  std::array<std::int32_t, kBlockPixels> scanned;
  std::array<CoeffSegment, kDctPlanes> layout;
  std::array<std::int32_t*, kDctPlanes> outs;
  for (int p = 0; p < kDctPlanes; ++p) {
    layout[p] = {dct_ctx_class(p),
                 std::span<const std::int32_t>(scanned.data() + p * 64, 64)};
    outs[p] = scanned.data() + p * 64;
  }
  RangeDecoder dec(bytes);
  decode_segments(dec, ctx, layout, outs);
  DctTile tile;
  for (int p = 0; p < kDctPlanes; ++p)
    for (int i = 0; i < 64; ++i)
      tile.coeff[static_cast<std::size_t>(p) * 64 + order[i]] =
          scanned[static_cast<std::size_t>(p) * 64 + i] * step;
  return tile;
}

// --------------------------- block payload coding --------------------------

struct BlockResult {
  std::int64_t bits = 0;
  double mse = 0.0;  // residual-domain distortion over the 64x64 tile
};

// Encodes one residual tile with base step q and appends it to the payload.
// The locally decoded tile (what the decoder will see) lands in decoded_res.
BlockResult encode_tile(const ResidualImage& res, int tr, int tc, double q,
                        TransformKind transform, double adwt_alpha, ByteWriter& w,
                        FrameContexts& ctx, ResidualImage& decoded_res) {
  double block[kBlockPixels];
  extract_block(res, tr, tc, block);

  double decoded[kBlockPixels];
  std::size_t step_bytes = 0, coeff_bytes = 0;

  if (transform == TransformKind::Dct) {
    const std::uint16_t code = quant_step_to_code(q);
    const double step = quant_step_from_code(code);
    const DctTile tile = forward_dct8(std::span<const double, kBlockPixels>(block));
    DctTile dec_tile;
    const auto bytes = encode_dct_tile(tile, step, ctx, dec_tile);
    w.u16(code);
    w.u32(static_cast<std::uint32_t>(bytes.size()));
    w.bytes(bytes);
    step_bytes = 2;
    coeff_bytes = bytes.size();
    inverse_dct8(dec_tile, std::span<double, kBlockPixels>(decoded));
  } else {
    const SubbandPyramid pyr = forward_dwt3(std::span<const double, kBlockPixels>(block));
    QuantMap qmap = transform == TransformKind::Adwt
                        ? assign_quant_steps(subband_energies(pyr), q, adwt_alpha)
                        : uniform_quant_map(q);
    // Quantize with the steps the decoder will reconstruct from the codes.
    std::array<std::uint16_t, kSubbandCount> codes;
    for (int sb = 0; sb < kSubbandCount; ++sb) {
      codes[sb] = quant_step_to_code(qmap.q[sb]);
      qmap.q[sb] = quant_step_from_code(codes[sb]);
    }
    const QuantizedPyramid qz = quantize(pyr, qmap);
    const auto bytes = encode_block(qz, ctx);
    for (std::uint16_t c : codes) w.u16(c);
    w.u32(static_cast<std::uint32_t>(bytes.size()));
    w.bytes(bytes);
    step_bytes = 2 * kSubbandCount;
    coeff_bytes = bytes.size();
    inverse_dwt3(dequantize(qz, qmap), std::span<double, kBlockPixels>(decoded));
  }
  deposit_block(decoded_res, tr, tc, decoded);

  BlockResult out;
  out.bits = static_cast<std::int64_t>(8 * (step_bytes + 4 + coeff_bytes));
  double err = 0.0;
  for (int i = 0; i < kBlockPixels; ++i) {
    const double d = block[i] - decoded[i];
    err += d * d;
  }
  out.mse = err / kBlockPixels;
  return out;
}

void decode_tile(ByteReader& r, int tr, int tc, TransformKind transform,
                 FrameContexts& ctx, ResidualImage& decoded_res) {
  double decoded[kBlockPixels];
  if (transform == TransformKind::Dct) {
    const double step = quant_step_from_code(r.u16());
    const std::uint32_t len = r.u32();
    const DctTile tile = decode_dct_tile(r.bytes(len), step, ctx);
    inverse_dct8(tile, std::span<double, kBlockPixels>(decoded));
  } else {
    QuantMap qmap;
    for (int sb = 0; sb < kSubbandCount; ++sb) qmap.q[sb] = quant_step_from_code(r.u16());
    const std::uint32_t len = r.u32();
    const QuantizedPyramid qz = decode_block(r.bytes(len), ctx);
    inverse_dwt3(dequantize(qz, qmap), std::span<double, kBlockPixels>(decoded));
  }
  deposit_block(decoded_res, tr, tc, decoded);
}

// ----------------------------- reconstruction ------------------------------

RangeImage reconstruct_frame(const ResidualImage& res_hat, PredictionMode mode,
                             const IntraSideInfo* side, const RangeImage* predicted,
                             const ProjectionParams& params, double range_floor) {
  RangeImage img;
  if (mode == PredictionMode::Intra) {
    img = intra_reconstruct(res_hat, *side, params);
  } else {
    img = RangeImage(params);
    img.mask = res_hat.mask;
    for (int r = 0; r < img.rows; ++r)
      for (int c = 0; c < img.cols; ++c) {
        if (!res_hat.masked(r, c)) continue;
        const double pred =
            predicted->masked(r, c) ? static_cast<double>(predicted->at(r, c)) : 0.0;
        img.at(r, c) = static_cast<float>(pred + res_hat.at(r, c));
      }
  }
  clamp_masked(img, range_floor);
  return img;
}

}  // namespace

// --------------------------------- encoder ---------------------------------

struct Encoder::Impl {
  CodecConfig cfg;
  int tr, tc;
  RateController rc;
  PointCloud prev_cloud;
  bool have_prev = false;
  std::uint32_t frame_index = 0;
  int frames_since_intra = 0;
  RangeImage last_orig;
  RangeImage last_recon;

  explicit Impl(const CodecConfig& c)
      : cfg(c), tr(tiles_rows(c.params)), tc(tiles_cols(c.params)),
        rc(tr, tc, c.dataset) {
    cfg.params.validate();
  }
};

Encoder::Encoder(const CodecConfig& config) : impl_(std::make_unique<Impl>(config)) {}
Encoder::~Encoder() = default;
Encoder::Encoder(Encoder&&) noexcept = default;
Encoder& Encoder::operator=(Encoder&&) noexcept = default;

const RangeImage& Encoder::last_original() const { return impl_->last_orig; }
const RangeImage& Encoder::last_reconstruction() const { return impl_->last_recon; }

void Encoder::reset() {
  CodecConfig cfg = impl_->cfg;
  impl_ = std::make_unique<Impl>(cfg);
}

FramePacket Encoder::encode(const PointCloud& cloud, std::optional<double> target_bpp,
                            const std::optional<Pose>& external_pose, FrameStats* stats) {
  Impl& im = *impl_;
  const CodecConfig& cfg = im.cfg;

  ProjectStats pstats;
  const RangeImage cur = project(cloud, cfg.params, &pstats);

  // --- mode selection -------------------------------------------------
  PredictionMode mode = PredictionMode::Intra;
  Pose pose;
  RangeImage predicted;
  // keyframe cadence: an intra frame at least every keyframe_interval frames
  const bool force_intra =
      !im.have_prev || im.frames_since_intra + 1 >= cfg.keyframe_interval ||
      cfg.pose_source == PoseSource::None;
  if (!force_intra) {
    std::optional<Pose> est;
    if (cfg.pose_source == PoseSource::File) {
      est = external_pose;
    } else {
      est = estimate_pose(im.prev_cloud, cloud, cfg.params, cfg.icp);
    }
    if (est) {
      pose = est->quantized();  // prediction must use the transmitted values
      predicted = project_with_pose(im.prev_cloud, pose, cfg.params);
      if (mean_abs_comasked(cur, predicted) <= cfg.t_key) mode = PredictionMode::Inter;
    }
  }

  ResidualImage residual;
  IntraSideInfo side;
  if (mode == PredictionMode::Intra) {
    std::tie(residual, side) = intra_predict(cur, cfg.intra);
  } else {
    residual = inter_residual(cur, predicted);
  }

  // --- payload --------------------------------------------------------
  FramePacket packet;
  packet.frame_index = im.frame_index;
  packet.mode = mode;
  packet.point_count = static_cast<std::uint32_t>(cloud.size());

  ByteWriter w(packet.payload);
  FrameContexts ctx;
  if (mode == PredictionMode::Inter) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(pose.rotation(r, c)));
    for (int r = 0; r < 3; ++r) w.f32(static_cast<float>(pose.translation(r)));
  } else {
    const auto side_bytes = encode_side_info(side, ctx);
    w.u32(static_cast<std::uint32_t>(side_bytes.size()));
    w.bytes(side_bytes);
  }
  const auto mask_bytes = encode_mask(cur.mask, ctx);
  w.u32(static_cast<std::uint32_t>(mask_bytes.size()));
  w.bytes(mask_bytes);

  // --- residual blocks --------------------------------------------------
  const std::size_t n_blocks = static_cast<std::size_t>(im.tr) * im.tc;
  std::vector<double> energies(n_blocks, 0.0);
  std::vector<std::int64_t> block_points(n_blocks, 0);
  for (int r = 0; r < residual.rows; ++r)
    for (int c = 0; c < residual.cols; ++c) {
      const std::size_t b =
          static_cast<std::size_t>(r / kBlockSize) * im.tc + (c / kBlockSize);
      const double v = residual.at(r, c);
      energies[b] += v * v;
      block_points[b] += residual.masked(r, c) ? 1 : 0;
    }

  const bool use_rc = target_bpp.has_value() && cloud.size() > 0;
  const std::int64_t frame_target_bits =
      use_rc ? std::llround(*target_bpp * static_cast<double>(cloud.size())) : 0;
  if (use_rc) {
    const std::int64_t overhead_bits = static_cast<std::int64_t>(8 * (13 + packet.payload.size()));
    im.rc.begin_frame(frame_target_bits, overhead_bits, energies);
  }

  ResidualImage decoded_res(residual.rows, residual.cols);
  decoded_res.mask = residual.mask;
  decoded_res.mode = residual.mode;

  for (int tr = 0; tr < im.tr; ++tr) {
    for (int tcol = 0; tcol < im.tc; ++tcol) {
      const std::size_t b = static_cast<std::size_t>(tr) * im.tc + tcol;
      RateController::BlockDecision decision;
      if (use_rc) {
        decision = im.rc.decide_block(b, block_points[b]);
      } else {
        decision.q = cfg.q;
      }
      const BlockResult br = encode_tile(residual, tr, tcol, decision.q, cfg.transform,
                                         cfg.adwt_alpha, w, ctx, decoded_res);
      if (use_rc) im.rc.end_block(b, decision, br.bits, br.mse, block_points[b]);
    }
  }

  // --- closed-loop reconstruction --------------------------------------
  RangeImage recon = reconstruct_frame(decoded_res, mode,
                                       mode == PredictionMode::Intra ? &side : nullptr,
                                       mode == PredictionMode::Inter ? &predicted : nullptr,
                                       cfg.params, kRangeFloor);
  im.prev_cloud = back_project(recon);
  im.have_prev = true;
  im.frames_since_intra = (mode == PredictionMode::Intra) ? 0 : im.frames_since_intra + 1;

  if (use_rc)
    im.rc.end_frame(static_cast<std::int64_t>(8 * packet.byte_size()), frame_target_bits);

  if (stats) {
    stats->frame_index = im.frame_index;
    stats->mode = mode;
    stats->packet_bytes = packet.byte_size();
    stats->bpp = cloud.empty() ? 0.0
                               : static_cast<double>(8 * packet.byte_size()) /
                                     static_cast<double>(cloud.size());
    stats->target_bpp = target_bpp;
    stats->mse = mse(cur, recon);
    stats->psnr_db = psnr(cur, recon);
    stats->points = cloud.size();
    stats->dropped_points = pstats.dropped_out_of_fov + pstats.dropped_range;
  }
  im.last_orig = cur;
  im.last_recon = std::move(recon);
  ++im.frame_index;
  return packet;
}

// --------------------------------- decoder ---------------------------------

struct Decoder::Impl {
  StreamHeader header;
  int tr, tc;
  PointCloud prev_cloud;
  bool have_prev = false;
  RangeImage last_recon;

  explicit Impl(const StreamHeader& h)
      : header(h), tr(tiles_rows(h.params)), tc(tiles_cols(h.params)) {
    header.params.validate();
  }
};

Decoder::Decoder(const StreamHeader& header) : impl_(std::make_unique<Impl>(header)) {}
Decoder::~Decoder() = default;
Decoder::Decoder(Decoder&&) noexcept = default;
Decoder& Decoder::operator=(Decoder&&) noexcept = default;

const RangeImage& Decoder::last_reconstruction() const { return impl_->last_recon; }

PointCloud Decoder::decode(const FramePacket& packet) {
  Impl& im = *impl_;
  const ProjectionParams& params = im.header.params;

  if (packet.mode == PredictionMode::Inter && !im.have_prev)
    throw MissingReference("inter packet without a decoded reference frame");

  ByteReader r(packet.payload);
  FrameContexts ctx;

  Pose pose;
  IntraSideInfo side;
  RangeImage predicted;
  if (packet.mode == PredictionMode::Inter) {
    for (int rr = 0; rr < 3; ++rr)
      for (int cc = 0; cc < 3; ++cc) pose.rotation(rr, cc) = r.f32();
    for (int rr = 0; rr < 3; ++rr) pose.translation(rr) = r.f32();
    if (!pose.is_rigid(1e-3)) throw CorruptStream("transmitted pose is not a rigid transform");
  } else {
    const std::uint32_t side_len = r.u32();
    side = decode_side_info(r.bytes(side_len),
                            (params.rows + kMacroblockSize - 1) / kMacroblockSize,
                            (params.cols + kMacroblockSize - 1) / kMacroblockSize, ctx);
  }

  const std::uint32_t mask_len = r.u32();
  const auto mask = decode_mask(r.bytes(mask_len),
                                static_cast<std::size_t>(params.rows) * params.cols, ctx);

  ResidualImage res_hat(params.rows, params.cols);
  res_hat.mask = mask;
  res_hat.mode = packet.mode;
  for (int tr = 0; tr < im.tr; ++tr)
    for (int tc = 0; tc < im.tc; ++tc)
      decode_tile(r, tr, tc, im.header.transform, ctx, res_hat);

  if (r.remaining() != 0) throw CorruptStream("trailing bytes in frame payload");

  if (packet.mode == PredictionMode::Inter)
    predicted = project_with_pose(im.prev_cloud, pose, params);

  RangeImage recon = reconstruct_frame(res_hat, packet.mode,
                                       packet.mode == PredictionMode::Intra ? &side : nullptr,
                                       packet.mode == PredictionMode::Inter ? &predicted : nullptr,
                                       params, kRangeFloor);
  PointCloud cloud = back_project(recon);
  im.prev_cloud = cloud;
  im.have_prev = true;
  im.last_recon = std::move(recon);
  return cloud;
}

}  // namespace dcmp
