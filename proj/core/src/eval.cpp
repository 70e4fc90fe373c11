// SPDX-License-Identifier: Apache-2.0
#include "dcmp/eval.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "dcmp/metrics.hpp"

namespace dcmp {
namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  if (std::isinf(v))
    ss << (v > 0 ? "inf" : "-inf");
  else
    ss << std::fixed << std::setprecision(prec) << v;
  return ss.str();
}

}  // namespace

const char* transform_name(TransformKind t) {
  switch (t) {
    case TransformKind::Adwt: return "adwt";
    case TransformKind::UniformDwt: return "dwt";
    default: return "dct";
  }
}

const char* mode_name(PredictionMode m) {
  return m == PredictionMode::Intra ? "intra" : "inter";
}

void RunReport::recompute_aggregates() {
  mean_bpp = 0.0;
  mean_psnr_db = 0.0;
  total_encode_ms = 0.0;
  total_decode_ms = 0.0;
  avg_bitrate_error = 0.0;
  peak_bitrate_error = 0.0;
  std::size_t psnr_n = 0, be_n = 0;
  for (const FrameRow& r : rows) {
    mean_bpp += r.bpp;
    total_encode_ms += r.encode_ms;
    total_decode_ms += r.decode_ms;
    if (std::isfinite(r.psnr_db)) {
      mean_psnr_db += r.psnr_db;
      ++psnr_n;
    }
    if (r.target_bpp) {
      const double be = std::abs(r.bpp - *r.target_bpp) / *r.target_bpp;
      avg_bitrate_error += be;
      peak_bitrate_error = std::max(peak_bitrate_error, be);
      ++be_n;
    }
  }
  if (!rows.empty()) mean_bpp /= static_cast<double>(rows.size());
  if (psnr_n > 0) mean_psnr_db /= static_cast<double>(psnr_n);
  if (be_n > 0) avg_bitrate_error /= static_cast<double>(be_n);
}

void RunReport::write_csv(std::ostream& out) const {
  out << "frame,mode,bytes,bpp,target_bpp,encode_ms,decode_ms,mse,psnr_db\n";
  for (const FrameRow& r : rows) {
    out << r.index << ',' << mode_name(r.mode) << ',' << r.bytes << ',' << fmt(r.bpp) << ','
        << (r.target_bpp ? fmt(*r.target_bpp) : std::string("")) << ',' << fmt(r.encode_ms, 3)
        << ',' << fmt(r.decode_ms, 3) << ',' << fmt(r.mse, 9) << ',' << fmt(r.psnr_db, 4)
        << '\n';
  }
  out << "# mean_bpp=" << fmt(mean_bpp) << " mean_psnr_db=" << fmt(mean_psnr_db, 4)
      << " avg_be=" << fmt(avg_bitrate_error) << " peak_be=" << fmt(peak_bitrate_error)
      << " encode_ms=" << fmt(total_encode_ms, 3) << " decode_ms=" << fmt(total_decode_ms, 3)
      << "\n";
}

RunReport run_encode(const FrameSequence& frames, const CodecConfig& config,
                     const EncodeOptions& options) {
  const bool rate_controlled = options.schedule.has_value() || options.target_bpp.has_value();
  if (config.pose_source == PoseSource::File && options.poses.size() < frames.count)
    throw std::runtime_error("pose source is 'file' but fewer poses than frames were given");

  Encoder encoder(config);
  Decoder decoder(config.header(rate_controlled));
  std::unique_ptr<StreamWriter> writer;
  if (options.container_out)
    writer = std::make_unique<StreamWriter>(*options.container_out,
                                            config.header(rate_controlled));

  RunReport report;
  report.rows.reserve(frames.count);
  for (std::size_t i = 0; i < frames.count; ++i) {
    const PointCloud cloud = frames.get(i);
    std::optional<double> target;
    if (options.schedule)
      target = options.schedule->target_for(static_cast<std::uint32_t>(i));
    else if (options.target_bpp)
      target = options.target_bpp;
    std::optional<Pose> pose;
    if (config.pose_source == PoseSource::File) pose = options.poses[i];

    FrameStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    const FramePacket packet = encoder.encode(cloud, target, pose, &stats);
    const double enc_ms = ms_since(t0);

    double dec_ms = 0.0;
    if (options.verify_decode) {
      const auto t1 = std::chrono::steady_clock::now();
      decoder.decode(packet);
      dec_ms = ms_since(t1);
      if (!(decoder.last_reconstruction() == encoder.last_reconstruction()))
        throw std::runtime_error("encoder/decoder reconstruction mismatch at frame " +
                                 std::to_string(i));
    }
    if (writer) writer->write(packet);

    FrameRow row;
    row.index = stats.frame_index;
    row.mode = stats.mode;
    row.bytes = stats.packet_bytes;
    row.bpp = stats.bpp;
    row.target_bpp = target;
    row.encode_ms = enc_ms;
    row.decode_ms = dec_ms;
    row.mse = stats.mse;
    row.psnr_db = stats.psnr_db;
    report.rows.push_back(row);
  }
  report.recompute_aggregates();
  return report;
}

RdCurve rd_curve(const FrameSequence& frames, const CodecConfig& config,
                 const std::vector<double>& q_values) {
  if (q_values.size() < 3)
    throw DegenerateFit("rd_curve: need at least 3 step values");
  RdCurve curve;
  std::vector<std::pair<double, double>> qd, qr;
  for (double q : q_values) {
    CodecConfig cfg = config;
    cfg.q = q;
    EncodeOptions opts;
    opts.verify_decode = false;
    const RunReport rep = run_encode(frames, cfg, opts);
    double mse_sum = 0.0;
    for (const FrameRow& r : rep.rows) mse_sum += r.mse;
    RdPoint pt;
    pt.q = q;
    pt.bpp = rep.mean_bpp;
    pt.mse = rep.rows.empty() ? 0.0 : mse_sum / static_cast<double>(rep.rows.size());
    pt.psnr_db = 10.0 * std::log10(config.params.range_max * config.params.range_max /
                                   std::max(pt.mse, 1e-300));
    curve.points.push_back(pt);
    qd.emplace_back(q, pt.mse);
    qr.emplace_back(q, pt.bpp);
  }
  curve.dq = fit_dq_model(qd);
  curve.rq = fit_rq_model(qr);
  return curve;
}

namespace {

// Mean bpp and PSNR of a constant-Q run with a given transform.
std::pair<double, double> probe_bpp(const FrameSequence& frames, CodecConfig cfg, double q) {
  cfg.q = q;
  EncodeOptions opts;
  opts.verify_decode = false;
  const RunReport rep = run_encode(frames, cfg, opts);
  double mse_sum = 0.0;
  for (const FrameRow& r : rep.rows) mse_sum += r.mse;
  const double m = rep.rows.empty() ? 0.0 : mse_sum / static_cast<double>(rep.rows.size());
  const double p =
      10.0 * std::log10(cfg.params.range_max * cfg.params.range_max / std::max(m, 1e-300));
  return {rep.mean_bpp, p};
}

}  // namespace

std::vector<AblationRow> ablation(const FrameSequence& frames, const CodecConfig& config,
                                  const std::vector<double>& bpp_targets,
                                  const std::vector<TransformKind>& transforms,
                                  double tolerance) {
  std::vector<AblationRow> rows;
  for (TransformKind t : transforms) {
    CodecConfig cfg = config;
    cfg.transform = t;
    for (double target : bpp_targets) {
      // bpp decreases monotonically in the step; bisect on log q.
      double lo = std::log(kQuantStepMin), hi = std::log(kQuantStepMax);
      AblationRow best;
      best.transform = t;
      best.target_bpp = target;
      double best_err = std::numeric_limits<double>::infinity();
      for (int iter = 0; iter < 24; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double q = std::exp(mid);
        const auto [bpp, psnr_db] = probe_bpp(frames, cfg, q);
        const double err = std::abs(bpp - target) / target;
        if (err < best_err) {
          best_err = err;
          best.achieved_bpp = bpp;
          best.q = q;
          best.psnr_db = psnr_db;
        }
        if (err <= tolerance * 0.5) break;
        (bpp > target ? lo : hi) = mid;
      }
      if (best_err > tolerance)
        throw std::runtime_error(std::string("ablation: cannot reach ") + fmt(target) +
                                 " bpp with transform " + transform_name(t));
      rows.push_back(best);
    }
  }
  return rows;
}

RunReport stream_sim(const FrameSequence& frames, const CodecConfig& config,
                     const RateSchedule& schedule, std::ostream* container_out) {
  EncodeOptions opts;
  opts.schedule = schedule;
  opts.container_out = container_out;
  return run_encode(frames, config, opts);
}

}  // namespace dcmp
