// SPDX-License-Identifier: Apache-2.0
//
// dcmp: LiDAR range-image codec CLI.
//
// Subcommands: encode, decode, rd-curve, ablation, stream-sim, info.
// Inputs are .bin/.pcd/.ply files, a directory of them, or the built-in
// scene generator via "synthetic:<frames>".

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "dcmp/codec.hpp"
#include "dcmp/eval.hpp"
#include "dcmp/metrics.hpp"
#include "dcmp/pointcloud_io.hpp"
#include "dcmp/projection.hpp"
#include "dcmp/synthetic.hpp"

namespace fs = std::filesystem;
using namespace dcmp;

namespace {

struct InputSpec {
  std::vector<std::string> files;                 // when reading from disk
  std::unique_ptr<SyntheticScene> scene;          // when generated
  std::size_t synthetic_frames = 0;

  std::size_t count() const { return scene ? synthetic_frames : files.size(); }
};

InputSpec resolve_input(const std::string& input, const CodecConfig& cfg,
                        std::uint64_t seed) {
  InputSpec spec;
  if (input.rfind("synthetic:", 0) == 0) {
    spec.synthetic_frames = std::stoul(input.substr(10));
    SyntheticSceneConfig sc;
    sc.seed = seed;
    sc.params = cfg.params;
    spec.scene = std::make_unique<SyntheticScene>(sc);
    return spec;
  }
  if (fs::is_directory(input)) {
    for (const auto& entry : fs::directory_iterator(input)) {
      if (!entry.is_regular_file()) continue;
      const auto ext = entry.path().extension().string();
      if (ext == ".bin" || ext == ".pcd" || ext == ".ply")
        spec.files.push_back(entry.path().string());
    }
    std::sort(spec.files.begin(), spec.files.end());
  } else if (fs::exists(input)) {
    spec.files.push_back(input);
  }
  if (spec.files.empty())
    throw std::runtime_error("no input frames found at '" + input + "'");
  return spec;
}

FrameSequence sequence_of(const InputSpec& spec) {
  if (spec.scene) {
    const SyntheticScene* scene = spec.scene.get();
    return {spec.synthetic_frames,
            [scene](std::size_t i) { return scene->frame(static_cast<int>(i)); }};
  }
  const std::vector<std::string>* files = &spec.files;
  return {spec.files.size(),
          [files](std::size_t i) { return load_point_cloud_file((*files)[i]); }};
}

void write_report(const RunReport& report, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file '" + path + "'");
  report.write_csv(out);
}

struct CommonArgs {
  std::string config_path;
  std::string report_path;
  std::uint64_t seed = 1234;
  CodecConfig config() const {
    return config_path.empty() ? CodecConfig{} : load_codec_config(config_path);
  }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value codec configuration file");
  cmd->add_option("--report", args.report_path, "write a per-frame CSV report");
  cmd->add_option("--seed", args.seed, "seed for synthetic inputs");
}

PoseSource parse_pose_source(const std::string& s) {
  if (s == "file") return PoseSource::File;
  if (s == "icp") return PoseSource::Icp;
  if (s == "none") return PoseSource::None;
  throw CLI::ValidationError("--pose-source", "must be one of file|icp|none");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dcmp - detail-preserving LiDAR range image codec"};
  app.require_subcommand(1);

  // ---- encode ----------------------------------------------------------
  auto* enc_cmd = app.add_subcommand("encode", "encode frames into a .dcmp container");
  CommonArgs enc_args;
  std::string enc_input, enc_output, enc_pose_source = "icp", enc_pose_file, enc_schedule;
  double enc_q = 0.0, enc_target = 0.0;
  enc_cmd->add_option("input", enc_input, "frames: file, directory, or synthetic:<n>")
      ->required();
  enc_cmd->add_option("-o,--out", enc_output, "output container path")->required();
  enc_cmd->add_option("--q", enc_q, "constant base quantization step (rate control off)");
  enc_cmd->add_option("--target-bpp", enc_target, "constant bitrate target, bits per point");
  enc_cmd->add_option("--schedule", enc_schedule, "bitrate schedule file (frame,target_bpp)");
  enc_cmd->add_option("--pose-source", enc_pose_source, "inter prediction poses: file|icp|none");
  enc_cmd->add_option("--pose-file", enc_pose_file, "pose file (12 floats per line)");
  add_common(enc_cmd, enc_args);

  // ---- decode ----------------------------------------------------------
  auto* dec_cmd = app.add_subcommand("decode", "decode a .dcmp container to point clouds");
  std::string dec_input, dec_outdir, dec_format = "bin";
  dec_cmd->add_option("input", dec_input, "container path")->required();
  dec_cmd->add_option("-o,--out", dec_outdir, "output directory")->required();
  dec_cmd->add_option("--format", dec_format, "output format: bin|pcd|ply");

  // ---- info ------------------------------------------------------------
  auto* info_cmd = app.add_subcommand("info", "print container header and frame table");
  std::string info_input;
  info_cmd->add_option("input", info_input, "container path")->required();

  // ---- rd-curve --------------------------------------------------------
  auto* rd_cmd = app.add_subcommand("rd-curve", "constant-Q sweep with model fits");
  CommonArgs rd_args;
  std::string rd_input;
  std::vector<double> rd_qs;
  rd_cmd->add_option("input", rd_input, "frames: file, directory, or synthetic:<n>")
      ->required();
  rd_cmd->add_option("--q", rd_qs, "base steps to sweep (>= 3 values)")
      ->expected(-3);
  add_common(rd_cmd, rd_args);

  // ---- ablation --------------------------------------------------------
  auto* ab_cmd = app.add_subcommand("ablation", "PSNR of adwt/dwt/dct at matched bpp");
  CommonArgs ab_args;
  std::string ab_input, ab_transform = "all";
  std::vector<double> ab_bpps;
  ab_cmd->add_option("input", ab_input, "frames: file, directory, or synthetic:<n>")
      ->required();
  ab_cmd->add_option("--bpp", ab_bpps, "target bits per point")->expected(-1);
  ab_cmd->add_option("--transform", ab_transform, "adwt|dwt|dct|all");
  add_common(ab_cmd, ab_args);

  // ---- stream-sim ------------------------------------------------------
  auto* ss_cmd = app.add_subcommand("stream-sim", "rate-controlled streaming simulation");
  CommonArgs ss_args;
  std::string ss_input, ss_schedule, ss_output;
  ss_cmd->add_option("input", ss_input, "frames: file, directory, or synthetic:<n>")
      ->required();
  ss_cmd->add_option("--schedule", ss_schedule, "bitrate schedule file")->required();
  ss_cmd->add_option("-o,--out", ss_output, "optional output container path");
  add_common(ss_cmd, ss_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*enc_cmd) {
      CodecConfig cfg = enc_args.config();
      cfg.pose_source = parse_pose_source(enc_pose_source);
      if (enc_q > 0.0) cfg.q = enc_q;

      EncodeOptions opts;
      if (!enc_schedule.empty()) opts.schedule = load_schedule(enc_schedule);
      if (enc_target > 0.0 && !opts.schedule) opts.target_bpp = enc_target;
      if (cfg.pose_source == PoseSource::File) {
        if (enc_pose_file.empty())
          throw std::runtime_error("--pose-source file requires --pose-file");
        opts.poses = load_pose_file(enc_pose_file);
      }

      const InputSpec input = resolve_input(enc_input, cfg, enc_args.seed);
      std::ofstream out(enc_output, std::ios::binary);
      if (!out) throw std::runtime_error("cannot open '" + enc_output + "' for writing");
      opts.container_out = &out;
      const RunReport report = run_encode(sequence_of(input), cfg, opts);
      write_report(report, enc_args.report_path);
      std::cout << "encoded " << report.rows.size() << " frames, mean " << report.mean_bpp
                << " bpp, mean PSNR " << report.mean_psnr_db << " dB\n";
    } else if (*dec_cmd) {
      const auto bytes = read_file_bytes(dec_input);
      StreamReader reader(bytes);
      Decoder decoder(reader.header());
      fs::create_directories(dec_outdir);
      CloudFormat fmt = CloudFormat::KittiBin;
      std::string ext = ".bin";
      if (dec_format == "pcd") { fmt = CloudFormat::PcdAscii; ext = ".pcd"; }
      else if (dec_format == "ply") { fmt = CloudFormat::PlyAscii; ext = ".ply"; }
      else if (dec_format != "bin") throw std::runtime_error("unknown --format");

      std::size_t n = 0;
      while (!reader.done()) {
        const FramePacket packet = reader.next();
        PointCloud cloud;
        try {
          cloud = decoder.decode(packet);
        } catch (const MissingReference&) {
          std::cerr << "frame " << packet.frame_index << ": no reference yet, skipping\n";
          continue;  // wait for the next keyframe
        }
        char name[32];
        std::snprintf(name, sizeof(name), "%06u%s", packet.frame_index, ext.c_str());
        save_point_cloud_file((fs::path(dec_outdir) / name).string(), cloud, fmt);
        ++n;
      }
      std::cout << "decoded " << n << " frames into " << dec_outdir << "\n";
    } else if (*info_cmd) {
      const auto bytes = read_file_bytes(info_input);
      StreamReader reader(bytes);
      const StreamHeader& h = reader.header();
      std::cout << "grid: " << h.params.rows << " x " << h.params.cols
                << "  elevation: [" << rad_to_deg(h.params.elevation_min) << ", "
                << rad_to_deg(h.params.elevation_max) << "] deg"
                << "  range_max: " << h.params.range_max << " m\n"
                << "transform: " << transform_name(h.transform)
                << "  rate_control: " << (h.rate_control ? "on" : "off") << "\n";
      std::cout << "frame,mode,points,bytes\n";
      while (!reader.done()) {
        const FramePacket p = reader.next();
        std::cout << p.frame_index << ',' << mode_name(p.mode) << ',' << p.point_count << ','
                  << p.byte_size() << '\n';
      }
    } else if (*rd_cmd) {
      if (rd_qs.size() < 3) throw std::runtime_error("rd-curve needs at least 3 --q values");
      const CodecConfig cfg = rd_args.config();
      const InputSpec input = resolve_input(rd_input, cfg, rd_args.seed);
      const RdCurve curve = rd_curve(sequence_of(input), cfg, rd_qs);
      std::ostream* out = &std::cout;
      std::ofstream file;
      if (!rd_args.report_path.empty()) {
        file.open(rd_args.report_path);
        out = &file;
      }
      *out << "q,bpp,mse,psnr_db\n";
      for (const RdPoint& p : curve.points)
        *out << p.q << ',' << p.bpp << ',' << p.mse << ',' << p.psnr_db << '\n';
      *out << "# a_D=" << curve.dq.a_d << " dq_cod=" << curve.dq.cod
           << " a_R=" << curve.rq.a_r << " b_R=" << curve.rq.b_r
           << " rq_cod=" << curve.rq.cod << "\n";
    } else if (*ab_cmd) {
      if (ab_bpps.empty()) ab_bpps = {0.6, 1.0, 1.4, 1.8, 2.2};
      std::vector<TransformKind> ts;
      if (ab_transform == "all")
        ts = {TransformKind::Adwt, TransformKind::UniformDwt, TransformKind::Dct};
      else if (ab_transform == "adwt") ts = {TransformKind::Adwt};
      else if (ab_transform == "dwt") ts = {TransformKind::UniformDwt};
      else if (ab_transform == "dct") ts = {TransformKind::Dct};
      else throw std::runtime_error("unknown --transform");

      const CodecConfig cfg = ab_args.config();
      const InputSpec input = resolve_input(ab_input, cfg, ab_args.seed);
      const auto rows = ablation(sequence_of(input), cfg, ab_bpps, ts);
      std::ostream* out = &std::cout;
      std::ofstream file;
      if (!ab_args.report_path.empty()) {
        file.open(ab_args.report_path);
        out = &file;
      }
      *out << "transform,target_bpp,achieved_bpp,q,psnr_db\n";
      for (const AblationRow& r : rows)
        *out << transform_name(r.transform) << ',' << r.target_bpp << ',' << r.achieved_bpp
             << ',' << r.q << ',' << r.psnr_db << '\n';
    } else if (*ss_cmd) {
      const CodecConfig cfg = ss_args.config();
      const RateSchedule sched = load_schedule(ss_schedule);
      const InputSpec input = resolve_input(ss_input, cfg, ss_args.seed);
      std::ofstream out;
      if (!ss_output.empty()) {
        out.open(ss_output, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open '" + ss_output + "'");
      }
      const RunReport report = stream_sim(sequence_of(input), cfg, sched,
                                          ss_output.empty() ? nullptr : &out);
      write_report(report, ss_args.report_path);
      std::cout << "frames: " << report.rows.size() << "  mean bpp: " << report.mean_bpp
                << "  avg BE: " << 100.0 * report.avg_bitrate_error << "%"
                << "  peak BE: " << 100.0 * report.peak_bitrate_error << "%\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
