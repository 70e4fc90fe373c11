// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcmp/eval.hpp"
#include "dcmp/synthetic.hpp"
#include "testutil.hpp"

using namespace dcmp;

namespace {

FrameSequence scene_frames(const SyntheticScene& scene, std::size_t n) {
  return {n, [&scene](std::size_t i) { return scene.frame(static_cast<int>(i)); }};
}

CodecConfig small_config() {
  CodecConfig cfg;
  cfg.params = test::small_params(64, 512);
  return cfg;
}

SyntheticSceneConfig scene_config(std::uint64_t seed) {
  SyntheticSceneConfig sc;
  sc.seed = seed;
  sc.params = test::small_params(64, 512);
  return sc;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("report aggregates equal recomputation from rows") {
  const SyntheticScene scene(scene_config(81));
  EncodeOptions opts;
  RunReport rep = run_encode(scene_frames(scene, 5), small_config(), opts);
  const RunReport copy = rep;
  rep.recompute_aggregates();
  CHECK(rep.mean_bpp == copy.mean_bpp);
  CHECK(rep.mean_psnr_db == copy.mean_psnr_db);
  CHECK(rep.avg_bitrate_error == copy.avg_bitrate_error);
  CHECK(rep.peak_bitrate_error == copy.peak_bitrate_error);
}

TEST_CASE("schedule targets switch at the listed frame") {
  const RateSchedule sched = parse_schedule("0,2.0\n5,1.0\n");
  CHECK(sched.target_for(0) == 2.0);
  CHECK(sched.target_for(4) == 2.0);
  CHECK(sched.target_for(5) == 1.0);
  CHECK(sched.target_for(100) == 1.0);  // last target persists

  const SyntheticScene scene(scene_config(82));
  const RunReport rep = stream_sim(scene_frames(scene, 8), small_config(), sched);
  for (const FrameRow& r : rep.rows) {
    REQUIRE(r.target_bpp.has_value());
    CHECK(*r.target_bpp == (r.index < 5 ? 2.0 : 1.0));
  }
}

TEST_CASE("schedule parse errors") {
  CHECK_THROWS_AS(parse_schedule("5\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_schedule("0,-1.0\n"), std::runtime_error);
  CHECK_THROWS_AS(RateSchedule{}.target_for(0), std::runtime_error);
}

TEST_CASE("single-frame stream: peak bitrate error equals the average") {
  const SyntheticScene scene(scene_config(83));
  const RateSchedule sched = parse_schedule("0,1.5\n");
  const RunReport rep = stream_sim(scene_frames(scene, 1), small_config(), sched);
  CHECK(rep.peak_bitrate_error == doctest::Approx(rep.avg_bitrate_error).epsilon(1e-12));
}

TEST_CASE("csv output is deterministic for fixed seed and inputs") {
  const SyntheticScene scene(scene_config(84));
  EncodeOptions opts;
  opts.verify_decode = false;  // timing fields vary run to run
  auto make_csv = [&] {
    RunReport rep = run_encode(scene_frames(scene, 3), small_config(), opts);
    for (FrameRow& r : rep.rows) {
      r.encode_ms = 0.0;  // wall-clock is the one legitimately varying field
      r.decode_ms = 0.0;
    }
    rep.recompute_aggregates();
    std::ostringstream ss;
    rep.write_csv(ss);
    return ss.str();
  };
  CHECK(make_csv() == make_csv());
}

TEST_CASE("rd-curve requires at least three steps and fits both models") {
  const SyntheticScene scene(scene_config(85));
  const auto frames = scene_frames(scene, 2);
  CHECK_THROWS_AS(rd_curve(frames, small_config(), {0.1, 0.2}), DegenerateFit);

  const RdCurve curve = rd_curve(frames, small_config(), {0.02, 0.08, 0.3});
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[0].bpp > curve.points[2].bpp);  // rate falls as Q grows
  CHECK(curve.points[0].mse < curve.points[2].mse);  // distortion rises
  CHECK(curve.dq.a_d > 0.0);
  CHECK(curve.rq.a_r > 0.0);
  CHECK(curve.rq.b_r > 0.0);
}

TEST_CASE("identical ablation runs are deterministic") {
  const SyntheticScene scene(scene_config(86));
  const auto frames = scene_frames(scene, 2);
  const auto rows1 = ablation(frames, small_config(), {1.2}, {TransformKind::Adwt});
  const auto rows2 = ablation(frames, small_config(), {1.2}, {TransformKind::Adwt});
  REQUIRE(rows1.size() == 1);
  CHECK(rows1[0].psnr_db == rows2[0].psnr_db);
  CHECK(rows1[0].achieved_bpp == rows2[0].achieved_bpp);
  CHECK(std::abs(rows1[0].achieved_bpp - 1.2) / 1.2 <= 0.02);
}

TEST_CASE("codec config parsing covers every key and rejects bad input") {
  const CodecConfig cfg = parse_codec_config(
      "rows = 32\ncols = 256\nelev_min_deg = -20\nelev_max_deg = 3\n"
      "range_max_m = 80\nt_key_m = 0.7\ntau = 0.5\ng_min = 0.02\nkappa_m = 0.4\n"
      "keyframe_interval = 16\nadwt_alpha = 0.6\nq = 0.1\ndataset = waymo\n");
  CHECK(cfg.params.rows == 32);
  CHECK(cfg.params.cols == 256);
  CHECK(cfg.params.range_max == 80.0);
  CHECK(cfg.t_key == 0.7);
  CHECK(cfg.intra.tau == 0.5);
  CHECK(cfg.intra.g_min == 0.02);
  CHECK(cfg.icp.kappa == 0.4);
  CHECK(cfg.keyframe_interval == 16);
  CHECK(cfg.adwt_alpha == 0.6);
  CHECK(cfg.q == 0.1);
  CHECK(cfg.dataset == RcDataset::Waymo);

  CHECK_THROWS_AS(parse_codec_config("nonsense_key = 1\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_codec_config("rows\n"), std::runtime_error);
  CHECK_THROWS_AS(load_codec_config("/nonexistent/path.cfg"), std::runtime_error);
  CHECK_THROWS_AS(load_pose_file("/nonexistent/poses.txt"), std::runtime_error);
}

TEST_CASE("pose files parse and validate rigidity") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "dcmp_poses_test.txt").string();
  {
    std::ofstream out(path);
    out << "1 0 0 0 1 0 0 0 1 0.5 0 0\n";
    out << "# comment\n";
    out << "1 0 0 0 1 0 0 0 1 0 0 0\n";
  }
  const auto poses = load_pose_file(path);
  REQUIRE(poses.size() == 2);
  CHECK(poses[0].translation.x() == 0.5);
  {
    std::ofstream out(path);
    out << "2 0 0 0 1 0 0 0 1 0 0 0\n";  // not a rotation
  }
  CHECK_THROWS_AS(load_pose_file(path), std::runtime_error);
  std::filesystem::remove(path);
}

}  // TEST_SUITE
