// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "dcmp/adwt.hpp"
#include "dcmp/codec.hpp"
#include "dcmp/entropy.hpp"
#include "dcmp/icp.hpp"
#include "dcmp/prediction.hpp"
#include "dcmp/projection.hpp"
#include "dcmp/synthetic.hpp"

namespace {

using namespace dcmp;

const SyntheticScene& scene() {
  static const SyntheticScene s{};
  return s;
}

void BM_Project(benchmark::State& state) {
  const PointCloud cloud = scene().frame(0);
  const ProjectionParams params = scene().config().params;
  for (auto _ : state) benchmark::DoNotOptimize(project(cloud, params));
}
BENCHMARK(BM_Project)->Unit(benchmark::kMillisecond);

void BM_ForwardDwt3(benchmark::State& state) {
  double block[kBlockPixels];
  for (int i = 0; i < kBlockPixels; ++i) block[i] = 0.01 * (i % 97) - 0.3;
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_dwt3(std::span<const double, kBlockPixels>(block)));
}
BENCHMARK(BM_ForwardDwt3);

void BM_IntraPredict(benchmark::State& state) {
  const RangeImage img = project(scene().frame(0), scene().config().params);
  for (auto _ : state) benchmark::DoNotOptimize(intra_predict(img));
}
BENCHMARK(BM_IntraPredict)->Unit(benchmark::kMillisecond);

void BM_EntropyBlock(benchmark::State& state) {
  QuantizedPyramid p;
  for (int i = 0; i < kBlockPixels; ++i) p.index[i] = (i % 23 == 0) ? (i % 7) - 3 : 0;
  for (auto _ : state) {
    FrameContexts ctx;
    benchmark::DoNotOptimize(encode_block(p, ctx));
  }
}
BENCHMARK(BM_EntropyBlock);

void BM_EstimatePose(benchmark::State& state) {
  const PointCloud prev = scene().frame(0);
  const PointCloud cur = scene().frame(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_pose(prev, cur, scene().config().params));
}
BENCHMARK(BM_EstimatePose)->Unit(benchmark::kMillisecond);

void BM_EncodeFrame(benchmark::State& state) {
  CodecConfig cfg;
  cfg.pose_source = PoseSource::File;
  Encoder enc(cfg);
  (void)enc.encode(scene().frame(0), {}, Pose{});
  const PointCloud cloud = scene().frame(1);
  const Pose pose = scene().relative_pose(0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(enc.encode(cloud, {}, pose));
}
BENCHMARK(BM_EncodeFrame)->Unit(benchmark::kMillisecond);

void BM_DecodeFrame(benchmark::State& state) {
  CodecConfig cfg;
  cfg.pose_source = PoseSource::File;
  Encoder enc(cfg);
  const FramePacket p0 = enc.encode(scene().frame(0), {}, Pose{});
  const FramePacket p1 = enc.encode(scene().frame(1), {}, scene().relative_pose(0, 1));
  for (auto _ : state) {
    Decoder dec(cfg.header(false));
    (void)dec.decode(p0);
    benchmark::DoNotOptimize(dec.decode(p1));
  }
}
BENCHMARK(BM_DecodeFrame)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
