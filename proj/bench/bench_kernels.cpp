// Copyright 2026 The wpdeeg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "wpdeeg/features.hpp"
#include "wpdeeg/gbdt.hpp"
#include "wpdeeg/preprocess.hpp"
#include "wpdeeg/random.hpp"
#include "wpdeeg/signal_io.hpp"

using namespace wpdeeg;

namespace {

const SegmentArray& segments() {
  static const SegmentArray segs = preprocess_recording(synth_recording(ClassLabel::kAbnormal, 160.0, 1));
  return segs;
}

struct SplitData {
  DenseMatrix X;
  BinMap map;
  BinnedMatrix B;
  std::vector<double> g, h;
  std::vector<std::size_t> rows;
};

const SplitData& split_data() {
  static const SplitData d = [] {
    Rng rng(5);
    DenseMatrix X(1000, 4032);
    for (std::size_t r = 0; r < X.rows(); ++r) {
      for (std::size_t c = 0; c < X.cols(); ++c) X(r, c) = rng.normal();
    }
    BinMap map = build_bin_map(X, 255);
    BinnedMatrix B(X, map);
    std::vector<double> g(X.rows()), h(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
      const auto gh = logistic_grad_hess(static_cast<int>(rng.below(2)), rng.normal());
      g[r] = gh.g;
      h[r] = gh.h;
    }
    std::vector<std::size_t> rows(X.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return SplitData{std::move(X), std::move(map), std::move(B), std::move(g), std::move(h), std::move(rows)};
  }();
  return d;
}

struct ModelData {
  GbdtModel model;
  DenseMatrix X;
};

const ModelData& model_data() {
  static const ModelData d = [] {
    Rng rng(9);
    DenseMatrix X(2000, 64);
    std::vector<int> y(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
      for (std::size_t c = 0; c < X.cols(); ++c) X(r, c) = rng.normal();
      y[r] = X(r, 0) + X(r, 1) * X(r, 2) + 0.3 * rng.normal() > 0 ? 1 : 0;
    }
    TrainParams p;
    p.n_estimators = 300;
    p.max_depth = 6;
    return ModelData{train(X, y, p), std::move(X)};
  }();
  return d;
}

void BM_FeaturizeSegmentsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(featurize_segments_serial(segments()));
}

void BM_FeaturizeSegmentsParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(featurize_segments(segments()));
}

void BM_FindBestSplitSerial(benchmark::State& state) {
  const auto& d = split_data();
  for (auto _ : state) benchmark::DoNotOptimize(find_best_split_serial(d.rows, d.g, d.h, d.B, {1.0, 20}));
}

void BM_FindBestSplitParallel(benchmark::State& state) {
  const auto& d = split_data();
  for (auto _ : state) benchmark::DoNotOptimize(find_best_split(d.rows, d.g, d.h, d.B, {1.0, 20}));
}

void BM_PredictSerial(benchmark::State& state) {
  const auto& d = model_data();
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba_serial(d.model, d.X));
}

void BM_PredictParallel(benchmark::State& state) {
  const auto& d = model_data();
  for (auto _ : state) benchmark::DoNotOptimize(predict_proba(d.model, d.X));
}

}  // namespace

BENCHMARK(BM_FeaturizeSegmentsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FeaturizeSegmentsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FindBestSplitSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FindBestSplitParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
