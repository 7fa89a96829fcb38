// Copyright (c) 2026 The segmenter authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Microbenchmarks for the training-dominant kernels.

#include <random>

#include <benchmark/benchmark.h>

#include "segmenter/frontend.hpp"
#include "segmenter/sacc.hpp"
#include "segmenter/tensor.hpp"

using namespace segmenter;

namespace {

Tensor random_tensor(std::vector<int64_t> shape, std::mt19937_64& rng,
                     bool requires_grad) {
  int64_t n = 1;
  for (auto d : shape) n *= d;
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<double> data(static_cast<size_t>(n));
  for (auto& v : data) v = dist(rng);
  return Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

void BM_Stft2sWindow(benchmark::State& state) {
  AudioClip clip;
  clip.recording_id = "bench";
  clip.channels.assign(1, std::vector<double>(32000));
  for (int64_t i = 0; i < 32000; ++i)
    clip.channels[0][i] = std::sin(0.37 * static_cast<double>(i));
  FrontendConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(stft(clip, cfg));
}
BENCHMARK(BM_Stft2sWindow);

void BM_Conv1dForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  auto x = random_tensor({8, 32, 200}, rng, false);
  auto w = random_tensor({32, 32, 3}, rng, false);
  auto b = random_tensor({32}, rng, false);
  for (auto _ : state) benchmark::DoNotOptimize(ops::conv1d(x, w, b, 4));
}
BENCHMARK(BM_Conv1dForward);

void BM_Conv1dForwardBackward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  auto w = random_tensor({32, 32, 3}, rng, true);
  auto b = random_tensor({32}, rng, true);
  for (auto _ : state) {
    auto x = random_tensor({8, 32, 200}, rng, false);
    auto loss = ops::mean(ops::conv1d(x, w, b, 4));
    w.zero_grad();
    b.zero_grad();
    backward(loss);
    benchmark::DoNotOptimize(w.grad().data());
  }
}
BENCHMARK(BM_Conv1dForwardBackward);

void BM_ChannelCombine(benchmark::State& state) {
  std::mt19937_64 rng(3);
  SaccConfig cfg;
  cfg.attention_dim = 64;
  Spectrogram spec;
  spec.recording_id = "bench";
  spec.num_channels = 4;
  spec.num_frames = 200;
  spec.num_bins = cfg.input_dim;
  spec.magnitude.resize(static_cast<size_t>(4) * 200 * cfg.input_dim);
  std::uniform_real_distribution<double> mag(0.01, 2.0);
  for (auto& v : spec.magnitude) v = mag(rng);
  const auto params = SaccParams::init(cfg, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(sacc_combine(spec, params, cfg, nullptr));
}
BENCHMARK(BM_ChannelCombine);

}  // namespace

BENCHMARK_MAIN();
