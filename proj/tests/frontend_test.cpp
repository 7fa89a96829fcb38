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

#include "segmenter/frontend.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"

#include "segmenter/audio_io.hpp"

using namespace segmenter;

TEST_CASE("radix-2 FFT matches a naive DFT") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  const int n = 64;
  std::vector<double> re(n), im(n);
  for (int i = 0; i < n; ++i) {
    re[i] = dist(rng);
    im[i] = dist(rng);
  }
  auto yre = re, yim = im;
  fft_complex(yre, yim);
  for (int k = 0; k < n; ++k) {
    std::complex<double> ref = 0;
    for (int i = 0; i < n; ++i)
      ref += std::complex<double>(re[i], im[i]) *
             std::polar(1.0, -2 * std::numbers::pi * k * i / n);
    CHECK(std::abs(std::complex<double>(yre[k], yim[k]) - ref) < 1e-9);
  }
}

TEST_CASE("a 2 s clip yields 200 frames and a 1 kHz tone peaks at bin 32") {
  FrontendConfig cfg;
  AudioClip clip;
  clip.recording_id = "tone";
  clip.channels.assign(1, std::vector<double>(32000));
  for (int64_t i = 0; i < 32000; ++i)
    clip.channels[0][i] =
        0.5 * std::sin(2 * std::numbers::pi * 1000.0 * i / 16000.0);
  const auto spec = stft(clip, cfg);
  CHECK(spec.num_channels == 1);
  CHECK(spec.num_frames == 200);
  CHECK(spec.num_bins == 257);
  // 1000 Hz / (16000/512 Hz per bin) = bin 32, away from edge frames.
  for (int64_t t = 5; t < 195; ++t) {
    int best = 0;
    for (int f = 1; f < 257; ++f)
      if (spec.at(0, t, f) > spec.at(0, t, best)) best = f;
    CHECK(best == 32);
  }
}

TEST_CASE("frame count is ceil(samples/hop) including partial tails") {
  FrontendConfig cfg;
  AudioClip clip;
  clip.recording_id = "tail";
  clip.channels.assign(1, std::vector<double>(16000 + 80, 0.01));
  const auto spec = stft(clip, cfg);
  CHECK(spec.num_frames == 101);  // 100 full hops + padded tail frame
}

TEST_CASE("mel filterbank rows are nonnegative and cover the band") {
  FrontendConfig cfg;
  const auto fb = mel_filterbank(cfg);  // (num_mel, num_bins)
  REQUIRE(fb.size() == static_cast<size_t>(cfg.num_mel) * cfg.num_bins());
  for (int k = 0; k < cfg.num_mel; ++k) {
    double row_sum = 0;
    for (int f = 0; f < cfg.num_bins(); ++f) {
      const double v = fb[static_cast<size_t>(k) * cfg.num_bins() + f];
      CHECK(v >= 0.0);
      row_sum += v;
    }
    CHECK(row_sum > 0.0);  // no silent filter
  }
  // Filter centers (argmax bins) are nondecreasing in filter index.
  int prev_center = -1;
  for (int k = 0; k < cfg.num_mel; ++k) {
    int center = 0;
    for (int f = 1; f < cfg.num_bins(); ++f)
      if (fb[static_cast<size_t>(k) * cfg.num_bins() + f] >
          fb[static_cast<size_t>(k) * cfg.num_bins() + center])
        center = f;
    CHECK(center >= prev_center);
    prev_center = center;
  }
}

TEST_CASE("log-mel features have the configured shape and floor") {
  FrontendConfig cfg;
  AudioClip clip;
  clip.recording_id = "silence";
  clip.channels.assign(1, std::vector<double>(32000, 0.0));
  const auto feats = log_mel(stft(clip, cfg), 0, cfg);
  CHECK(feats.num_frames == 200);
  CHECK(feats.num_features == cfg.num_mel);
  for (int64_t t = 0; t < feats.num_frames; ++t)
    for (int f = 0; f < feats.num_features; ++f)
      CHECK(feats.at(t, f) == doctest::Approx(std::log(cfg.log_floor)));
}

TEST_CASE("MVN is zero-mean unit-variance and idempotent") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-3, 7);
  FeatureSequence f;
  f.num_frames = 150;
  f.num_features = 16;
  f.values.resize(150 * 16);
  for (auto& v : f.values) v = dist(rng);
  auto n = mvn(f);
  for (int d = 0; d < 16; ++d) {
    double mean = 0, var = 0;
    for (int64_t t = 0; t < 150; ++t) mean += n.at(t, d);
    mean /= 150;
    for (int64_t t = 0; t < 150; ++t)
      var += (n.at(t, d) - mean) * (n.at(t, d) - mean);
    var /= 150;
    CHECK(std::abs(mean) < 1e-10);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  }
  auto nn = mvn(n);
  for (size_t i = 0; i < nn.values.size(); ++i)
    CHECK(nn.values[i] == doctest::Approx(n.values[i]).epsilon(1e-9));

  // Constant dimensions normalize to zero rather than dividing by ~0.
  FeatureSequence c;
  c.num_frames = 10;
  c.num_features = 1;
  c.values.assign(10, 4.2);
  auto z = mvn(c);
  for (auto v : z.values) CHECK(v == 0.0);
}
