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

#include "segmenter/sacc.hpp"

#include <random>

#include "doctest.h"

using namespace segmenter;

namespace {

Spectrogram random_spec(int M, int64_t T, int F, std::mt19937_64& rng) {
  Spectrogram s;
  s.recording_id = "spec";
  s.num_channels = M;
  s.num_frames = T;
  s.num_bins = F;
  s.magnitude.resize(static_cast<size_t>(M) * T * F);
  std::uniform_real_distribution<double> dist(0.01, 3.0);
  for (auto& v : s.magnitude) v = dist(rng);
  return s;
}

SaccConfig small_cfg(int F) {
  SaccConfig cfg;
  cfg.attention_dim = 8;
  cfg.input_dim = F;
  return cfg;
}

}  // namespace

TEST_CASE("channel weights are rows on the simplex") {
  std::mt19937_64 rng(21);
  const auto cfg = small_cfg(12);
  const auto spec = random_spec(4, 30, 12, rng);
  const auto params = SaccParams::init(cfg, rng);
  const auto w = sacc_weights(spec, params, cfg);
  REQUIRE(w.num_frames == 30);
  REQUIRE(w.num_channels == 4);
  for (int64_t t = 0; t < 30; ++t) {
    double sum = 0;
    for (int m = 0; m < 4; ++m) {
      CHECK(w.at(t, m) >= 0.0);
      sum += w.at(t, m);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("single channel degenerates to weight 1 and identity combination") {
  std::mt19937_64 rng(22);
  const auto cfg = small_cfg(10);
  const auto spec = random_spec(1, 20, 10, rng);
  const auto params = SaccParams::init(cfg, rng);
  const auto w = sacc_weights(spec, params, cfg);
  for (int64_t t = 0; t < 20; ++t) CHECK(w.at(t, 0) == doctest::Approx(1.0));
  ChannelWeights cw;
  const auto combined = sacc_combine(spec, params, cfg, &cw);
  for (int64_t t = 0; t < 20; ++t)
    for (int f = 0; f < 10; ++f)
      CHECK(combined.data()[t * 10 + f] ==
            doctest::Approx(spec.at(0, t, f)).epsilon(1e-12));
}

TEST_CASE("identical channels share the weight equally") {
  std::mt19937_64 rng(23);
  const auto cfg = small_cfg(9);
  auto spec = random_spec(1, 15, 9, rng);
  Spectrogram rep = spec;
  rep.num_channels = 3;
  rep.magnitude.resize(spec.magnitude.size() * 3);
  for (int m = 0; m < 3; ++m)
    std::copy(spec.magnitude.begin(), spec.magnitude.end(),
              rep.magnitude.begin() +
                  static_cast<int64_t>(m) * 15 * 9);
  const auto params = SaccParams::init(cfg, rng);
  const auto w = sacc_weights(rep, params, cfg);
  for (int64_t t = 0; t < 15; ++t)
    for (int m = 0; m < 3; ++m)
      CHECK(w.at(t, m) == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("permuting channels permutes the weights") {
  std::mt19937_64 rng(24);
  const auto cfg = small_cfg(11);
  const auto spec = random_spec(4, 10, 11, rng);
  const auto params = SaccParams::init(cfg, rng);
  const auto w = sacc_weights(spec, params, cfg);

  const std::vector<int> perm{2, 0, 3, 1};
  Spectrogram shuffled = spec;
  for (int m = 0; m < 4; ++m)
    std::copy(spec.magnitude.begin() + perm[m] * 10 * 11,
              spec.magnitude.begin() + (perm[m] + 1) * 10 * 11,
              shuffled.magnitude.begin() + m * 10 * 11);
  const auto ws = sacc_weights(shuffled, params, cfg);
  for (int64_t t = 0; t < 10; ++t)
    for (int m = 0; m < 4; ++m)
      CHECK(ws.at(t, m) == doctest::Approx(w.at(t, perm[m])).epsilon(1e-9));
}

TEST_CASE("combined output is the weight-blended magnitude") {
  std::mt19937_64 rng(25);
  const auto cfg = small_cfg(7);
  const auto spec = random_spec(3, 12, 7, rng);
  const auto params = SaccParams::init(cfg, rng);
  ChannelWeights w;
  const auto combined = sacc_combine(spec, params, cfg, &w);
  for (int64_t t = 0; t < 12; ++t)
    for (int f = 0; f < 7; ++f) {
      double expect = 0;
      for (int m = 0; m < 3; ++m) expect += w.at(t, m) * spec.at(m, t, f);
      CHECK(combined.data()[t * 7 + f] ==
            doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("exported weights support max normalization") {
  std::mt19937_64 rng(26);
  const auto cfg = small_cfg(6);
  const auto spec = random_spec(4, 25, 6, rng);
  const auto params = SaccParams::init(cfg, rng);
  const auto w = sacc_weights(spec, params, cfg);
  const auto raw = export_weights(w, WeightNormalization::kNone);
  const auto norm = export_weights(w, WeightNormalization::kMax);
  REQUIRE(raw.size() == norm.size());
  for (int64_t t = 0; t < 25; ++t) {
    double mx = 0;
    for (int m = 0; m < 4; ++m)
      mx = std::max(mx, norm[static_cast<size_t>(t * 4 + m)]);
    CHECK(mx == doctest::Approx(1.0));
  }
}

TEST_CASE("negative or non-finite magnitudes are rejected") {
  std::mt19937_64 rng(27);
  const auto cfg = small_cfg(5);
  auto spec = random_spec(2, 6, 5, rng);
  const auto params = SaccParams::init(cfg, rng);
  spec.magnitude[7] = -0.5;
  CHECK_THROWS(sacc_weights(spec, params, cfg));
}
