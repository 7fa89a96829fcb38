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

#include "segmenter/adapter.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace segmenter;
using testutil::random_tensor;

namespace {

// Independent piecewise-linear interpolation oracle: output frame i of 200
// samples source position i * 98 / 199 in a 99-frame sequence.
double interp_oracle(const std::vector<double>& col, int i) {
  const double pos = static_cast<double>(i) * 98.0 / 199.0;
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = std::min<size_t>(lo + 1, 98);
  const double frac = pos - std::floor(pos);
  return (1 - frac) * col[lo] + frac * col[hi];
}

}  // namespace

TEST_CASE("interpolation-initialized alignment matches the oracle") {
  std::mt19937_64 rng(31);
  auto params = AlignmentParams::init(/*with_projection=*/false, 6);
  for (int trial = 0; trial < 100; ++trial) {
    auto emb = random_tensor({99, 6}, rng, false, -2, 2);
    auto out = align(emb, params);
    REQUIRE(out.shape() == std::vector<int64_t>{200, 6});
    for (int i = 0; i < 200; ++i)
      for (int d = 0; d < 6; ++d) {
        std::vector<double> col(99);
        for (int t = 0; t < 99; ++t) col[t] = emb.data()[t * 6 + d];
        CHECK(std::abs(out.data()[i * 6 + d] - interp_oracle(col, i)) < 1e-6);
      }
  }
}

TEST_CASE("alignment is linear in its input") {
  std::mt19937_64 rng(32);
  auto params = AlignmentParams::init(false, 4);
  auto a = random_tensor({99, 4}, rng, false);
  auto b = random_tensor({99, 4}, rng, false);
  auto sum = Tensor::zeros({99, 4});
  for (size_t i = 0; i < sum.data().size(); ++i)
    sum.data()[i] = 2.0 * a.data()[i] - 3.0 * b.data()[i];
  auto oa = align(a, params), ob = align(b, params), os = align(sum, params);
  for (size_t i = 0; i < os.data().size(); ++i)
    CHECK(os.data()[i] ==
          doctest::Approx(2.0 * oa.data()[i] - 3.0 * ob.data()[i])
              .epsilon(1e-9));
}

TEST_CASE("identity-initialized projection is a no-op at init") {
  std::mt19937_64 rng(33);
  auto with = AlignmentParams::init(true, 5);
  auto without = AlignmentParams::init(false, 5);
  auto emb = random_tensor({99, 5}, rng, false);
  auto a = align(emb, with), b = align(emb, without);
  for (size_t i = 0; i < a.data().size(); ++i)
    CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-12));
}

TEST_CASE("alignment rejects the wrong number of input frames") {
  auto params = AlignmentParams::init(false, 3);
  CHECK_THROWS(align(Tensor::zeros({98, 3}), params));
}

TEST_CASE("embedding windows zero-pad past the end and mask padded frames") {
  EmbeddingFile emb;
  emb.recording_id = "e";
  emb.dim = 2;
  emb.num_frames = 120;
  emb.values.resize(240);
  for (size_t i = 0; i < emb.values.size(); ++i)
    emb.values[i] = static_cast<float>(i);
  std::vector<uint8_t> mask;
  auto w = embedding_window(emb, 60, &mask);
  REQUIRE(w.shape() == std::vector<int64_t>{99, 2});
  REQUIRE(mask.size() == 99);
  for (int t = 0; t < 99; ++t) {
    const bool real = 60 + t < 120;
    CHECK(static_cast<int>(mask[t]) == (real ? 1 : 0));
    for (int d = 0; d < 2; ++d)
      CHECK(w.data()[t * 2 + d] ==
            doctest::Approx(real ? emb.at(60 + t, d) : 0.0));
  }
}
