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

#include "segmenter/model.hpp"

#include <filesystem>
#include <random>

#include "doctest.h"
#include "test_util.hpp"

#include "segmenter/checkpoint.hpp"
#include "segmenter/system.hpp"

using namespace segmenter;
using testutil::random_tensor;
using testutil::TempDir;

namespace {

SegmenterModel small_model(Task task, std::mt19937_64& rng, int input_dim = 8) {
  TcnConfig tcn;
  tcn.blocks_per_repeat = 3;
  tcn.repeats = 2;
  tcn.hidden_channels = 6;
  tcn.dilations = {1, 2, 4};
  HeadConfig head;
  head.task = task;
  return SegmenterModel(input_dim, tcn, head, rng);
}

PosteriorSequence posterior_from(const std::vector<double>& rows, Task task,
                                 int C) {
  PosteriorSequence p;
  p.task = task;
  p.num_classes = C;
  p.num_frames = static_cast<int64_t>(rows.size()) / C;
  p.values = rows;
  return p;
}

}  // namespace

TEST_CASE("posterior rows sum to one for every task head") {
  std::mt19937_64 rng(41);
  for (Task task : {Task::kJoint, Task::kVad, Task::kOsd}) {
    auto model = small_model(task, rng);
    auto f = random_tensor({50, 8}, rng, false);
    const auto post = model.posterior(f);
    const int C = task == Task::kJoint ? 3 : 2;
    REQUIRE(post.num_classes == C);
    REQUIRE(post.num_frames == 50);
    for (int64_t t = 0; t < 50; ++t) {
      double s = 0;
      for (int c = 0; c < C; ++c) {
        CHECK(post.at(t, c) >= 0);
        s += post.at(t, c);
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("receptive field follows the dilation schedule") {
  std::mt19937_64 rng(42);
  auto model = small_model(Task::kJoint, rng);
  // kernel 3 → each block widens by 2*d per side: 2*(1+2+4)*2 repeats = 28.
  CHECK(model.receptive_field() == 1 + 2 * 2 * (1 + 2 + 4));

  TcnConfig full;  // defaults: 5 blocks x 3 repeats, dilations 1..16
  HeadConfig head;
  SegmenterModel big(64, full, head, rng);
  CHECK(big.receptive_field() == 1 + 2 * 3 * (1 + 2 + 4 + 8 + 16));
}

TEST_CASE("outputs outside the receptive field ignore input perturbations") {
  std::mt19937_64 rng(43);
  auto model = small_model(Task::kJoint, rng);
  const int rf = static_cast<int>(model.receptive_field());
  const int64_t T = 120;
  auto f = random_tensor({T, 8}, rng, false);
  const auto base = model.posterior(f);

  // Perturb the last frame; outputs more than rf/2 frames away must not move.
  auto g = Tensor::from_data({T, 8}, f.data());
  for (int d = 0; d < 8; ++d) g.data()[(T - 1) * 8 + d] += 10.0;
  const auto moved = model.posterior(g);
  const int64_t safe_end = T - 1 - rf / 2;
  for (int64_t t = 0; t < safe_end; ++t)
    for (int c = 0; c < 3; ++c)
      CHECK(moved.at(t, c) == doctest::Approx(base.at(t, c)).epsilon(1e-12));
  // ...and some frame near the end does move.
  bool any_moved = false;
  for (int64_t t = safe_end; t < T; ++t)
    for (int c = 0; c < 3; ++c)
      if (std::abs(moved.at(t, c) - base.at(t, c)) > 1e-9) any_moved = true;
  CHECK(any_moved);
}

TEST_CASE("joint merging: overlap implies speech, ties go to the lower class") {
  // Exhaustive simplex walk at step 0.01.
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100 - i; ++j) {
      const double p0 = i / 100.0, p1 = j / 100.0, p2 = 1.0 - p0 - p1;
      auto post = posterior_from({p0, p1, p2}, Task::kJoint, 3);
      std::vector<uint8_t> vad, osd;
      merge_joint(post, &vad, &osd);
      if (osd[0]) CHECK(vad[0]);
    }
  // Exact tie between class 0 and class 2 → class 0 (no speech).
  auto tie = posterior_from({0.4, 0.2, 0.4}, Task::kJoint, 3);
  std::vector<uint8_t> vad, osd;
  merge_joint(tie, &vad, &osd);
  CHECK(vad[0] == 0);
  CHECK(osd[0] == 0);
}

TEST_CASE("argmax decisions are invariant under monotone row transforms") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> dist(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    double p[3] = {dist(rng), dist(rng), dist(rng)};
    const double z = p[0] + p[1] + p[2];
    for (auto& v : p) v /= z;
    auto post = posterior_from({p[0], p[1], p[2]}, Task::kJoint, 3);
    std::vector<uint8_t> vad0, osd0;
    merge_joint(post, &vad0, &osd0);
    // Strictly monotone map x -> x^3 preserves the argmax.
    auto cubed =
        posterior_from({p[0] * p[0] * p[0], p[1] * p[1] * p[1],
                        p[2] * p[2] * p[2]},
                       Task::kJoint, 3);
    std::vector<uint8_t> vad1, osd1;
    merge_joint(cubed, &vad1, &osd1);
    CHECK(vad0 == vad1);
    CHECK(osd0 == osd1);
  }
}

TEST_CASE("2-class binarization respects the threshold boundary") {
  auto post = posterior_from({0.6, 0.4, 0.5, 0.5, 0.45, 0.55}, Task::kVad, 2);
  auto dec = binarize_2class(post, 0.5);
  CHECK(dec == std::vector<uint8_t>{0, 1, 1});
  CHECK_THROWS(binarize_2class(post, 0.0));
  CHECK_THROWS(binarize_2class(post, 1.0));
  auto joint = posterior_from({0.2, 0.3, 0.5}, Task::kJoint, 3);
  CHECK_THROWS(binarize_2class(joint, 0.5));
}

TEST_CASE("checkpoint round trip reproduces posteriors bit-exactly") {
  TempDir dir("ckpt");
  std::mt19937_64 rng(45);
  TcnConfig tcn;
  tcn.hidden_channels = 8;
  FrontendConfig fe;
  SaccConfig sacc;
  auto system = System::create(Task::kJoint, FeaturePath::kLogMel, 0, tcn, fe,
                               sacc, false, 7);
  AudioClip clip;
  clip.recording_id = "c";
  clip.channels.assign(1, std::vector<double>(32000));
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (auto& v : clip.channels[0]) v = dist(rng);
  const auto before = system.infer(clip);

  save_checkpoint(dir.file("m.ckpt"), system.to_checkpoint());
  const auto loaded = System::from_checkpoint(load_checkpoint(dir.file("m.ckpt")));
  const auto after = loaded.infer(clip);
  REQUIRE(after.num_frames == before.num_frames);
  CHECK(after.values == before.values);  // bit-identical
}

TEST_CASE("parameter names are stable and collisions are rejected") {
  std::mt19937_64 rng(46);
  auto model = small_model(Task::kVad, rng);
  ParamList& params = model.params();
  CHECK(params.total_size() > 0);
  CHECK_THROWS(params.add(params.items.front().first, Tensor::zeros({1})));
}
