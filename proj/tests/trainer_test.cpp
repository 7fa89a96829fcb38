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

#include "segmenter/trainer.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

#include "segmenter/synth.hpp"

using namespace segmenter;
using testutil::TempDir;

namespace {

Window make_window(std::vector<double> audio, std::vector<int> counts) {
  Window w;
  w.recording_id = "w";
  w.audio.push_back(std::move(audio));
  w.counts = std::move(counts);
  w.mask.assign(w.counts.size(), 1);
  return w;
}

DatasetManifest tiny_manifest(const TempDir& dir, uint64_t seed,
                              double snr_db = 25.0) {
  SynthSpec spec;
  spec.seed = seed;
  spec.num_recordings = 4;
  spec.recording_length_s = 10.0;
  spec.num_speakers = 3;
  spec.overlap_ratio = 0.25;
  spec.noise_snr_db = snr_db;
  spec.train_recordings = 2;
  spec.dev_recordings = 1;
  spec.eval_recordings = 1;
  return write_corpus(generate(spec), dir.path().string(),
                      /*emit_embeddings=*/true);
}

TrainConfig tiny_config(Task task) {
  TrainConfig cfg;
  cfg.task = task;
  cfg.batch_size = 8;
  cfg.max_epochs = 2;
  cfg.patience = 5;
  cfg.seed = 13;
  cfg.tcn.hidden_channels = 8;
  return cfg;
}

}  // namespace

TEST_CASE("overlap-sum augmentation adds audio and raw counts") {
  auto a = make_window({0.5, -0.5, 0.25, 0.0}, {1, 2});
  auto b = make_window({0.25, 0.25, 0.25, 0.25}, {1, 1});
  auto mixed = mix_augment(a, b);
  CHECK(mixed.audio[0] == std::vector<double>{0.75, -0.25, 0.5, 0.25});
  CHECK(mixed.counts == std::vector<int>{2, 3});  // capped later, at labeling

  // Clipping mixes are renormalized to peak 1.
  auto loud = make_window({0.9, -0.8, 0.7, 0.1}, {1, 1});
  auto mixed2 = mix_augment(loud, loud);
  double peak = 0;
  for (double v : mixed2.audio[0]) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(1.0));
  CHECK(mixed2.audio[0][0] == doctest::Approx(1.8 / 1.8));

  CHECK_THROWS(mix_augment(a, make_window({0.1, 0.2}, {1})));
}

TEST_CASE("additive noise hits the requested SNR over speech frames") {
  std::mt19937_64 rng(71);
  const int64_t n = 16000;
  std::vector<std::vector<double>> audio(1, std::vector<double>(n));
  for (int64_t i = 0; i < n; ++i)
    audio[0][i] = 0.3 * std::sin(2 * 3.141592653589793 * 440.0 * i / 16000.0);
  // Speech only in the first half.
  std::vector<int> counts(100, 0);
  for (int t = 0; t < 50; ++t) counts[t] = 1;
  auto noisy = audio;
  add_noise(noisy, counts, 10.0, rng);
  double sig = 0, noi = 0;
  for (int64_t i = 0; i < 8000; ++i) {
    sig += audio[0][i] * audio[0][i];
    noi += (noisy[0][i] - audio[0][i]) * (noisy[0][i] - audio[0][i]);
  }
  const double snr = 10.0 * std::log10(sig / noi);
  CHECK(snr == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("train/report config JSON round trips") {
  TrainConfig cfg = tiny_config(Task::kOsd);
  cfg.feature_path = FeaturePath::kSacc;
  cfg.augment_prob = 0.25;
  cfg.optimizer.learning_rate = 5e-4;
  cfg.warm_start = "prev.ckpt";
  const auto back = train_config_from_json(train_config_to_json(cfg));
  CHECK(back.task == Task::kOsd);
  CHECK(back.feature_path == FeaturePath::kSacc);
  CHECK(back.augment_prob == 0.25);
  CHECK(back.optimizer.learning_rate == 5e-4);
  CHECK(back.warm_start == "prev.ckpt");
  CHECK(back.tcn.hidden_channels == 8);

  TrainReport report;
  report.best_epoch = 3;
  report.best_metric = 0.87;
  report.param_count = 1234;
  report.epochs.push_back({0, std::nan(""), 0.5, 0.4, 0.45});
  report.epochs.push_back({1, 1.25, 0.8, 0.7, 0.75});
  const auto rback = train_report_from_json(train_report_to_json(report));
  CHECK(rback.best_epoch == 3);
  CHECK(rback.param_count == 1234);
  REQUIRE(rback.epochs.size() == 2);
  CHECK(rback.epochs[1].train_loss == 1.25);
  CHECK(train_report_to_csv(report).find("epoch,train_loss") == 0);
}

TEST_CASE("fixed seeds reproduce training bit for bit") {
  TempDir dir("det");
  const auto manifest = tiny_manifest(dir, 200);
  const auto cfg = tiny_config(Task::kJoint);
  auto r1 = train(manifest, cfg);
  auto r2 = train(manifest, cfg);
  REQUIRE(r1.report.epochs.size() == r2.report.epochs.size());
  for (size_t i = 1; i < r1.report.epochs.size(); ++i) {
    CHECK(r1.report.epochs[i].train_loss == r2.report.epochs[i].train_loss);
    CHECK(r1.report.epochs[i].metric == r2.report.epochs[i].metric);
  }
  const auto& p1 = r1.system.all_params().items;
  const auto& p2 = r2.system.all_params().items;
  for (size_t i = 0; i < p1.size(); ++i)
    CHECK(p1[i].second.data() == p2[i].second.data());
}

TEST_CASE("warm start scores the loaded checkpoint at epoch zero") {
  TempDir dir("warm");
  const auto manifest = tiny_manifest(dir, 201);
  auto cfg = tiny_config(Task::kJoint);
  auto first = train(manifest, cfg);
  const auto frozen =
      score_partition(first.system, manifest.partition("dev"), cfg.dev_hop_s);
  save_checkpoint(dir.file("warm.ckpt"), first.system.to_checkpoint());

  cfg.warm_start = dir.file("warm.ckpt");
  cfg.max_epochs = 1;
  auto resumed = train(manifest, cfg);
  REQUIRE(!resumed.report.epochs.empty());
  CHECK(resumed.report.epochs[0].epoch == 0);
  CHECK(resumed.report.epochs[0].metric == frozen.metric);

  // Task mismatch is a hard error.
  cfg.task = Task::kVad;
  CHECK_THROWS(train(manifest, cfg));
}

TEST_CASE("dedicated tasks only report their own track") {
  TempDir dir("tracks");
  const auto manifest = tiny_manifest(dir, 202);
  auto cfg = tiny_config(Task::kVad);
  cfg.max_epochs = 1;
  const auto result = train(manifest, cfg);
  CHECK(result.report.epochs[0].dev_f1_vad >= 0.0);
  CHECK(result.report.epochs[0].dev_f1_osd == -1.0);
  CHECK(result.system.task() == Task::kVad);
}

TEST_CASE("embedding-path training consumes embedding files") {
  TempDir dir("embtrain");
  const auto manifest = tiny_manifest(dir, 203);
  auto cfg = tiny_config(Task::kJoint);
  cfg.feature_path = FeaturePath::kEmbedding;
  cfg.max_epochs = 1;
  const auto result = train(manifest, cfg);
  CHECK(result.system.path() == FeaturePath::kEmbedding);
  CHECK(result.report.epochs.size() == 2);  // epoch 0 + one update epoch
  CHECK(std::isfinite(result.report.epochs[1].train_loss));
}
