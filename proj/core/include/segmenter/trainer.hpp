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

#ifndef SEGMENTER_TRAINER_HPP_
#define SEGMENTER_TRAINER_HPP_

#include <string>
#include <vector>

#include "segmenter/manifest.hpp"
#include "segmenter/system.hpp"

namespace segmenter {

struct TrainConfig {
  Task task = Task::kJoint;
  FeaturePath feature_path = FeaturePath::kLogMel;
  int batch_size = 64;
  int max_epochs = 100;
  int patience = 10;
  double augment_prob = 0.5;      // overlap-sum augmentation
  double noise_prob = 0.5;        // additive-noise augmentation
  double noise_snr_min_db = 5.0;
  double noise_snr_max_db = 20.0;
  uint64_t seed = 0;
  std::string warm_start;         // optional checkpoint path
  double dev_hop_s = 2.0;         // stitching hop for per-epoch dev scoring
  OptimizerConfig optimizer;
  TcnConfig tcn;
  FrontendConfig frontend;
  SaccConfig sacc;
  bool adapter_projection = false;
};

TrainConfig train_config_from_json(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& cfg);

struct EpochStats {
  int epoch = 0;           // 0 = before any update (warm-start continuity)
  double train_loss = 0.0;
  double dev_f1_vad = -1.0;
  double dev_f1_osd = -1.0;
  double metric = 0.0;     // early-stopping metric
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;
  double best_metric = 0.0;
  double seconds_to_best = 0.0;
  double total_seconds = 0.0;
  int total_epochs = 0;
  int64_t param_count = 0;
  bool diverged = false;
};

std::string train_report_to_json(const TrainReport& report);
TrainReport train_report_from_json(const std::string& json_text);
std::string train_report_to_csv(const TrainReport& report);

struct TrainResult {
  System system;  // best-epoch parameters
  TrainReport report;
};

// Overlap-sum augmentation: audio added (peak-renormalized if it clips),
// raw speaker counts added, classes re-derived as min(count, 2).
Window mix_augment(const Window& a, const Window& b);

// Mixes white noise at the requested SNR measured over active-speech
// frames (over the full window when there is no speech).
void add_noise(std::vector<std::vector<double>>& audio,
               const std::vector<int>& counts, double snr_db,
               std::mt19937_64& rng);

TrainResult train(const DatasetManifest& manifest, const TrainConfig& cfg);

// Micro-averaged dev F1 of a frozen system over a manifest partition;
// argmax decisions for joint, threshold 0.5 for 2-class.
EpochStats score_partition(const System& system,
                           const std::vector<ManifestEntry>& entries,
                           double hop_s);

}  // namespace segmenter

#endif  // SEGMENTER_TRAINER_HPP_
