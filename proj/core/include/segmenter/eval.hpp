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

#ifndef SEGMENTER_EVAL_HPP_
#define SEGMENTER_EVAL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "segmenter/manifest.hpp"
#include "segmenter/system.hpp"
#include "segmenter/trainer.hpp"

namespace segmenter {

struct ScoreCounts {
  int64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Frame-level counts and F1 over equal-length binary tracks. The
// degenerate all-negative ref with all-negative hyp scores F1 = 1.
ScoreCounts score(const std::vector<uint8_t>& ref,
                  const std::vector<uint8_t>& hyp);

ScoreCounts counts_to_score(int64_t tp, int64_t fp, int64_t fn);

struct SweepResult {
  double threshold = 0.5;
  double f1 = 0.0;
};

// Exhaustive grid search 0.01..0.99 step 0.01, micro F1, ties broken
// toward the smaller threshold. One positive-class probability vector and
// one reference track per recording.
SweepResult sweep_threshold(const std::vector<std::vector<double>>& pos_probs,
                            const std::vector<std::vector<uint8_t>>& refs);

struct RecordingScore {
  std::string recording_id;
  std::string domain;
  ScoreCounts vad, osd;
  bool ref_has_vad = false;  // recording has positive VAD reference frames
  bool ref_has_osd = false;
};

struct DomainSummary {
  std::string domain;
  int count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct ScoreReport {
  std::string mode;       // "2class" or "3class"
  std::string task;       // vad / osd / joint
  double threshold = -1;  // -1 when decisions are argmax-based
  bool has_vad = false, has_osd = false;
  ScoreCounts vad_micro, osd_micro;
  double vad_macro = 0.0, osd_macro = 0.0;
  std::vector<RecordingScore> recordings;
  std::vector<DomainSummary> vad_domains, osd_domains;
};

std::string score_report_to_json(const ScoreReport& report);
std::string score_report_to_table(const ScoreReport& report);
ScoreReport score_report_from_json(const std::string& json_text);
// Fig.-style per-file data: recording_id, domain, F1 rows.
std::string score_report_to_csv(const ScoreReport& report);

// Runs stitched inference over the eval partition. 2-class mode sweeps the
// detection threshold on dev first unless fixed_threshold is in (0, 1);
// 3-class mode uses argmax + merging.
ScoreReport evaluate(const System& system, const DatasetManifest& manifest,
                     const std::string& mode, double hop_s = 0.5,
                     double fixed_threshold = -1.0);

struct ComparisonRow {
  std::string system;
  double vad_f1 = -1, osd_f1 = -1;
  double seconds_to_best = 0;
  int epochs_to_best = 0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;  // vad, osd, joint
  double delta_vad_f1 = 0;          // joint - dedicated
  double delta_osd_f1 = 0;
  double dedicated_seconds_total = 0;
};

Comparison compare_systems(const ScoreReport& vad_2class,
                           const ScoreReport& osd_2class,
                           const ScoreReport& joint_3class,
                           const TrainReport& vad_train,
                           const TrainReport& osd_train,
                           const TrainReport& joint_train);
std::string comparison_to_csv(const Comparison& cmp);

struct SpatialRow {
  std::string room;
  int count = 0;                     // recordings in the group
  std::vector<double> mean_weight;   // per channel, over speech frames
  std::vector<double> normalized;    // divided by the row maximum
};

// Mean SACC channel weight over reference speech frames, grouped by the
// manifest domain tag (the synthetic corpus uses it as a room tag).
std::vector<SpatialRow> spatial_report(const System& system,
                                       const DatasetManifest& manifest,
                                       const std::string& partition = "eval");
std::string spatial_report_to_csv(const std::vector<SpatialRow>& rows);

}  // namespace segmenter

#endif  // SEGMENTER_EVAL_HPP_
