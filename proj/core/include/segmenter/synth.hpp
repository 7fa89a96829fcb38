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

#ifndef SEGMENTER_SYNTH_HPP_
#define SEGMENTER_SYNTH_HPP_

#include <string>
#include <vector>

#include "segmenter/adapter.hpp"
#include "segmenter/audio_io.hpp"
#include "segmenter/manifest.hpp"
#include "segmenter/rttm.hpp"

namespace segmenter {

// Deterministic synthetic corpus: speakers are harmonic tone complexes in
// disjoint bands over white noise, so 0/1/2-speaker frames are spectrally
// separable and a small model can learn the task in minutes.
struct SynthSpec {
  uint64_t seed = 0;
  int num_recordings = 10;
  double recording_length_s = 60.0;
  int num_speakers = 4;
  double overlap_ratio = 0.25;  // target fraction of speech frames with >= 2
  int channels = 1;
  double noise_snr_db = 30.0;
  double leak_gain = 0.05;      // off-room channel gain, M > 1
  double tone_jitter = 0.0;     // relative tone frequency jitter, from seed
  // Partition sizes; must sum to num_recordings. Empty -> 70/15/15 split.
  int train_recordings = -1;
  int dev_recordings = -1;
  int eval_recordings = -1;
};

SynthSpec synth_spec_from_json(const std::string& json_text);
std::string synth_spec_to_json(const SynthSpec& spec);

struct SynthRecording {
  AudioClip clip;
  std::vector<SpeakerSegment> segments;
  std::vector<int> frame_truth;  // speaker count per 10 ms frame
  std::string partition;
  std::string domain;  // "room<c>" for M > 1
  int room_channel = 0;
};

struct SynthCorpus {
  std::vector<SynthRecording> recordings;
};

SynthCorpus generate(const SynthSpec& spec);

// Writes WAV + RTTM + manifest.jsonl (and optionally surrogate embedding
// files) under dir, in the exact formats the corpus loader expects.
DatasetManifest write_corpus(const SynthCorpus& corpus, const std::string& dir,
                             bool emit_embeddings = false);

// Surrogate 20 ms-rate "embeddings": log-mel frames with a 320-sample hop,
// full frames only, so a 2 s window holds exactly 99 rows.
EmbeddingFile make_surrogate_embeddings(const AudioClip& clip);

}  // namespace segmenter

#endif  // SEGMENTER_SYNTH_HPP_
