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

#ifndef SEGMENTER_LABELS_HPP_
#define SEGMENTER_LABELS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "segmenter/audio_io.hpp"
#include "segmenter/rttm.hpp"

namespace segmenter {

// Per-10 ms-frame speaker-count classes: 0, 1, or 2 ("two or more").
// `counts` keeps the raw speaker counts for label combination during
// augmentation; `classes[t] == min(counts[t], 2)` always.
struct FrameLabels {
  std::string recording_id;
  std::vector<int> classes;
  std::vector<int> counts;
  int frame_rate = kFrameRate;

  int64_t num_frames() const { return static_cast<int64_t>(classes.size()); }
};

// A frame is covered by a segment iff its center time (t/100 + 5 ms)
// lies inside [onset, onset + duration). T = ceil(length * 100).
FrameLabels rasterize_labels(const std::vector<SpeakerSegment>& segments,
                             double length_s);

// One fixed-length training window of audio + labels. The tail window is
// zero-padded; `mask[t] == 0` marks padded frames, excluded from loss.
struct Window {
  std::string recording_id;
  int64_t start_sample = 0;
  std::vector<std::vector<double>> audio;  // M x window samples
  std::vector<int> counts;                 // frames per window
  std::vector<uint8_t> mask;

  int64_t num_frames() const { return static_cast<int64_t>(counts.size()); }
};

std::vector<Window> slice_windows(const AudioClip& clip,
                                  const FrameLabels& labels,
                                  double window_s = 2.0, double hop_s = 2.0);

}  // namespace segmenter

#endif  // SEGMENTER_LABELS_HPP_
