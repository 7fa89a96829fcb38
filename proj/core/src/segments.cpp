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

#include "segmenter/segments.hpp"

#include <stdexcept>

#include "segmenter/audio_io.hpp"

namespace segmenter {

std::vector<SpeakerSegment> frames_to_segments(
    const std::vector<uint8_t>& decisions, const std::string& recording_id,
    const std::string& label, double gap_close_s, double min_duration_s) {
  if (gap_close_s < 0 || min_duration_s < 0)
    throw std::invalid_argument("frames_to_segments: negative postprocessing");
  const double period = 1.0 / kFrameRate;

  // Run-length encode positive frames as [start, end) frame pairs.
  std::vector<std::pair<int64_t, int64_t>> runs;
  const auto n = static_cast<int64_t>(decisions.size());
  for (int64_t t = 0; t < n;) {
    if (!decisions[static_cast<size_t>(t)]) {
      ++t;
      continue;
    }
    int64_t end = t + 1;
    while (end < n && decisions[static_cast<size_t>(end)]) ++end;
    runs.emplace_back(t, end);
    t = end;
  }

  // Bridge gaps of at most gap_close_s (a half-frame slack absorbs the
  // conversion to integer frames).
  const auto gap_frames =
      static_cast<int64_t>(gap_close_s * kFrameRate + 0.5);
  std::vector<std::pair<int64_t, int64_t>> merged;
  for (const auto& run : runs) {
    if (!merged.empty() && run.first - merged.back().second <= gap_frames)
      merged.back().second = run.second;
    else
      merged.push_back(run);
  }

  std::vector<SpeakerSegment> out;
  for (const auto& [start, end] : merged) {
    const double onset = static_cast<double>(start) * period;
    const double duration = static_cast<double>(end - start) * period;
    if (duration < min_duration_s - 1e-12) continue;
    SpeakerSegment seg;
    seg.recording_id = recording_id;
    seg.speaker_id = label;
    seg.onset = onset;
    seg.duration = duration;
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace segmenter
