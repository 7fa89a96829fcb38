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

#include "segmenter/labels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace segmenter {

FrameLabels rasterize_labels(const std::vector<SpeakerSegment>& segments,
                             double length_s) {
  if (length_s < 0.0)
    throw std::invalid_argument("rasterize_labels: negative length");
  for (const auto& s : segments) {
    if (s.onset + s.duration > length_s + 1e-9)
      throw std::invalid_argument(
          "rasterize_labels: segment past recording end (" + s.recording_id +
          ")");
  }
  FrameLabels labels;
  if (!segments.empty()) labels.recording_id = segments[0].recording_id;
  const auto T = static_cast<int64_t>(std::ceil(length_s * kFrameRate - 1e-9));
  labels.counts.assign(static_cast<size_t>(T), 0);
  labels.classes.assign(static_cast<size_t>(T), 0);
  for (const auto& s : segments) {
    // Frame t has center (t + 0.5) / 100; covered iff center in
    // [onset, onset + duration).
    auto first =
        static_cast<int64_t>(std::ceil(s.onset * kFrameRate - 0.5 - 1e-9));
    auto last = static_cast<int64_t>(
        std::floor((s.onset + s.duration) * kFrameRate - 0.5 - 1e-9));
    first = std::max<int64_t>(first, 0);
    last = std::min<int64_t>(last, T - 1);
    for (int64_t t = first; t <= last; ++t)
      labels.counts[static_cast<size_t>(t)] += 1;
  }
  for (size_t t = 0; t < labels.counts.size(); ++t)
    labels.classes[t] = std::min(labels.counts[t], 2);
  return labels;
}

std::vector<Window> slice_windows(const AudioClip& clip,
                                  const FrameLabels& labels, double window_s,
                                  double hop_s) {
  if (window_s < 0.01)
    throw std::invalid_argument("slice_windows: window shorter than one frame");
  if (hop_s <= 0.0 || hop_s > window_s + 1e-12)
    throw std::invalid_argument("slice_windows: hop must be in (0, window]");

  const auto win_samples = static_cast<int64_t>(std::lround(window_s * kSampleRate));
  const auto hop_samples = static_cast<int64_t>(std::lround(hop_s * kSampleRate));
  if (hop_samples % kHopSamples != 0)
    throw std::invalid_argument(
        "slice_windows: hop must be a multiple of the 10 ms frame period");
  const auto win_frames = static_cast<int64_t>(std::lround(window_s * kFrameRate));
  const int64_t n = clip.num_samples();
  const int M = clip.num_channels();

  std::vector<Window> windows;
  for (int64_t start = 0; start == 0 || start < n; start += hop_samples) {
    Window w;
    w.recording_id = clip.recording_id;
    w.start_sample = start;
    w.audio.assign(static_cast<size_t>(M),
                   std::vector<double>(static_cast<size_t>(win_samples), 0.0));
    for (int c = 0; c < M; ++c) {
      const auto& src = clip.channels[static_cast<size_t>(c)];
      const int64_t avail = std::max<int64_t>(0, std::min(win_samples, n - start));
      std::copy(src.begin() + start, src.begin() + start + avail,
                w.audio[static_cast<size_t>(c)].begin());
    }
    const int64_t frame0 = start / kHopSamples;
    w.counts.assign(static_cast<size_t>(win_frames), 0);
    w.mask.assign(static_cast<size_t>(win_frames), 0);
    for (int64_t t = 0; t < win_frames; ++t) {
      const int64_t src_t = frame0 + t;
      if (src_t < labels.num_frames()) {
        w.counts[static_cast<size_t>(t)] =
            labels.counts[static_cast<size_t>(src_t)];
        w.mask[static_cast<size_t>(t)] = 1;
      }
    }
    windows.push_back(std::move(w));
    if (start + win_samples >= n) break;
  }
  return windows;
}

}  // namespace segmenter
