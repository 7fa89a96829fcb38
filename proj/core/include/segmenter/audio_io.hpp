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

#ifndef SEGMENTER_AUDIO_IO_HPP_
#define SEGMENTER_AUDIO_IO_HPP_

#include <string>
#include <vector>

namespace segmenter {

inline constexpr int kSampleRate = 16000;
inline constexpr int kFrameRate = 100;   // label/feature frames per second
inline constexpr int kHopSamples = 160;  // 10 ms

// M-channel sample matrix at 16 kHz, samples in [-1, 1].
struct AudioClip {
  std::string recording_id;
  std::vector<std::vector<double>> channels;  // M x N
  int sample_rate = kSampleRate;

  int num_channels() const { return static_cast<int>(channels.size()); }
  int64_t num_samples() const {
    return channels.empty() ? 0 : static_cast<int64_t>(channels[0].size());
  }
  double duration_s() const {
    return static_cast<double>(num_samples()) / sample_rate;
  }
};

// PCM16 / float32 WAV at 16 kHz. Anything else is rejected with a
// diagnostic naming the offending property.
AudioClip load_audio(const std::string& path);

// Writes PCM16. Samples clipped to [-1, 1] before quantization.
void save_audio(const std::string& path, const AudioClip& clip);

}  // namespace segmenter

#endif  // SEGMENTER_AUDIO_IO_HPP_
