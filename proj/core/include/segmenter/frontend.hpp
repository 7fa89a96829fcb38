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

#ifndef SEGMENTER_FRONTEND_HPP_
#define SEGMENTER_FRONTEND_HPP_

#include <string>
#include <vector>

#include "segmenter/audio_io.hpp"

namespace segmenter {

struct FrontendConfig {
  int win_length = 400;   // 25 ms @ 16 kHz
  int hop = 160;          // 10 ms
  int fft_size = 512;
  int num_mel = 64;
  double mel_low_hz = 0.0;
  double mel_high_hz = 8000.0;
  double log_floor = 1e-10;

  int num_bins() const { return fft_size / 2 + 1; }
};

// M x T x F magnitude spectrogram at 100 Hz, left-aligned frames with a
// zero-padded tail: frame t covers samples [t*hop, t*hop + win_length).
struct Spectrogram {
  std::string recording_id;
  int num_channels = 0;
  int64_t num_frames = 0;
  int num_bins = 0;
  std::vector<double> magnitude;  // (M, T, F) row-major

  double& at(int m, int64_t t, int f) {
    return magnitude[(static_cast<int64_t>(m) * num_frames + t) * num_bins + f];
  }
  double at(int m, int64_t t, int f) const {
    return magnitude[(static_cast<int64_t>(m) * num_frames + t) * num_bins + f];
  }
};

// T x F real feature matrix at 100 Hz.
struct FeatureSequence {
  std::string recording_id;
  int64_t num_frames = 0;
  int num_features = 0;
  std::vector<double> values;  // (T, F) row-major
  std::string kind = "log-mel";

  double& at(int64_t t, int f) { return values[t * num_features + f]; }
  double at(int64_t t, int f) const { return values[t * num_features + f]; }
};

// Hann-windowed magnitude STFT; T = ceil(N / hop).
Spectrogram stft(const AudioClip& clip, const FrontendConfig& cfg);

// Triangular filters with centers equally spaced on the mel scale; returns
// num_mel x num_bins row-major.
std::vector<double> mel_filterbank(const FrontendConfig& cfg);

// out[t,k] = ln(sum_f fb[k,f] * mag[t,f]^2 + log_floor) for one channel,
// or for a pre-combined T x F magnitude.
FeatureSequence log_mel(const std::vector<double>& magnitude, int64_t num_frames,
                        int num_bins, const FrontendConfig& cfg);
FeatureSequence log_mel(const Spectrogram& spec, int channel,
                        const FrontendConfig& cfg);

// Per-dimension zero-mean unit-variance over the sequence. Constant
// dimensions map to all zeros. Requires T >= 2.
FeatureSequence mvn(const FeatureSequence& features);

// Radix-2 in-place complex FFT (size must be a power of two); exposed for
// tests.
void fft_complex(std::vector<double>& re, std::vector<double>& im);

}  // namespace segmenter

#endif  // SEGMENTER_FRONTEND_HPP_
