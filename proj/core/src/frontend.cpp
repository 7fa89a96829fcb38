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

#include "segmenter/frontend.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace segmenter {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

}  // namespace

void fft_complex(std::vector<double>& re, std::vector<double>& im) {
  const size_t n = re.size();
  if (n != im.size() || n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_complex: size must be a power of two");
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (size_t i = 0; i < n; i += len) {
      double cur_r = 1.0, cur_i = 0.0;
      for (size_t k = 0; k < len / 2; ++k) {
        const size_t a = i + k, b = i + k + len / 2;
        const double tr = re[b] * cur_r - im[b] * cur_i;
        const double ti = re[b] * cur_i + im[b] * cur_r;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double nr = cur_r * wr - cur_i * wi;
        cur_i = cur_r * wi + cur_i * wr;
        cur_r = nr;
      }
    }
  }
}

Spectrogram stft(const AudioClip& clip, const FrontendConfig& cfg) {
  if (clip.num_samples() < 1) throw std::invalid_argument("stft: empty clip");
  const int M = clip.num_channels();
  const int64_t N = clip.num_samples();
  const auto T = static_cast<int64_t>((N + cfg.hop - 1) / cfg.hop);
  const int F = cfg.num_bins();

  Spectrogram spec;
  spec.recording_id = clip.recording_id;
  spec.num_channels = M;
  spec.num_frames = T;
  spec.num_bins = F;
  spec.magnitude.assign(static_cast<size_t>(M) * T * F, 0.0);

  const auto window = hann_window(cfg.win_length);
  std::vector<double> re(static_cast<size_t>(cfg.fft_size));
  std::vector<double> im(static_cast<size_t>(cfg.fft_size));
  for (int m = 0; m < M; ++m) {
    const auto& x = clip.channels[static_cast<size_t>(m)];
    for (int64_t t = 0; t < T; ++t) {
      std::fill(re.begin(), re.end(), 0.0);
      std::fill(im.begin(), im.end(), 0.0);
      const int64_t start = t * cfg.hop;
      for (int i = 0; i < cfg.win_length; ++i) {
        const int64_t idx = start + i;
        if (idx < N)
          re[static_cast<size_t>(i)] =
              x[static_cast<size_t>(idx)] * window[static_cast<size_t>(i)];
      }
      fft_complex(re, im);
      for (int f = 0; f < F; ++f)
        spec.at(m, t, f) = std::hypot(re[static_cast<size_t>(f)],
                                      im[static_cast<size_t>(f)]);
    }
  }
  return spec;
}

std::vector<double> mel_filterbank(const FrontendConfig& cfg) {
  const int F = cfg.num_bins();
  const int K = cfg.num_mel;
  std::vector<double> fb(static_cast<size_t>(K) * F, 0.0);
  const double mel_lo = hz_to_mel(cfg.mel_low_hz);
  const double mel_hi = hz_to_mel(cfg.mel_high_hz);
  std::vector<double> edges(static_cast<size_t>(K + 2));
  for (int i = 0; i < K + 2; ++i)
    edges[static_cast<size_t>(i)] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (K + 1));
  const double bin_hz = static_cast<double>(kSampleRate) / cfg.fft_size;
  for (int k = 0; k < K; ++k) {
    const double lo = edges[static_cast<size_t>(k)];
    const double mid = edges[static_cast<size_t>(k + 1)];
    const double hi = edges[static_cast<size_t>(k + 2)];
    for (int f = 0; f < F; ++f) {
      const double hz = f * bin_hz;
      double w = 0.0;
      if (hz > lo && hz < hi)
        w = hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
      fb[static_cast<size_t>(k) * F + f] = std::max(w, 0.0);
    }
    // Narrow low-frequency filters can miss every bin center; claim the
    // nearest bin so each filter has nonzero support.
    bool empty = true;
    for (int f = 0; f < F; ++f)
      if (fb[static_cast<size_t>(k) * F + f] > 0.0) {
        empty = false;
        break;
      }
    if (empty) {
      const int f = std::min(F - 1, static_cast<int>(std::lround(mid / bin_hz)));
      fb[static_cast<size_t>(k) * F + f] = 1.0;
    }
  }
  return fb;
}

FeatureSequence log_mel(const std::vector<double>& magnitude,
                        int64_t num_frames, int num_bins,
                        const FrontendConfig& cfg) {
  if (num_bins != cfg.num_bins())
    throw std::invalid_argument("log_mel: bin count mismatch");
  const auto fb = mel_filterbank(cfg);
  FeatureSequence out;
  out.num_frames = num_frames;
  out.num_features = cfg.num_mel;
  out.values.assign(static_cast<size_t>(num_frames) * cfg.num_mel, 0.0);
  for (int64_t t = 0; t < num_frames; ++t) {
    const double* mag = magnitude.data() + t * num_bins;
    for (int k = 0; k < cfg.num_mel; ++k) {
      const double* w = fb.data() + static_cast<size_t>(k) * num_bins;
      double e = 0.0;
      for (int f = 0; f < num_bins; ++f) e += w[f] * mag[f] * mag[f];
      out.at(t, k) = std::log(e + cfg.log_floor);
    }
  }
  return out;
}

FeatureSequence log_mel(const Spectrogram& spec, int channel,
                        const FrontendConfig& cfg) {
  if (channel < 0 || channel >= spec.num_channels)
    throw std::invalid_argument("log_mel: channel out of range");
  std::vector<double> mag(
      spec.magnitude.begin() +
          static_cast<int64_t>(channel) * spec.num_frames * spec.num_bins,
      spec.magnitude.begin() +
          static_cast<int64_t>(channel + 1) * spec.num_frames * spec.num_bins);
  auto out = log_mel(mag, spec.num_frames, spec.num_bins, cfg);
  out.recording_id = spec.recording_id;
  return out;
}

FeatureSequence mvn(const FeatureSequence& features) {
  const int64_t T = features.num_frames;
  const int F = features.num_features;
  if (T < 2) throw std::invalid_argument("mvn: need at least 2 frames");
  constexpr double kVarFloor = 1e-12;

  FeatureSequence out = features;
  for (int f = 0; f < F; ++f) {
    double m = 0.0;
    for (int64_t t = 0; t < T; ++t) m += features.at(t, f);
    m /= static_cast<double>(T);
    double v = 0.0;
    for (int64_t t = 0; t < T; ++t) {
      const double d = features.at(t, f) - m;
      v += d * d;
    }
    v /= static_cast<double>(T);
    if (v < kVarFloor) {
      for (int64_t t = 0; t < T; ++t) out.at(t, f) = 0.0;
    } else {
      const double is = 1.0 / std::sqrt(v);
      for (int64_t t = 0; t < T; ++t) out.at(t, f) = (features.at(t, f) - m) * is;
    }
  }
  return out;
}

}  // namespace segmenter
