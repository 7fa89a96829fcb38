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

#include "segmenter/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "segmenter/frontend.hpp"

namespace segmenter {

namespace {

// Frame center containment, written as a direct per-frame scan so tests can
// cross-check rasterize_labels against it.
std::vector<int> frame_truth_of(const std::vector<SpeakerSegment>& segments,
                                double length_s) {
  const auto T = static_cast<int64_t>(std::ceil(length_s * kFrameRate - 1e-9));
  std::vector<int> counts(static_cast<size_t>(T), 0);
  for (int64_t t = 0; t < T; ++t) {
    const double center = (static_cast<double>(t) + 0.5) / kFrameRate;
    for (const auto& s : segments)
      if (center >= s.onset && center < s.onset + s.duration)
        counts[static_cast<size_t>(t)] += 1;
  }
  return counts;
}

double overlap_fraction(const std::vector<int>& counts) {
  int64_t speech = 0, overlap = 0;
  for (int c : counts) {
    if (c >= 1) ++speech;
    if (c >= 2) ++overlap;
  }
  return speech == 0 ? 0.0
                     : static_cast<double>(overlap) / static_cast<double>(speech);
}

struct Tone {
  double freq;
};

}  // namespace

SynthSpec synth_spec_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  SynthSpec s;
  s.seed = j.value("seed", static_cast<uint64_t>(0));
  s.num_recordings = j.value("num_recordings", 10);
  s.recording_length_s = j.value("recording_length_s", 60.0);
  s.num_speakers = j.value("num_speakers", 4);
  s.overlap_ratio = j.value("overlap_ratio", 0.25);
  s.channels = j.value("channels", 1);
  s.noise_snr_db = j.value("noise_snr_db", 30.0);
  s.leak_gain = j.value("leak_gain", 0.05);
  s.tone_jitter = j.value("tone_jitter", 0.0);
  if (j.contains("partitions")) {
    s.train_recordings = j["partitions"].value("train", -1);
    s.dev_recordings = j["partitions"].value("dev", -1);
    s.eval_recordings = j["partitions"].value("eval", -1);
  }
  return s;
}

std::string synth_spec_to_json(const SynthSpec& s) {
  nlohmann::json j{{"seed", s.seed},
                   {"num_recordings", s.num_recordings},
                   {"recording_length_s", s.recording_length_s},
                   {"num_speakers", s.num_speakers},
                   {"overlap_ratio", s.overlap_ratio},
                   {"channels", s.channels},
                   {"noise_snr_db", s.noise_snr_db},
                   {"leak_gain", s.leak_gain},
                   {"tone_jitter", s.tone_jitter}};
  if (s.train_recordings >= 0)
    j["partitions"] = {{"train", s.train_recordings},
                       {"dev", s.dev_recordings},
                       {"eval", s.eval_recordings}};
  return j.dump(2);
}

SynthCorpus generate(const SynthSpec& spec) {
  if (spec.overlap_ratio < 0.0 || spec.overlap_ratio > 1.0)
    throw std::invalid_argument("synth: overlap_ratio must be in [0, 1]");
  if (spec.overlap_ratio > 0.0 && spec.num_speakers < 2)
    throw std::invalid_argument(
        "synth: overlap requires at least two speakers");
  if (spec.channels < 1) throw std::invalid_argument("synth: channels >= 1");
  if (spec.num_recordings < 1 || spec.recording_length_s < 4.0)
    throw std::invalid_argument("synth: need >= 1 recording of >= 4 s");

  int n_train = spec.train_recordings, n_dev = spec.dev_recordings,
      n_eval = spec.eval_recordings;
  if (n_train < 0) {
    n_train = std::max(1, static_cast<int>(spec.num_recordings * 0.7));
    n_dev = std::max(1, static_cast<int>(spec.num_recordings * 0.15));
    n_eval = spec.num_recordings - n_train - n_dev;
    if (n_eval < 1) {
      n_eval = 1;
      n_train = spec.num_recordings - n_dev - n_eval;
    }
  }
  if (n_train + n_dev + n_eval != spec.num_recordings)
    throw std::invalid_argument("synth: partition sizes must sum to "
                                "num_recordings");

  // Corpus-level tone layout: disjoint bands, three tones each, optionally
  // jittered so corpora with different seeds are spectrally distinct.
  std::mt19937_64 corpus_rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double band_lo = 300.0, band_hi = 7400.0;
  const double band_w = (band_hi - band_lo) / spec.num_speakers;
  std::vector<std::vector<Tone>> speaker_tones(
      static_cast<size_t>(spec.num_speakers));
  for (int k = 0; k < spec.num_speakers; ++k) {
    for (double rel : {0.25, 0.55, 0.85}) {
      double f = band_lo + band_w * (k + rel);
      if (spec.tone_jitter > 0.0)
        f *= 1.0 + spec.tone_jitter * (2.0 * unit(corpus_rng) - 1.0);
      speaker_tones[static_cast<size_t>(k)].push_back({f});
    }
  }

  SynthCorpus corpus;
  const auto N = static_cast<int64_t>(
      std::llround(spec.recording_length_s * kSampleRate));
  for (int r = 0; r < spec.num_recordings; ++r) {
    std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + 0x1000 + r);
    SynthRecording rec;
    rec.clip.recording_id = "synth" + std::to_string(spec.seed) + "_" +
                            std::to_string(r);
    rec.room_channel = spec.channels > 1 ? r % spec.channels : 0;
    rec.domain = spec.channels > 1
                     ? "room" + std::to_string(rec.room_channel)
                     : "dom" + std::to_string(r % 3);
    rec.partition = r < n_train ? "train" : (r < n_train + n_dev ? "dev" : "eval");

    // Foreground turn-taking: exponential on/off durations.
    std::exponential_distribution<double> silence_dur(1.0 / 0.8);
    std::exponential_distribution<double> speech_dur(1.0 / 1.5);
    std::uniform_int_distribution<int> pick_speaker(0, spec.num_speakers - 1);
    double t = std::clamp(silence_dur(rng), 0.1, 1.5);
    while (t < spec.recording_length_s - 0.6) {
      const double dur =
          std::min(std::clamp(speech_dur(rng), 0.5, 3.0),
                   spec.recording_length_s - t - 0.05);
      SpeakerSegment seg;
      seg.recording_id = rec.clip.recording_id;
      seg.speaker_id = "spk" + std::to_string(pick_speaker(rng));
      seg.onset = t;
      seg.duration = dur;
      rec.segments.push_back(seg);
      t += dur + std::clamp(silence_dur(rng), 0.2, 2.0);
    }

    // Forced overlap insertions until the target fraction is met.
    rec.frame_truth = frame_truth_of(rec.segments, spec.recording_length_s);
    const size_t n_base = rec.segments.size();
    for (int iter = 0;
         iter < 500 && overlap_fraction(rec.frame_truth) < spec.overlap_ratio;
         ++iter) {
      const auto& base = rec.segments[std::uniform_int_distribution<size_t>(
          0, n_base - 1)(rng)];
      if (base.duration < 0.4) continue;
      int other = pick_speaker(rng);
      if ("spk" + std::to_string(other) == base.speaker_id) continue;
      SpeakerSegment seg;
      seg.recording_id = rec.clip.recording_id;
      seg.speaker_id = "spk" + std::to_string(other);
      const double max_d = std::min(0.8, base.duration);
      seg.duration = 0.3 + (max_d - 0.3) * unit(rng);
      seg.onset = base.onset + (base.duration - seg.duration) * unit(rng);
      rec.segments.push_back(seg);
      rec.frame_truth = frame_truth_of(rec.segments, spec.recording_length_s);
    }

    // Render: tones with 20 ms raised-cosine ramps, active exactly inside
    // their segments, committed to the room channel with leakage elsewhere.
    rec.clip.channels.assign(static_cast<size_t>(spec.channels),
                             std::vector<double>(static_cast<size_t>(N), 0.0));
    for (const auto& seg : rec.segments) {
      const int spk = std::stoi(seg.speaker_id.substr(3));
      const double gain = (0.7 + 0.3 * unit(rng)) * 0.08;
      const auto s0 = static_cast<int64_t>(std::llround(seg.onset * kSampleRate));
      const auto s1 = static_cast<int64_t>(
          std::llround((seg.onset + seg.duration) * kSampleRate));
      const int64_t ramp = 320;  // 20 ms
      for (const auto& tone : speaker_tones[static_cast<size_t>(spk)]) {
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        const double w = 2.0 * std::numbers::pi * tone.freq / kSampleRate;
        for (int64_t i = std::max<int64_t>(s0, 0);
             i < std::min<int64_t>(s1, N); ++i) {
          double env = 1.0;
          if (i - s0 < ramp)
            env = 0.5 - 0.5 * std::cos(std::numbers::pi * (i - s0) / ramp);
          else if (s1 - i <= ramp)
            env = 0.5 - 0.5 * std::cos(std::numbers::pi * (s1 - i) / ramp);
          const double v = gain * env * std::sin(w * static_cast<double>(i) +
                                                 phase);
          for (int c = 0; c < spec.channels; ++c) {
            const double g = c == rec.room_channel ? 1.0 : spec.leak_gain;
            rec.clip.channels[static_cast<size_t>(c)][static_cast<size_t>(i)] +=
                g * v;
          }
        }
      }
    }

    // White noise at noise_snr_db relative to speech RMS on the room channel.
    double energy = 0.0;
    int64_t n_speech = 0;
    const auto& room = rec.clip.channels[static_cast<size_t>(rec.room_channel)];
    for (int64_t i = 0; i < N; ++i) {
      const auto frame = std::min<int64_t>(
          i / kHopSamples, static_cast<int64_t>(rec.frame_truth.size()) - 1);
      if (rec.frame_truth[static_cast<size_t>(frame)] >= 1) {
        energy += room[static_cast<size_t>(i)] * room[static_cast<size_t>(i)];
        ++n_speech;
      }
    }
    const double speech_rms = n_speech > 0 ? std::sqrt(energy / n_speech) : 0.05;
    const double noise_std =
        speech_rms * std::pow(10.0, -spec.noise_snr_db / 20.0);
    std::normal_distribution<double> gauss(0.0, noise_std);
    for (auto& ch : rec.clip.channels)
      for (auto& v : ch) v += gauss(rng);

    // Peak-safe.
    double peak = 0.0;
    for (const auto& ch : rec.clip.channels)
      for (double v : ch) peak = std::max(peak, std::abs(v));
    if (peak > 0.95)
      for (auto& ch : rec.clip.channels)
        for (auto& v : ch) v *= 0.95 / peak;

    corpus.recordings.push_back(std::move(rec));
  }
  return corpus;
}

DatasetManifest write_corpus(const SynthCorpus& corpus, const std::string& dir,
                             bool emit_embeddings) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  DatasetManifest manifest;
  for (const auto& rec : corpus.recordings) {
    ManifestEntry e;
    e.recording_id = rec.clip.recording_id;
    e.audio_path = (fs::path(dir) / (e.recording_id + ".wav")).string();
    e.rttm_path = (fs::path(dir) / (e.recording_id + ".rttm")).string();
    e.partition = rec.partition;
    e.domain = rec.domain;
    save_audio(e.audio_path, rec.clip);
    write_rttm(e.rttm_path, rec.segments);
    if (emit_embeddings) {
      e.embedding_path = (fs::path(dir) / (e.recording_id + ".emb")).string();
      // Embeddings describe the quantized waveform actually on disk.
      save_embeddings(e.embedding_path,
                      make_surrogate_embeddings(load_audio(e.audio_path)));
    }
    manifest.entries.push_back(std::move(e));
  }
  save_manifest((fs::path(dir) / "manifest.jsonl").string(), manifest);
  return manifest;
}

EmbeddingFile make_surrogate_embeddings(const AudioClip& clip) {
  FrontendConfig cfg;
  cfg.hop = 320;  // 20 ms
  AudioClip mono;
  mono.recording_id = clip.recording_id;
  mono.channels = {clip.channels.at(0)};
  const auto spec = stft(mono, cfg);
  auto feats = log_mel(spec, 0, cfg);
  // Full frames only: 99 rows per 2 s window.
  const int64_t n = clip.num_samples();
  const int64_t full =
      n >= cfg.win_length ? (n - cfg.win_length) / cfg.hop + 1 : 0;
  EmbeddingFile emb;
  emb.recording_id = clip.recording_id;
  emb.frame_period_ms = 20.0;
  emb.dim = feats.num_features;
  emb.num_frames = std::min(full, feats.num_frames);
  emb.values.resize(static_cast<size_t>(emb.num_frames * emb.dim));
  for (int64_t t = 0; t < emb.num_frames; ++t)
    for (int d = 0; d < emb.dim; ++d)
      emb.values[static_cast<size_t>(t * emb.dim + d)] =
          static_cast<float>(feats.at(t, d));
  return emb;
}

}  // namespace segmenter
