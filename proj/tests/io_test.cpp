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

#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "test_util.hpp"

#include "segmenter/adapter.hpp"
#include "segmenter/audio_io.hpp"
#include "segmenter/labels.hpp"
#include "segmenter/manifest.hpp"
#include "segmenter/rttm.hpp"

using namespace segmenter;
using testutil::TempDir;

TEST_CASE("PCM16 WAV round trip is exact after quantization") {
  TempDir dir("wav");
  AudioClip clip;
  clip.recording_id = "rt";
  clip.channels.assign(2, std::vector<double>(1600));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-0.9, 0.9);
  for (auto& ch : clip.channels)
    for (auto& v : ch) v = std::round(dist(rng) * 32767.0) / 32767.0;
  save_audio(dir.file("rt.wav"), clip);
  const auto back = load_audio(dir.file("rt.wav"));
  REQUIRE(back.num_channels() == 2);
  REQUIRE(back.num_samples() == 1600);
  for (int c = 0; c < 2; ++c)
    for (int64_t i = 0; i < 1600; ++i)
      CHECK(back.channels[c][i] ==
            doctest::Approx(clip.channels[c][i]).epsilon(1e-12));
}

TEST_CASE("WAV loader rejects unsupported rates and garbage") {
  TempDir dir("wavbad");
  {
    std::ofstream out(dir.file("bad.wav"), std::ios::binary);
    out << "not a riff file at all";
  }
  CHECK_THROWS(load_audio(dir.file("bad.wav")));
  CHECK_THROWS(load_audio(dir.file("missing.wav")));
}

TEST_CASE("RTTM parse and write round trip with comment and error handling") {
  TempDir dir("rttm");
  {
    std::ofstream out(dir.file("a.rttm"));
    out << "; header comment\n";
    out << "SPEAKER rec1 1 0.500 1.250 <NA> <NA> spkA <NA> <NA>\n";
    out << "SPEAKER rec1 1 2.000 0.300 <NA> <NA> spkB <NA> <NA>\n";
  }
  auto segs = parse_rttm(dir.file("a.rttm"));
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].recording_id == "rec1");
  CHECK(segs[0].speaker_id == "spkA");
  CHECK(segs[0].onset == doctest::Approx(0.5));
  CHECK(segs[0].duration == doctest::Approx(1.25));

  write_rttm(dir.file("b.rttm"), segs);
  auto again = parse_rttm(dir.file("b.rttm"));
  REQUIRE(again.size() == 2);
  CHECK(again[1].onset == doctest::Approx(segs[1].onset));
  CHECK(again[1].duration == doctest::Approx(segs[1].duration));

  {
    std::ofstream out(dir.file("short.rttm"));
    out << "SPEAKER rec1 1 0.5\n";
  }
  CHECK_THROWS(parse_rttm(dir.file("short.rttm")));
  {
    std::ofstream out(dir.file("neg.rttm"));
    out << "SPEAKER rec1 1 -0.5 1.0 <NA> <NA> s <NA> <NA>\n";
  }
  CHECK_THROWS(parse_rttm(dir.file("neg.rttm")));
  {
    std::ofstream out(dir.file("zerodur.rttm"));
    out << "SPEAKER rec1 1 0.5 0.0 <NA> <NA> s <NA> <NA>\n";
  }
  CHECK_THROWS(parse_rttm(dir.file("zerodur.rttm")));
}

TEST_CASE("rasterization matches the documented frame-center rule") {
  // One segment (onset 0.10, dur 0.05) in a 0.30 s recording: exactly
  // frames 10..14 are speech.
  std::vector<SpeakerSegment> segs{{"r", "s", 0.10, 0.05}};
  auto labels = rasterize_labels(segs, 0.30);
  REQUIRE(labels.num_frames() == 30);
  for (int t = 0; t < 30; ++t)
    CHECK(labels.classes[t] == ((t >= 10 && t <= 14) ? 1 : 0));
}

TEST_CASE("rasterization agrees with an independent counting oracle") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> onset(0.0, 4.0);
  std::uniform_real_distribution<double> dur(0.05, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SpeakerSegment> segs;
    const int n = 1 + static_cast<int>(rng() % 6);
    const double len = 5.0;
    for (int i = 0; i < n; ++i) {
      const double on = onset(rng);
      const double du = std::min(dur(rng), len - on);
      segs.push_back({"r", "s" + std::to_string(i % 3), on, du});
    }
    auto labels = rasterize_labels(segs, len);
    REQUIRE(labels.num_frames() == 500);
    for (int64_t t = 0; t < 500; ++t) {
      const double center = (static_cast<double>(t) + 0.5) / 100.0;
      int count = 0;
      for (const auto& s : segs)
        if (center >= s.onset && center < s.onset + s.duration) ++count;
      CHECK(labels.counts[t] == count);
      CHECK(labels.classes[t] == std::min(count, 2));
    }
  }
}

TEST_CASE("window slicing covers the recording and pads the tail") {
  AudioClip clip;
  clip.recording_id = "w";
  clip.channels.assign(1, std::vector<double>(16000 * 5));  // 5 s
  for (size_t i = 0; i < clip.channels[0].size(); ++i)
    clip.channels[0][i] = std::sin(0.01 * static_cast<double>(i));
  auto labels = rasterize_labels({{"w", "s", 1.0, 2.5}}, 5.0);
  auto windows = slice_windows(clip, labels, 2.0, 2.0);
  REQUIRE(windows.size() == 3);  // [0,2), [2,4), [4,6) padded
  for (const auto& w : windows) {
    CHECK(w.audio[0].size() == 32000);
    CHECK(w.counts.size() == 200);
  }
  // Tail window: only 1 s real, the rest masked.
  for (int t = 0; t < 200; ++t)
    CHECK(static_cast<int>(windows[2].mask[t]) == (t < 100 ? 1 : 0));
  // Padded samples are zero.
  for (size_t i = 16000; i < 32000; ++i)
    CHECK(windows[2].audio[0][i] == 0.0);
  // Concatenated unmasked counts reproduce the rasterization.
  int64_t global = 0;
  for (const auto& w : windows)
    for (size_t t = 0; t < w.counts.size(); ++t, ++global)
      if (w.mask[t]) CHECK(w.counts[t] == labels.counts[global]);

  CHECK_THROWS(slice_windows(clip, labels, 2.0, 0.015));  // off-grid hop
}

TEST_CASE("manifest loads, validates, and resolves relative paths") {
  TempDir dir("manifest");
  AudioClip clip;
  clip.recording_id = "m0";
  clip.channels.assign(1, std::vector<double>(1600, 0.0));
  save_audio(dir.file("m0.wav"), clip);
  write_rttm(dir.file("m0.rttm"), {{"m0", "s", 0.01, 0.05}});
  {
    std::ofstream out(dir.file("manifest.jsonl"));
    out << R"({"recording_id":"m0","audio":"m0.wav","rttm":"m0.rttm",)"
        << R"("partition":"train","domain":"roomA"})" << "\n";
  }
  auto manifest = load_manifest(dir.file("manifest.jsonl"));
  REQUIRE(manifest.entries.size() == 1);
  CHECK(manifest.entries[0].domain == "roomA");
  CHECK(manifest.partition("train").size() == 1);
  CHECK(manifest.partition("dev").empty());
  // Absolute resolved path must exist.
  CHECK(std::ifstream(manifest.entries[0].audio_path).good());

  {
    std::ofstream out(dir.file("dup.jsonl"));
    for (int i = 0; i < 2; ++i)
      out << R"({"recording_id":"m0","audio":"m0.wav","rttm":"m0.rttm",)"
          << R"("partition":"train","domain":"roomA"})" << "\n";
  }
  CHECK_THROWS(load_manifest(dir.file("dup.jsonl")));
  {
    std::ofstream out(dir.file("missing.jsonl"));
    out << R"({"recording_id":"x","audio":"nope.wav","rttm":"m0.rttm",)"
        << R"("partition":"train","domain":"roomA"})" << "\n";
  }
  CHECK_THROWS(load_manifest(dir.file("missing.jsonl")));
}

TEST_CASE("embedding files round trip bit-exactly and reject truncation") {
  TempDir dir("emb");
  EmbeddingFile emb;
  emb.recording_id = "e0";
  emb.dim = 8;
  emb.num_frames = 50;
  emb.values.resize(400);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> dist(-2.f, 2.f);
  for (auto& v : emb.values) v = dist(rng);
  save_embeddings(dir.file("e0.emb"), emb);
  const auto back = load_embeddings(dir.file("e0.emb"));
  CHECK(back.recording_id == "e0");
  CHECK(back.dim == 8);
  CHECK(back.num_frames == 50);
  CHECK(back.values == emb.values);

  // Truncate the payload and expect a diagnostic.
  std::ifstream in(dir.file("e0.emb"), std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  in.close();
  {
    std::ofstream out(dir.file("trunc.emb"), std::ios::binary);
    out.write(bytes.data(), static_cast<int64_t>(bytes.size()) - 40);
  }
  CHECK_THROWS(load_embeddings(dir.file("trunc.emb")));
  {
    std::ofstream out(dir.file("magic.emb"), std::ios::binary);
    std::string corrupted = bytes;
    corrupted[0] = 'X';
    out.write(corrupted.data(), static_cast<int64_t>(corrupted.size()));
  }
  CHECK_THROWS(load_embeddings(dir.file("magic.emb")));
}
