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
//
// End-to-end checks of the command-line binary (path via $SEGMENTER_CLI).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "test_util.hpp"

#include "segmenter/labels.hpp"
#include "segmenter/rttm.hpp"

using namespace segmenter;
using testutil::TempDir;
namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* path = std::getenv("SEGMENTER_CLI");
  REQUIRE_MESSAGE(path != nullptr, "SEGMENTER_CLI must point at the binary");
  return path;
}

int run(const std::string& args) {
  const std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("synth, train, evaluate, segment pipeline") {
  TempDir dir("cli");
  write(dir.file("synth.json"),
        R"({"seed": 5, "num_recordings": 4, "recording_length_s": 10.0,
            "num_speakers": 3, "overlap_ratio": 0.25,
            "train_recordings": 2, "dev_recordings": 1,
            "eval_recordings": 1})");
  write(dir.file("train.json"),
        R"({"task": "joint", "feature_path": "logmel", "batch_size": 8,
            "max_epochs": 2, "patience": 5, "seed": 1,
            "tcn": {"hidden_channels": 8}})");

  REQUIRE(run("synth --config " + dir.file("synth.json") + " --out " +
              dir.file("corpus")) == 0);
  CHECK(fs::exists(dir.file("corpus") + "/manifest.jsonl"));
  CHECK(fs::exists(dir.file("corpus") + "/resolved_config.json"));

  // A non-empty run directory is refused without --force.
  CHECK(run("synth --config " + dir.file("synth.json") + " --out " +
            dir.file("corpus")) != 0);
  CHECK(run("synth --config " + dir.file("synth.json") + " --out " +
            dir.file("corpus") + " --force") == 0);

  const std::string manifest = dir.file("corpus") + "/manifest.jsonl";
  REQUIRE(run("train --config " + dir.file("train.json") + " --manifest " +
              manifest + " --out " + dir.file("run")) == 0);
  CHECK(fs::exists(dir.file("run") + "/checkpoint.bin"));
  CHECK(fs::exists(dir.file("run") + "/train_report.json"));
  CHECK(fs::exists(dir.file("run") + "/train_report.csv"));

  const std::string ckpt = dir.file("run") + "/checkpoint.bin";
  REQUIRE(run("evaluate --checkpoint " + ckpt + " --manifest " + manifest +
              " --mode 3class --out " + dir.file("eval")) == 0);
  CHECK(fs::exists(dir.file("eval") + "/score_report.json"));
  CHECK(fs::exists(dir.file("eval") + "/score_report.csv"));

  // 2class evaluation of a joint checkpoint must fail with a diagnostic.
  CHECK(run("evaluate --checkpoint " + ckpt + " --manifest " + manifest +
            " --mode 2class --out " + dir.file("eval_bad")) != 0);

  // Segment one of the corpus WAVs and re-rasterize the output.
  std::string wav;
  for (const auto& entry : fs::directory_iterator(dir.file("corpus")))
    if (entry.path().extension() == ".wav") {
      wav = entry.path().string();
      break;
    }
  REQUIRE(!wav.empty());
  REQUIRE(run("segment --checkpoint " + ckpt + " --audio " + wav + " --out " +
              dir.file("seg")) == 0);
  REQUIRE(fs::exists(dir.file("seg") + "/segments.rttm"));
  // Pass-through defaults: every emitted segment is on the 10 ms grid.
  for (const auto& s : parse_rttm(dir.file("seg") + "/segments.rttm")) {
    CHECK(std::abs(s.onset * 100 - std::round(s.onset * 100)) < 1e-6);
    CHECK(std::abs(s.duration * 100 - std::round(s.duration * 100)) < 1e-6);
    CHECK((s.speaker_id == "speech" || s.speaker_id == "overlap"));
  }

  // export-weights rejects a single-channel log-mel checkpoint.
  CHECK(run("export-weights --checkpoint " + ckpt + " --audio " + wav +
            " --out " + dir.file("weights")) != 0);
}

TEST_CASE("unknown flags exit nonzero") {
  CHECK(run("train --definitely-not-a-flag 1") != 0);
  CHECK(run("not-a-subcommand") != 0);
}
