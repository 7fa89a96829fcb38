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
// Command-line surface: corpus synthesis, training, evaluation, threshold
// sweeps, segmentation of new audio, channel-weight exports, and system
// comparison. Every run writes a resolved-config snapshot into --out.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "segmenter/eval.hpp"
#include "segmenter/segments.hpp"
#include "segmenter/synth.hpp"
#include "segmenter/trainer.hpp"

namespace fs = std::filesystem;
using namespace segmenter;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// Creates the run directory; an existing non-empty directory needs --force.
void prepare_out(const std::string& out, bool force) {
  if (fs::exists(out) && !fs::is_empty(out) && !force)
    throw std::runtime_error("output directory " + out +
                             " is not empty (use --force to overwrite)");
  fs::create_directories(out);
}

void write_snapshot(const std::string& out, const std::string& subcommand,
                    const nlohmann::json& resolved) {
  nlohmann::json j{{"subcommand", subcommand}, {"resolved", resolved}};
  write_file(fs::path(out) / "resolved_config.json", j.dump(2));
}

int cmd_synth(const std::string& config, const std::string& out,
              uint64_t seed_override, bool has_seed, bool embeddings,
              bool force) {
  SynthSpec spec = synth_spec_from_json(read_file(config));
  if (has_seed) spec.seed = seed_override;
  prepare_out(out, force);
  const auto corpus = generate(spec);
  write_corpus(corpus, out, embeddings);
  write_snapshot(out, "synth",
                 nlohmann::json::parse(synth_spec_to_json(spec)));
  std::cout << "wrote corpus with " << corpus.recordings.size()
            << " recordings to " << out << "\n";
  return 0;
}

int cmd_train(const std::string& config, const std::string& manifest_path,
              const std::string& out, uint64_t seed_override, bool has_seed,
              bool force) {
  TrainConfig cfg = train_config_from_json(read_file(config));
  if (has_seed) cfg.seed = seed_override;
  prepare_out(out, force);
  const auto manifest = load_manifest(manifest_path);
  write_snapshot(out, "train",
                 nlohmann::json::parse(train_config_to_json(cfg)));
  auto result = train(manifest, cfg);
  save_checkpoint((fs::path(out) / "checkpoint.bin").string(),
                  result.system.to_checkpoint());
  write_file(fs::path(out) / "train_report.json",
             train_report_to_json(result.report));
  write_file(fs::path(out) / "train_report.csv",
             train_report_to_csv(result.report));
  std::cout << "best dev metric " << result.report.best_metric << " at epoch "
            << result.report.best_epoch << "\n";
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& manifest_path,
                 const std::string& mode, const std::string& out,
                 double threshold, bool force) {
  prepare_out(out, force);
  const auto system = System::from_checkpoint(load_checkpoint(checkpoint));
  const auto manifest = load_manifest(manifest_path);
  const auto report = evaluate(system, manifest, mode, 0.5, threshold);
  write_file(fs::path(out) / "score_report.json", score_report_to_json(report));
  write_file(fs::path(out) / "score_report.csv", score_report_to_csv(report));
  write_file(fs::path(out) / "score_report.txt", score_report_to_table(report));
  write_snapshot(out, "evaluate",
                 {{"checkpoint", checkpoint},
                  {"manifest", manifest_path},
                  {"mode", mode},
                  {"threshold", threshold}});
  std::cout << score_report_to_table(report);
  return 0;
}

int cmd_sweep(const std::string& checkpoint, const std::string& manifest_path,
              const std::string& out, bool force) {
  prepare_out(out, force);
  const auto system = System::from_checkpoint(load_checkpoint(checkpoint));
  if (system.task() == Task::kJoint)
    throw std::runtime_error("sweep-threshold needs a dedicated 2-class model");
  const auto manifest = load_manifest(manifest_path);
  // The sweep itself is the 2-class dev stage of evaluate().
  const auto report = evaluate(system, manifest, "2class", 0.5);
  nlohmann::json j{{"threshold", report.threshold},
                   {"eval_micro_f1", system.task() == Task::kVad
                                         ? report.vad_micro.f1
                                         : report.osd_micro.f1}};
  write_file(fs::path(out) / "sweep.json", j.dump(2));
  write_snapshot(out, "sweep-threshold",
                 {{"checkpoint", checkpoint}, {"manifest", manifest_path}});
  std::cout << "best dev threshold " << report.threshold << "\n";
  return 0;
}

int cmd_segment(const std::string& checkpoint, const std::string& audio,
                const std::string& out, double threshold, double gap_close_ms,
                double min_dur_ms, bool force) {
  prepare_out(out, force);
  const auto system = System::from_checkpoint(load_checkpoint(checkpoint));
  const auto clip = load_audio(audio);
  const auto post = system.infer(clip);

  std::vector<uint8_t> vad, osd;
  if (system.task() == Task::kJoint) {
    merge_joint(post, &vad, &osd);
  } else {
    auto hyp = binarize_2class(post, threshold > 0 ? threshold : 0.5);
    (system.task() == Task::kVad ? vad : osd) = std::move(hyp);
  }
  std::vector<SpeakerSegment> segments;
  const std::string rec = clip.recording_id;
  if (!vad.empty()) {
    auto s = frames_to_segments(vad, rec, "speech", gap_close_ms / 1000.0,
                                min_dur_ms / 1000.0);
    segments.insert(segments.end(), s.begin(), s.end());
  }
  if (!osd.empty()) {
    auto s = frames_to_segments(osd, rec, "overlap", gap_close_ms / 1000.0,
                                min_dur_ms / 1000.0);
    segments.insert(segments.end(), s.begin(), s.end());
  }
  write_rttm((fs::path(out) / "segments.rttm").string(), segments);
  write_snapshot(out, "segment",
                 {{"checkpoint", checkpoint},
                  {"audio", audio},
                  {"threshold", threshold},
                  {"gap_close_ms", gap_close_ms},
                  {"min_dur_ms", min_dur_ms}});
  std::cout << segments.size() << " segments written\n";
  return 0;
}

int cmd_export_weights(const std::string& checkpoint, const std::string& audio,
                       const std::string& manifest_path, const std::string& out,
                       bool force) {
  prepare_out(out, force);
  const auto system = System::from_checkpoint(load_checkpoint(checkpoint));
  if (system.path() != FeaturePath::kSacc)
    throw std::runtime_error(
        "export-weights needs a multi-channel attention checkpoint");
  if (!manifest_path.empty()) {
    const auto manifest = load_manifest(manifest_path);
    const auto rows = spatial_report(system, manifest);
    write_file(fs::path(out) / "spatial_report.csv",
               spatial_report_to_csv(rows));
  }
  if (!audio.empty()) {
    const auto clip = load_audio(audio);
    const auto weights = system.channel_weights(clip);
    std::ostringstream os;
    os << "frame";
    for (int m = 0; m < weights.num_channels; ++m) os << ",ch" << m;
    os << "\n";
    for (int64_t t = 0; t < weights.num_frames; ++t) {
      os << t;
      for (int m = 0; m < weights.num_channels; ++m)
        os << "," << weights.at(t, m);
      os << "\n";
    }
    write_file(fs::path(out) / "channel_weights.csv", os.str());
  }
  write_snapshot(out, "export-weights",
                 {{"checkpoint", checkpoint},
                  {"audio", audio},
                  {"manifest", manifest_path}});
  return 0;
}

int cmd_compare(const std::string& vad_dir, const std::string& osd_dir,
                const std::string& joint_dir, const std::string& out,
                bool force) {
  prepare_out(out, force);
  auto load_pair = [](const std::string& dir) {
    return std::make_pair(
        score_report_from_json(
            read_file((fs::path(dir) / "score_report.json").string())),
        train_report_from_json(
            read_file((fs::path(dir) / "train_report.json").string())));
  };
  const auto [vad_score, vad_train] = load_pair(vad_dir);
  const auto [osd_score, osd_train] = load_pair(osd_dir);
  const auto [joint_score, joint_train] = load_pair(joint_dir);
  const auto cmp = compare_systems(vad_score, osd_score, joint_score,
                                   vad_train, osd_train, joint_train);
  write_file(fs::path(out) / "comparison.csv", comparison_to_csv(cmp));
  write_snapshot(out, "compare",
                 {{"vad", vad_dir}, {"osd", osd_dir}, {"joint", joint_dir}});
  std::cout << comparison_to_csv(cmp);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-level voice-activity and overlapped-speech segmenter"};
  app.require_subcommand(1);

  std::string config, manifest, out, checkpoint, mode = "3class", audio;
  std::string vad_dir, osd_dir, joint_dir;
  double threshold = -1.0, gap_close_ms = 0.0, min_dur_ms = 0.0;
  uint64_t seed = 0;
  bool force = false, embeddings = false;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--config", config)->required();
  synth->add_option("--out", out)->required();
  auto* synth_seed = synth->add_option("--seed", seed);
  synth->add_flag("--embeddings", embeddings,
                  "also emit frame-embedding files");
  synth->add_flag("--force", force);

  auto* train_cmd = app.add_subcommand("train", "Train a system");
  train_cmd->add_option("--config", config)->required();
  train_cmd->add_option("--manifest", manifest)->required();
  train_cmd->add_option("--out", out)->required();
  auto* train_seed = train_cmd->add_option("--seed", seed);
  train_cmd->add_flag("--force", force);

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--manifest", manifest)->required();
  eval_cmd->add_option("--mode", mode)
      ->check(CLI::IsMember({"2class", "3class"}));
  eval_cmd->add_option("--out", out)->required();
  eval_cmd->add_option("--threshold", threshold);
  eval_cmd->add_flag("--force", force);

  auto* sweep = app.add_subcommand("sweep-threshold",
                                   "Grid-search the detection threshold");
  sweep->add_option("--checkpoint", checkpoint)->required();
  sweep->add_option("--manifest", manifest)->required();
  sweep->add_option("--out", out)->required();
  sweep->add_flag("--force", force);

  auto* seg = app.add_subcommand("segment", "Segment a WAV file");
  seg->add_option("--checkpoint", checkpoint)->required();
  seg->add_option("--audio", audio)->required();
  seg->add_option("--out", out)->required();
  seg->add_option("--threshold", threshold);
  seg->add_option("--gap-close-ms", gap_close_ms);
  seg->add_option("--min-dur-ms", min_dur_ms);
  seg->add_flag("--force", force);

  auto* exp = app.add_subcommand("export-weights",
                                 "Export attention channel weights");
  exp->add_option("--checkpoint", checkpoint)->required();
  exp->add_option("--audio", audio);
  exp->add_option("--manifest", manifest);
  exp->add_option("--out", out)->required();
  exp->add_flag("--force", force);

  auto* cmp = app.add_subcommand("compare",
                                 "Compare dedicated and joint runs");
  cmp->add_option("--vad", vad_dir)->required();
  cmp->add_option("--osd", osd_dir)->required();
  cmp->add_option("--joint", joint_dir)->required();
  cmp->add_option("--out", out)->required();
  cmp->add_flag("--force", force);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed())
      return cmd_synth(config, out, seed, !synth_seed->empty(), embeddings,
                       force);
    if (train_cmd->parsed())
      return cmd_train(config, manifest, out, seed, !train_seed->empty(),
                       force);
    if (eval_cmd->parsed())
      return cmd_evaluate(checkpoint, manifest, mode, out, threshold, force);
    if (sweep->parsed()) return cmd_sweep(checkpoint, manifest, out, force);
    if (seg->parsed())
      return cmd_segment(checkpoint, audio, out, threshold, gap_close_ms,
                         min_dur_ms, force);
    if (exp->parsed())
      return cmd_export_weights(checkpoint, audio, manifest, out, force);
    if (cmp->parsed())
      return cmd_compare(vad_dir, osd_dir, joint_dir, out, force);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
