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

#include "segmenter/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "segmenter/eval.hpp"
#include "segmenter/rttm.hpp"

namespace segmenter {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int task_label(Task task, int count) {
  switch (task) {
    case Task::kJoint:
      return std::min(count, 2);
    case Task::kVad:
      return count >= 1 ? 1 : 0;
    case Task::kOsd:
      return count >= 2 ? 1 : 0;
  }
  return 0;
}

}  // namespace

TrainConfig train_config_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  TrainConfig c;
  c.task = task_from_name(j.value("task", std::string("joint")));
  c.feature_path =
      feature_path_from_name(j.value("feature_path", std::string("logmel")));
  c.batch_size = j.value("batch_size", 64);
  c.max_epochs = j.value("max_epochs", 100);
  c.patience = j.value("patience", 10);
  c.augment_prob = j.value("augment_prob", 0.5);
  c.noise_prob = j.value("noise_prob", 0.5);
  c.noise_snr_min_db = j.value("noise_snr_min_db", 5.0);
  c.noise_snr_max_db = j.value("noise_snr_max_db", 20.0);
  c.seed = j.value("seed", static_cast<uint64_t>(0));
  c.warm_start = j.value("warm_start", std::string());
  c.dev_hop_s = j.value("dev_hop_s", 2.0);
  c.optimizer.learning_rate = j.value("learning_rate", 1e-3);
  if (j.contains("tcn")) {
    const auto& t = j["tcn"];
    c.tcn.blocks_per_repeat = t.value("blocks_per_repeat", 5);
    c.tcn.repeats = t.value("repeats", 3);
    c.tcn.kernel_size = t.value("kernel_size", 3);
    c.tcn.hidden_channels = t.value("hidden_channels", 128);
    if (t.contains("dilations"))
      c.tcn.dilations = t["dilations"].get<std::vector<int>>();
    c.tcn.dropout = t.value("dropout", 0.1);
  }
  if (j.contains("sacc"))
    c.sacc.attention_dim = j["sacc"].value("attention_dim", 256);
  c.adapter_projection = j.value("adapter_projection", false);
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::json j{{"task", task_name(c.task)},
                   {"feature_path", feature_path_name(c.feature_path)},
                   {"batch_size", c.batch_size},
                   {"max_epochs", c.max_epochs},
                   {"patience", c.patience},
                   {"augment_prob", c.augment_prob},
                   {"noise_prob", c.noise_prob},
                   {"noise_snr_min_db", c.noise_snr_min_db},
                   {"noise_snr_max_db", c.noise_snr_max_db},
                   {"seed", c.seed},
                   {"warm_start", c.warm_start},
                   {"dev_hop_s", c.dev_hop_s},
                   {"learning_rate", c.optimizer.learning_rate},
                   {"adapter_projection", c.adapter_projection},
                   {"tcn",
                    {{"blocks_per_repeat", c.tcn.blocks_per_repeat},
                     {"repeats", c.tcn.repeats},
                     {"kernel_size", c.tcn.kernel_size},
                     {"hidden_channels", c.tcn.hidden_channels},
                     {"dilations", c.tcn.dilations},
                     {"dropout", c.tcn.dropout}}},
                   {"sacc", {{"attention_dim", c.sacc.attention_dim}}}};
  return j.dump(2);
}

std::string train_report_to_json(const TrainReport& r) {
  nlohmann::json j;
  j["best_epoch"] = r.best_epoch;
  j["best_metric"] = r.best_metric;
  j["seconds_to_best"] = r.seconds_to_best;
  j["total_seconds"] = r.total_seconds;
  j["total_epochs"] = r.total_epochs;
  j["param_count"] = r.param_count;
  j["diverged"] = r.diverged;
  j["epochs"] = nlohmann::json::array();
  for (const auto& e : r.epochs)
    j["epochs"].push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"dev_f1_vad", e.dev_f1_vad},
                           {"dev_f1_osd", e.dev_f1_osd},
                           {"metric", e.metric}});
  return j.dump(2);
}

TrainReport train_report_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  TrainReport r;
  r.best_epoch = j["best_epoch"];
  r.best_metric = j["best_metric"];
  r.seconds_to_best = j["seconds_to_best"];
  r.total_seconds = j["total_seconds"];
  r.total_epochs = j["total_epochs"];
  r.param_count = j["param_count"];
  r.diverged = j.value("diverged", false);
  // NaN (e.g. the epoch-0 dev probe has no train loss) serializes as null.
  const auto as_double = [](const nlohmann::json& v) {
    return v.is_null() ? std::nan("") : v.get<double>();
  };
  for (const auto& je : j["epochs"]) {
    EpochStats e;
    e.epoch = je["epoch"];
    e.train_loss = as_double(je["train_loss"]);
    e.dev_f1_vad = je["dev_f1_vad"];
    e.dev_f1_osd = je["dev_f1_osd"];
    e.metric = je["metric"];
    r.epochs.push_back(e);
  }
  return r;
}

std::string train_report_to_csv(const TrainReport& r) {
  std::ostringstream os;
  os << "epoch,train_loss,dev_f1_vad,dev_f1_osd,metric\n";
  for (const auto& e : r.epochs)
    os << e.epoch << "," << e.train_loss << "," << e.dev_f1_vad << ","
       << e.dev_f1_osd << "," << e.metric << "\n";
  return os.str();
}

Window mix_augment(const Window& a, const Window& b) {
  if (a.audio.size() != b.audio.size() ||
      a.audio[0].size() != b.audio[0].size() ||
      a.counts.size() != b.counts.size())
    throw std::invalid_argument("mix_augment: window shape mismatch");
  Window out = a;
  double peak = 0.0;
  for (size_t c = 0; c < out.audio.size(); ++c)
    for (size_t i = 0; i < out.audio[c].size(); ++i) {
      out.audio[c][i] += b.audio[c][i];
      peak = std::max(peak, std::abs(out.audio[c][i]));
    }
  if (peak > 1.0)
    for (auto& ch : out.audio)
      for (auto& v : ch) v /= peak;
  for (size_t t = 0; t < out.counts.size(); ++t)
    out.counts[t] = a.counts[t] + b.counts[t];
  return out;
}

void add_noise(std::vector<std::vector<double>>& audio,
               const std::vector<int>& counts, double snr_db,
               std::mt19937_64& rng) {
  if (!std::isfinite(snr_db)) return;  // disabled
  if (audio.empty() || audio[0].empty())
    throw std::invalid_argument("add_noise: empty audio");
  const int64_t n = static_cast<int64_t>(audio[0].size());

  bool any_speech = false;
  for (int c : counts)
    if (c >= 1) {
      any_speech = true;
      break;
    }
  auto in_scope = [&](int64_t i) {
    if (!any_speech) return true;  // SNR over the full window instead
    const auto f = std::min<int64_t>(i / kHopSamples,
                                     static_cast<int64_t>(counts.size()) - 1);
    return counts[static_cast<size_t>(f)] >= 1;
  };

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& ch : audio) {
    std::vector<double> noise(static_cast<size_t>(n));
    for (auto& v : noise) v = gauss(rng);
    double sig = 0.0, noi = 0.0;
    int64_t m = 0;
    for (int64_t i = 0; i < n; ++i) {
      if (!in_scope(i)) continue;
      sig += ch[static_cast<size_t>(i)] * ch[static_cast<size_t>(i)];
      noi += noise[static_cast<size_t>(i)] * noise[static_cast<size_t>(i)];
      ++m;
    }
    if (m == 0 || noi <= 0.0) continue;
    const double signal_rms = std::sqrt(sig / m);
    const double noise_rms = std::sqrt(noi / m);
    // Exact scale so the realized in-scope SNR equals the request.
    const double target = signal_rms * std::pow(10.0, -snr_db / 20.0);
    const double scale = noise_rms > 0.0 ? target / noise_rms : 0.0;
    for (int64_t i = 0; i < n; ++i)
      ch[static_cast<size_t>(i)] += scale * noise[static_cast<size_t>(i)];
  }
}

EpochStats score_partition(const System& system,
                           const std::vector<ManifestEntry>& entries,
                           double hop_s) {
  if (entries.empty())
    throw std::invalid_argument("score_partition: empty partition");
  int64_t vad_tp = 0, vad_fp = 0, vad_fn = 0;
  int64_t osd_tp = 0, osd_fp = 0, osd_fn = 0;
  const Task task = system.task();
  for (const auto& e : entries) {
    PosteriorSequence post;
    double length_s = 0.0;
    if (system.path() == FeaturePath::kEmbedding) {
      if (e.embedding_path.empty())
        throw std::runtime_error("score_partition: manifest entry " +
                                 e.recording_id + " has no embedding file");
      const auto emb = load_embeddings(e.embedding_path);
      post = system.infer_embeddings(emb, hop_s);
      length_s = static_cast<double>(post.num_frames) / kFrameRate;
    } else {
      const auto clip = load_audio(e.audio_path);
      post = system.infer(clip, hop_s);
      length_s = clip.duration_s();
    }
    const auto labels = rasterize_labels(parse_rttm(e.rttm_path), length_s);
    const int64_t T = std::min<int64_t>(post.num_frames, labels.num_frames());

    std::vector<uint8_t> vad_hyp, osd_hyp;
    if (task == Task::kJoint) {
      merge_joint(post, &vad_hyp, &osd_hyp);
    } else {
      auto hyp = binarize_2class(post, 0.5);
      if (task == Task::kVad)
        vad_hyp = std::move(hyp);
      else
        osd_hyp = std::move(hyp);
    }
    for (int64_t t = 0; t < T; ++t) {
      const int cls = labels.classes[static_cast<size_t>(t)];
      if (!vad_hyp.empty()) {
        const bool ref = cls >= 1, hyp = vad_hyp[static_cast<size_t>(t)];
        vad_tp += ref && hyp;
        vad_fp += !ref && hyp;
        vad_fn += ref && !hyp;
      }
      if (!osd_hyp.empty()) {
        const bool ref = cls == 2, hyp = osd_hyp[static_cast<size_t>(t)];
        osd_tp += ref && hyp;
        osd_fp += !ref && hyp;
        osd_fn += ref && !hyp;
      }
    }
  }
  EpochStats stats;
  if (task != Task::kOsd)
    stats.dev_f1_vad = counts_to_score(vad_tp, vad_fp, vad_fn).f1;
  if (task != Task::kVad)
    stats.dev_f1_osd = counts_to_score(osd_tp, osd_fp, osd_fn).f1;
  if (task == Task::kJoint)
    stats.metric = 0.5 * (stats.dev_f1_vad + stats.dev_f1_osd);
  else
    stats.metric = task == Task::kVad ? stats.dev_f1_vad : stats.dev_f1_osd;
  return stats;
}

namespace {

struct TrainItem {
  Window window;
  Tensor embedding;  // (99, D), embedding path only
};

std::vector<double> snapshot_params(const ParamList& params) {
  std::vector<double> out;
  for (const auto& [name, t] : params.items)
    out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

void restore_params(ParamList& params, const std::vector<double>& snapshot) {
  size_t off = 0;
  for (auto& [name, t] : params.items) {
    std::copy(snapshot.begin() + static_cast<int64_t>(off),
              snapshot.begin() + static_cast<int64_t>(off + t.data().size()),
              t.data().begin());
    off += t.data().size();
  }
}

}  // namespace

TrainResult train(const DatasetManifest& manifest, const TrainConfig& cfg) {
  const auto t0 = Clock::now();
  const auto train_entries = manifest.partition("train");
  const auto dev_entries = manifest.partition("dev");
  if (train_entries.empty() || dev_entries.empty())
    throw std::invalid_argument("train: manifest needs train and dev entries");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Materialize training windows.
  std::vector<TrainItem> items;
  int embedding_dim = 0;
  for (const auto& e : train_entries) {
    const auto clip = load_audio(e.audio_path);
    const auto labels = rasterize_labels(parse_rttm(e.rttm_path),
                                         clip.duration_s());
    auto windows = slice_windows(clip, labels, 2.0, 2.0);
    EmbeddingFile emb;
    if (cfg.feature_path == FeaturePath::kEmbedding) {
      if (e.embedding_path.empty())
        throw std::runtime_error("train: entry " + e.recording_id +
                                 " has no embedding file");
      emb = load_embeddings(e.embedding_path);
      embedding_dim = emb.dim;
    }
    for (auto& w : windows) {
      TrainItem item;
      if (cfg.feature_path == FeaturePath::kEmbedding) {
        const int64_t emb_start = w.start_sample / 320;
        item.embedding = embedding_window(emb, emb_start);
        w.audio.clear();  // not needed; embeddings are the features
      }
      item.window = std::move(w);
      items.push_back(std::move(item));
    }
  }
  if (items.empty()) throw std::invalid_argument("train: no training windows");

  System system;
  if (!cfg.warm_start.empty()) {
    system = System::from_checkpoint(load_checkpoint(cfg.warm_start));
    if (system.task() != cfg.task || system.path() != cfg.feature_path)
      throw std::invalid_argument(
          "train: warm-start checkpoint task/path does not match config");
  } else {
    system = System::create(cfg.task, cfg.feature_path, embedding_dim, cfg.tcn,
                            cfg.frontend, cfg.sacc, cfg.adapter_projection,
                            cfg.seed);
  }

  ParamList& params = system.all_params();
  TrainReport report;
  report.param_count = params.total_size();

  // Epoch 0: dev score before any update (warm-start continuity).
  {
    EpochStats s0 = score_partition(system, dev_entries, cfg.dev_hop_s);
    s0.epoch = 0;
    s0.train_loss = std::numeric_limits<double>::quiet_NaN();
    report.epochs.push_back(s0);
    report.best_metric = s0.metric;
    report.best_epoch = 0;
    report.seconds_to_best = seconds_since(t0);
  }
  std::vector<double> best_snapshot = snapshot_params(params);

  AdamState adam;
  std::vector<size_t> order(items.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  int epochs_since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int64_t epoch_windows = 0;
    bool diverged = false;

    for (size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<size_t>(cfg.batch_size)) {
      const size_t batch_end = std::min(
          order.size(), batch_start + static_cast<size_t>(cfg.batch_size));
      std::vector<Tensor> feats;
      std::vector<int> labels;
      std::vector<uint8_t> mask;
      for (size_t i = batch_start; i < batch_end; ++i) {
        const TrainItem& item = items[order[i]];
        if (cfg.feature_path == FeaturePath::kEmbedding) {
          // Waveform-space augmentation is unavailable here; see docs.
          feats.push_back(system.features_from_embedding(item.embedding));
          for (size_t t = 0; t < item.window.counts.size(); ++t) {
            labels.push_back(task_label(cfg.task, item.window.counts[t]));
            mask.push_back(item.window.mask[t]);
          }
          continue;
        }
        const Window* w = &item.window;
        Window scratch;
        if (unit(rng) < cfg.augment_prob && items.size() > 1) {
          const size_t partner =
              std::uniform_int_distribution<size_t>(0, items.size() - 1)(rng);
          scratch = mix_augment(*w, items[partner].window);
          w = &scratch;
        }
        if (unit(rng) < cfg.noise_prob) {
          if (w != &scratch) {
            scratch = *w;
            w = &scratch;
          }
          const double snr = cfg.noise_snr_min_db +
                             (cfg.noise_snr_max_db - cfg.noise_snr_min_db) *
                                 unit(rng);
          add_noise(scratch.audio, scratch.counts, snr, rng);
        }
        feats.push_back(system.features_from_audio(w->audio));
        for (size_t t = 0; t < w->counts.size(); ++t) {
          labels.push_back(task_label(cfg.task, w->counts[t]));
          mask.push_back(w->mask[t]);
        }
      }

      Tensor x = ops::stack(feats);
      Tensor logits = system.model().forward(x, /*training=*/true, rng);
      Tensor loss = ops::masked_cross_entropy(logits, labels, mask);
      if (!std::isfinite(loss.item())) {
        diverged = true;
        break;
      }
      params.zero_grads();
      backward(loss);
      adam_step(params, adam, cfg.optimizer);
      epoch_loss += loss.item() * static_cast<double>(batch_end - batch_start);
      epoch_windows += static_cast<int64_t>(batch_end - batch_start);
    }

    if (diverged) {
      report.diverged = true;
      break;
    }

    EpochStats stats = score_partition(system, dev_entries, cfg.dev_hop_s);
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(epoch_windows);
    report.epochs.push_back(stats);

    if (stats.metric > report.best_metric) {
      report.best_metric = stats.metric;
      report.best_epoch = epoch;
      report.seconds_to_best = seconds_since(t0);
      best_snapshot = snapshot_params(params);
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }

  restore_params(params, best_snapshot);
  report.total_epochs = static_cast<int>(report.epochs.size()) - 1;
  report.total_seconds = seconds_since(t0);

  TrainResult result;
  result.system = std::move(system);
  result.report = std::move(report);
  return result;
}

}  // namespace segmenter
