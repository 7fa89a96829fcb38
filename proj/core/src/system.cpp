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

#include "segmenter/system.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace segmenter {

std::string feature_path_name(FeaturePath path) {
  switch (path) {
    case FeaturePath::kLogMel:
      return "logmel";
    case FeaturePath::kSacc:
      return "sacc";
    case FeaturePath::kEmbedding:
      return "embedding";
  }
  return "logmel";
}

FeaturePath feature_path_from_name(const std::string& name) {
  if (name == "logmel") return FeaturePath::kLogMel;
  if (name == "sacc") return FeaturePath::kSacc;
  if (name == "embedding") return FeaturePath::kEmbedding;
  throw std::invalid_argument("unknown feature path: " + name);
}

namespace {

Tensor mel_fb_transposed(const FrontendConfig& cfg) {
  const auto fb = mel_filterbank(cfg);  // (num_mel, F)
  const int F = cfg.num_bins();
  std::vector<double> t(static_cast<size_t>(F) * cfg.num_mel);
  for (int k = 0; k < cfg.num_mel; ++k)
    for (int f = 0; f < F; ++f)
      t[static_cast<size_t>(f) * cfg.num_mel + k] =
          fb[static_cast<size_t>(k) * F + f];
  return Tensor::from_data({F, cfg.num_mel}, std::move(t));
}

}  // namespace

System System::create(Task task, FeaturePath path, int input_dim,
                      const TcnConfig& tcn, const FrontendConfig& frontend,
                      const SaccConfig& sacc, bool adapter_projection,
                      uint64_t seed) {
  System s;
  s.path_ = path;
  s.frontend_ = frontend;
  s.sacc_cfg_ = sacc;
  s.sacc_cfg_.input_dim = frontend.num_bins();
  std::mt19937_64 rng(seed);

  if (path == FeaturePath::kLogMel || path == FeaturePath::kSacc)
    input_dim = frontend.num_mel;
  if (path == FeaturePath::kSacc) {
    s.sacc_params_ = SaccParams::init(s.sacc_cfg_, rng);
    s.params_.add("sacc.key", s.sacc_params_.key);
    s.params_.add("sacc.query", s.sacc_params_.query);
  }
  if (path == FeaturePath::kEmbedding) {
    s.adapter_params_ = AlignmentParams::init(adapter_projection, input_dim);
    s.params_.add("adapter.time_map", s.adapter_params_.time_map);
    if (s.adapter_params_.projection.defined())
      s.params_.add("adapter.projection", s.adapter_params_.projection);
  }
  HeadConfig head;
  head.task = task;
  s.model_ = SegmenterModel(input_dim, tcn, head, rng);
  s.params_.append(s.model_.params());
  s.mel_fb_t_ = mel_fb_transposed(s.frontend_);
  return s;
}

Tensor System::features_from_audio(
    const std::vector<std::vector<double>>& audio,
    ChannelWeights* weights_out) const {
  if (audio.empty() || audio[0].empty())
    throw std::invalid_argument("features_from_audio: empty window");
  AudioClip win;
  win.channels = audio;

  Tensor mag2d;  // (T, F_bins) magnitude, graph tensor for the SACC path
  if (path_ == FeaturePath::kSacc) {
    const auto spec = stft(win, frontend_);
    mag2d = sacc_combine(spec, sacc_params_, sacc_cfg_, weights_out);
  } else {
    AudioClip mono;
    mono.channels = {audio[0]};
    const auto spec = stft(mono, frontend_);
    mag2d = Tensor::from_data({spec.num_frames, spec.num_bins},
                              spec.magnitude);
    if (weights_out) {
      weights_out->num_frames = spec.num_frames;
      weights_out->num_channels = 1;
      weights_out->values.assign(static_cast<size_t>(spec.num_frames), 1.0);
    }
  }
  // log-mel and window-level MVN, differentiable for the SACC path.
  Tensor power = ops::mul(mag2d, mag2d);
  Tensor mel = ops::matmul(power, mel_fb_t_);
  Tensor feats = ops::mvn_time(ops::log_offset(mel, frontend_.log_floor));
  return ops::transpose(feats);  // (F, T)
}

Tensor System::features_from_embedding(const Tensor& embeddings) const {
  if (path_ != FeaturePath::kEmbedding)
    throw std::logic_error("features_from_embedding: wrong feature path");
  return ops::transpose(align(embeddings, adapter_params_));
}

namespace {

PosteriorSequence stitch_windows(
    const std::vector<std::pair<int64_t, PosteriorSequence>>& windows,
    int64_t total_frames, Task task) {
  const int C = windows.empty() ? 0 : windows[0].second.num_classes;
  PosteriorSequence out;
  out.num_frames = total_frames;
  out.num_classes = C;
  out.task = task;
  out.values.assign(static_cast<size_t>(total_frames) * C, 0.0);
  std::vector<int> hits(static_cast<size_t>(total_frames), 0);
  for (const auto& [frame0, post] : windows)
    for (int64_t t = 0; t < post.num_frames; ++t) {
      const int64_t gt = frame0 + t;
      if (gt >= total_frames) break;
      for (int c = 0; c < C; ++c)
        out.values[static_cast<size_t>(gt) * C + c] += post.at(t, c);
      hits[static_cast<size_t>(gt)] += 1;
    }
  for (int64_t t = 0; t < total_frames; ++t) {
    if (hits[static_cast<size_t>(t)] == 0) continue;
    for (int c = 0; c < C; ++c)
      out.values[static_cast<size_t>(t) * C + c] /=
          static_cast<double>(hits[static_cast<size_t>(t)]);
  }
  return out;
}

}  // namespace

PosteriorSequence System::infer(const AudioClip& clip, double hop_s) const {
  if (path_ == FeaturePath::kEmbedding)
    throw std::logic_error("infer: embedding path needs infer_embeddings");
  const auto empty = rasterize_labels({}, clip.duration_s());
  const auto windows = slice_windows(clip, empty, 2.0, hop_s);
  std::vector<std::pair<int64_t, PosteriorSequence>> posts;
  for (const auto& w : windows) {
    Tensor feats = features_from_audio(w.audio);
    auto post = model_.posterior(ops::transpose(feats));
    // Drop padded tail frames so stitching only sees real audio.
    int64_t valid = 0;
    for (auto m : w.mask) valid += m;
    post.num_frames = valid;
    post.values.resize(static_cast<size_t>(valid) * post.num_classes);
    posts.emplace_back(w.start_sample / kHopSamples, std::move(post));
  }
  auto out = stitch_windows(posts, empty.num_frames(), task());
  out.recording_id = clip.recording_id;
  return out;
}

PosteriorSequence System::infer_embeddings(const EmbeddingFile& emb,
                                           double hop_s) const {
  const auto hop_frames =
      static_cast<int64_t>(std::llround(hop_s * kFrameRate));
  if (hop_frames < 1 || (hop_frames * kHopSamples) % 320 != 0)
    throw std::invalid_argument(
        "infer_embeddings: hop must align with the 20 ms embedding grid");
  // Total aligned frames: 2 per embedding frame.
  const int64_t total_frames = emb.num_frames * 2;
  std::vector<std::pair<int64_t, PosteriorSequence>> posts;
  for (int64_t frame0 = 0;
       frame0 == 0 || frame0 < total_frames; frame0 += hop_frames) {
    const int64_t emb_start = frame0 / 2;
    std::vector<uint8_t> emb_mask;
    Tensor block = embedding_window(emb, emb_start, &emb_mask);
    Tensor feats = features_from_embedding(block);
    auto post = model_.posterior(ops::transpose(feats));
    int64_t valid = 0;
    for (auto m : emb_mask) valid += m ? 2 : 0;
    post.num_frames = std::min<int64_t>(valid, post.num_frames);
    post.values.resize(static_cast<size_t>(post.num_frames) *
                       post.num_classes);
    posts.emplace_back(frame0, std::move(post));
    if (frame0 + kAlignedFramesPerWindow >= total_frames) break;
  }
  auto out = stitch_windows(posts, total_frames, task());
  out.recording_id = emb.recording_id;
  return out;
}

ChannelWeights System::channel_weights(const AudioClip& clip) const {
  if (path_ != FeaturePath::kSacc)
    throw std::logic_error("channel_weights: not a SACC system");
  auto spec = stft(clip, frontend_);
  return sacc_weights(spec, sacc_params_, sacc_cfg_);
}

ParamList& System::all_params() { return params_; }
const ParamList& System::all_params() const { return params_; }

Checkpoint System::to_checkpoint(const std::string& meta_json) const {
  nlohmann::json j;
  j["format"] = 1;
  j["task"] = task_name(model_.head_config().task);
  j["feature_path"] = feature_path_name(path_);
  j["input_dim"] = model_.input_dim();
  const auto& tcn = model_.tcn_config();
  j["tcn"] = {{"blocks_per_repeat", tcn.blocks_per_repeat},
              {"repeats", tcn.repeats},
              {"kernel_size", tcn.kernel_size},
              {"hidden_channels", tcn.hidden_channels},
              {"dilations", tcn.dilations},
              {"dropout", tcn.dropout}};
  j["frontend"] = {{"win_length", frontend_.win_length},
                   {"hop", frontend_.hop},
                   {"fft_size", frontend_.fft_size},
                   {"num_mel", frontend_.num_mel},
                   {"mel_low_hz", frontend_.mel_low_hz},
                   {"mel_high_hz", frontend_.mel_high_hz},
                   {"log_floor", frontend_.log_floor}};
  if (path_ == FeaturePath::kSacc)
    j["sacc"] = {{"attention_dim", sacc_cfg_.attention_dim},
                 {"epsilon", sacc_cfg_.epsilon}};
  if (path_ == FeaturePath::kEmbedding)
    j["adapter"] = {{"projection", adapter_params_.projection.defined()}};
  j["meta"] = nlohmann::json::parse(meta_json);

  Checkpoint ckpt;
  ckpt.config_json = j.dump();
  for (const auto& [name, t] : params_.items)
    ckpt.params.add(name, Tensor::from_data(t.shape(), t.data(), true));
  return ckpt;
}

System System::from_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json j = nlohmann::json::parse(ckpt.config_json);
  TcnConfig tcn;
  tcn.blocks_per_repeat = j["tcn"]["blocks_per_repeat"];
  tcn.repeats = j["tcn"]["repeats"];
  tcn.kernel_size = j["tcn"]["kernel_size"];
  tcn.hidden_channels = j["tcn"]["hidden_channels"];
  tcn.dilations = j["tcn"]["dilations"].get<std::vector<int>>();
  tcn.dropout = j["tcn"]["dropout"];
  FrontendConfig fe;
  fe.win_length = j["frontend"]["win_length"];
  fe.hop = j["frontend"]["hop"];
  fe.fft_size = j["frontend"]["fft_size"];
  fe.num_mel = j["frontend"]["num_mel"];
  fe.mel_low_hz = j["frontend"]["mel_low_hz"];
  fe.mel_high_hz = j["frontend"]["mel_high_hz"];
  fe.log_floor = j["frontend"]["log_floor"];
  SaccConfig sacc;
  if (j.contains("sacc")) {
    sacc.attention_dim = j["sacc"]["attention_dim"];
    sacc.epsilon = j["sacc"]["epsilon"];
  }
  const bool adapter_projection =
      j.contains("adapter") && j["adapter"]["projection"].get<bool>();

  System s = create(task_from_name(j["task"].get<std::string>()),
                    feature_path_from_name(j["feature_path"].get<std::string>()),
                    j["input_dim"].get<int>(), tcn, fe, sacc,
                    adapter_projection, /*seed=*/0);
  // Overwrite initialized values with the stored payloads.
  for (auto& [name, t] : s.params_.items) {
    bool found = false;
    for (const auto& [cname, ct] : ckpt.params.items) {
      if (cname != name) continue;
      if (ct.shape() != t.shape())
        throw std::runtime_error("checkpoint: shape mismatch for " + name);
      t.data() = ct.data();
      found = true;
      break;
    }
    if (!found)
      throw std::runtime_error("checkpoint: missing parameter " + name);
  }
  return s;
}

}  // namespace segmenter
