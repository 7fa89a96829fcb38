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

#ifndef SEGMENTER_SYSTEM_HPP_
#define SEGMENTER_SYSTEM_HPP_

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "segmenter/adapter.hpp"
#include "segmenter/checkpoint.hpp"
#include "segmenter/frontend.hpp"
#include "segmenter/labels.hpp"
#include "segmenter/model.hpp"
#include "segmenter/sacc.hpp"

namespace segmenter {

enum class FeaturePath { kLogMel, kSacc, kEmbedding };

std::string feature_path_name(FeaturePath path);
FeaturePath feature_path_from_name(const std::string& name);

// A trained or trainable system: the TCN classifier plus whichever
// learnable frontend the feature path requires.
class System {
 public:
  System() = default;

  static System create(Task task, FeaturePath path, int input_dim,
                       const TcnConfig& tcn, const FrontendConfig& frontend,
                       const SaccConfig& sacc, bool adapter_projection,
                       uint64_t seed);

  // Differentiable per-window features as an (F, T) graph tensor.
  // audio: M x 32000 window samples (log-mel and SACC paths).
  Tensor features_from_audio(const std::vector<std::vector<double>>& audio,
                             ChannelWeights* weights_out = nullptr) const;
  // embeddings: (99, D) window block (embedding path).
  Tensor features_from_embedding(const Tensor& embeddings) const;

  // Whole-recording inference: slide 2 s windows at hop_s and average
  // posteriors of overlapping windows per frame.
  PosteriorSequence infer(const AudioClip& clip, double hop_s = 0.5) const;
  PosteriorSequence infer_embeddings(const EmbeddingFile& emb,
                                     double hop_s = 0.5) const;

  // SACC channel weights over a whole recording (hop = window).
  ChannelWeights channel_weights(const AudioClip& clip) const;

  // All learnable parameters, frontend first, in a stable order.
  ParamList& all_params();
  const ParamList& all_params() const;

  Checkpoint to_checkpoint(const std::string& meta_json = "{}") const;
  static System from_checkpoint(const Checkpoint& ckpt);

  Task task() const { return model_.head_config().task; }
  FeaturePath path() const { return path_; }
  SegmenterModel& model() { return model_; }
  const SegmenterModel& model() const { return model_; }
  const FrontendConfig& frontend() const { return frontend_; }
  const SaccParams& sacc_params() const { return sacc_params_; }
  const AlignmentParams& adapter_params() const { return adapter_params_; }

 private:
  FeaturePath path_ = FeaturePath::kLogMel;
  FrontendConfig frontend_;
  SaccConfig sacc_cfg_;
  SegmenterModel model_;
  SaccParams sacc_params_;
  AlignmentParams adapter_params_;
  ParamList params_;
  Tensor mel_fb_t_;  // (F_bins, num_mel), constant
};

}  // namespace segmenter

#endif  // SEGMENTER_SYSTEM_HPP_
