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

#ifndef SEGMENTER_MODEL_HPP_
#define SEGMENTER_MODEL_HPP_

#include <random>
#include <string>
#include <vector>

#include "segmenter/adam.hpp"
#include "segmenter/tensor.hpp"

namespace segmenter {

struct TcnConfig {
  int blocks_per_repeat = 5;
  int repeats = 3;
  int kernel_size = 3;
  int hidden_channels = 128;
  std::vector<int> dilations = {1, 2, 4, 8, 16};  // per repeat
  double dropout = 0.1;
};

enum class Task { kVad, kOsd, kJoint };

std::string task_name(Task task);
Task task_from_name(const std::string& name);

struct HeadConfig {
  Task task = Task::kJoint;
  int num_classes() const { return task == Task::kJoint ? 3 : 2; }
};

// T x C posteriors at 100 Hz; rows on the probability simplex.
struct PosteriorSequence {
  std::string recording_id;
  int64_t num_frames = 0;
  int num_classes = 0;
  std::vector<double> values;  // (T, C) row-major
  Task task = Task::kJoint;

  double at(int64_t t, int c) const { return values[t * num_classes + c]; }
};

// Dilated-residual TCN over feature sequences with a softmax
// classification head. Block: dilated conv -> channel norm -> PReLU ->
// dropout -> 1x1 conv -> residual add. Same (non-causal) padding keeps T.
class SegmenterModel {
 public:
  SegmenterModel() = default;
  SegmenterModel(int input_dim, const TcnConfig& tcn, const HeadConfig& head,
                 std::mt19937_64& rng);

  // x: (B, F_in, T) feature batch; returns logits (B, C, T).
  Tensor forward(const Tensor& x, bool training, std::mt19937_64& rng) const;

  // Convenience single-sequence inference; features (T, F_in) tensor.
  PosteriorSequence posterior(const Tensor& features) const;

  ParamList& params() { return params_; }
  const ParamList& params() const { return params_; }
  int input_dim() const { return input_dim_; }
  const TcnConfig& tcn_config() const { return tcn_; }
  const HeadConfig& head_config() const { return head_; }

  // Frames of one-sided context: receptive field is
  // 1 + 2 * (k-1) * sum(dilations) * repeats.
  int receptive_field() const;

 private:
  int input_dim_ = 0;
  TcnConfig tcn_;
  HeadConfig head_;
  ParamList params_;
  // Views into params_, in forward order.
  struct Block {
    Tensor conv_w, conv_b, gamma, beta, alpha, pw_w, pw_b;
    int dilation = 1;
  };
  Tensor in_w_, in_b_;
  std::vector<Block> blocks_;
  Tensor head_w_, head_b_;
};

// Frame-wise argmax with ties broken toward the lower class index;
// vad = (argmax >= 1), osd = (argmax == 2).
void merge_joint(const PosteriorSequence& posterior, std::vector<uint8_t>* vad,
                 std::vector<uint8_t>* osd);

// decision[t] = 1 iff positive-class probability >= threshold.
std::vector<uint8_t> binarize_2class(const PosteriorSequence& posterior,
                                     double threshold);

}  // namespace segmenter

#endif  // SEGMENTER_MODEL_HPP_
