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

#include "segmenter/model.hpp"

#include <numeric>
#include <stdexcept>

namespace segmenter {

std::string task_name(Task task) {
  switch (task) {
    case Task::kVad:
      return "vad";
    case Task::kOsd:
      return "osd";
    case Task::kJoint:
      return "joint";
  }
  return "joint";
}

Task task_from_name(const std::string& name) {
  if (name == "vad") return Task::kVad;
  if (name == "osd") return Task::kOsd;
  if (name == "joint") return Task::kJoint;
  throw std::invalid_argument("unknown task: " + name);
}

SegmenterModel::SegmenterModel(int input_dim, const TcnConfig& tcn,
                               const HeadConfig& head, std::mt19937_64& rng)
    : input_dim_(input_dim), tcn_(tcn), head_(head) {
  if (input_dim < 1) throw std::invalid_argument("model: input_dim must be >= 1");
  if (tcn.kernel_size % 2 != 1)
    throw std::invalid_argument("model: kernel_size must be odd");
  if (tcn.dilations.empty() ||
      static_cast<int>(tcn.dilations.size()) != tcn.blocks_per_repeat)
    throw std::invalid_argument(
        "model: dilations must list one dilation per block of a repeat");
  const int H = tcn.hidden_channels;
  const int C = head.num_classes();

  auto conv_param = [&](const std::string& name, int out_c, int in_c, int k) {
    Tensor t = Tensor::zeros({out_c, in_c, k}, true);
    kaiming_init(t, static_cast<int64_t>(in_c) * k, rng);
    return params_.add(name, t);
  };
  auto vec_param = [&](const std::string& name, int n, double fill) {
    Tensor t = Tensor::zeros({n}, true);
    for (double& v : t.data()) v = fill;
    return params_.add(name, t);
  };

  in_w_ = conv_param("in.w", H, input_dim, 1);
  in_b_ = vec_param("in.b", H, 0.0);
  for (int r = 0; r < tcn.repeats; ++r)
    for (int b = 0; b < tcn.blocks_per_repeat; ++b) {
      Block blk;
      blk.dilation = tcn.dilations[static_cast<size_t>(b)];
      const std::string p =
          "tcn.r" + std::to_string(r) + ".b" + std::to_string(b) + ".";
      blk.conv_w = conv_param(p + "conv.w", H, H, tcn.kernel_size);
      blk.conv_b = vec_param(p + "conv.b", H, 0.0);
      blk.gamma = vec_param(p + "norm.gamma", H, 1.0);
      blk.beta = vec_param(p + "norm.beta", H, 0.0);
      blk.alpha = vec_param(p + "prelu.alpha", H, 0.25);
      blk.pw_w = conv_param(p + "pw.w", H, H, 1);
      blk.pw_b = vec_param(p + "pw.b", H, 0.0);
      blocks_.push_back(std::move(blk));
    }
  head_w_ = conv_param("head.w", C, H, 1);
  head_b_ = vec_param("head.b", C, 0.0);
}

Tensor SegmenterModel::forward(const Tensor& x, bool training,
                               std::mt19937_64& rng) const {
  if (x.shape().size() != 3)
    throw std::invalid_argument("model forward: input must be (B, F, T)");
  if (x.dim(1) != input_dim_)
    throw std::invalid_argument(
        "model forward: feature dim " + std::to_string(x.dim(1)) +
        " does not match model input dim " + std::to_string(input_dim_));
  Tensor h = ops::conv1d(x, in_w_, in_b_, 1);
  for (const auto& blk : blocks_) {
    Tensor y = ops::conv1d(h, blk.conv_w, blk.conv_b, blk.dilation);
    y = ops::channel_norm(y, blk.gamma, blk.beta);
    y = ops::prelu(y, blk.alpha);
    y = ops::dropout(y, tcn_.dropout, rng, training);
    y = ops::conv1d(y, blk.pw_w, blk.pw_b, 1);
    h = ops::add(h, y);
  }
  return ops::conv1d(h, head_w_, head_b_, 1);
}

PosteriorSequence SegmenterModel::posterior(const Tensor& features) const {
  if (features.shape().size() != 2)
    throw std::invalid_argument("posterior: features must be (T, F)");
  const int64_t T = features.dim(0);
  std::mt19937_64 rng(0);  // unused, inference has no dropout
  Tensor x = ops::stack({ops::transpose(features)});
  Tensor logits = forward(x, /*training=*/false, rng);
  Tensor probs = ops::softmax_classes(logits);
  PosteriorSequence out;
  out.num_frames = T;
  out.num_classes = head_.num_classes();
  out.task = head_.task;
  out.values.resize(static_cast<size_t>(T) * out.num_classes);
  for (int64_t t = 0; t < T; ++t)
    for (int c = 0; c < out.num_classes; ++c)
      out.values[static_cast<size_t>(t) * out.num_classes + c] =
          probs.data()[static_cast<size_t>(c) * T + t];
  return out;
}

int SegmenterModel::receptive_field() const {
  const int sum_d =
      std::accumulate(tcn_.dilations.begin(), tcn_.dilations.end(), 0);
  // One dilated conv per block: each reaches (kernel-1)/2 * d frames per
  // side, so the total reach is (kernel-1) * sum(dilations) * repeats.
  return 1 + (tcn_.kernel_size - 1) * sum_d * tcn_.repeats;
}

void merge_joint(const PosteriorSequence& posterior, std::vector<uint8_t>* vad,
                 std::vector<uint8_t>* osd) {
  if (posterior.num_classes != 3)
    throw std::invalid_argument("merge_joint: posterior is not 3-class");
  const int64_t T = posterior.num_frames;
  vad->assign(static_cast<size_t>(T), 0);
  osd->assign(static_cast<size_t>(T), 0);
  for (int64_t t = 0; t < T; ++t) {
    int best = 0;
    for (int c = 1; c < 3; ++c)
      if (posterior.at(t, c) > posterior.at(t, best)) best = c;
    (*vad)[static_cast<size_t>(t)] = best >= 1 ? 1 : 0;
    (*osd)[static_cast<size_t>(t)] = best == 2 ? 1 : 0;
  }
}

std::vector<uint8_t> binarize_2class(const PosteriorSequence& posterior,
                                     double threshold) {
  if (posterior.num_classes != 2)
    throw std::invalid_argument("binarize_2class: posterior is not 2-class");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("binarize_2class: threshold must be in (0,1)");
  std::vector<uint8_t> out(static_cast<size_t>(posterior.num_frames));
  for (int64_t t = 0; t < posterior.num_frames; ++t)
    out[static_cast<size_t>(t)] = posterior.at(t, 1) >= threshold ? 1 : 0;
  return out;
}

}  // namespace segmenter
