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

#ifndef SEGMENTER_ADAPTER_HPP_
#define SEGMENTER_ADAPTER_HPP_

#include <string>
#include <vector>

#include "segmenter/tensor.hpp"

namespace segmenter {

inline constexpr int kEmbeddingFramesPerWindow = 99;   // 20 ms rate, 2 s window
inline constexpr int kAlignedFramesPerWindow = 200;    // 100 Hz target

// Precomputed self-supervised embeddings at a 20 ms frame period.
// On-disk layout (little-endian):
//   magic "SEGEMB01" | u32 version=1 | u32 D | u64 T_e | f32 frame_period_ms
//   | u32 id_length | id bytes (UTF-8) | T_e*D float32 row-major
struct EmbeddingFile {
  std::string recording_id;
  double frame_period_ms = 20.0;
  int dim = 0;
  int64_t num_frames = 0;
  std::vector<float> values;  // (T_e, D) row-major

  float at(int64_t t, int d) const { return values[t * dim + d]; }
};

EmbeddingFile load_embeddings(const std::string& path);
void save_embeddings(const std::string& path, const EmbeddingFile& emb);

// Learned time alignment 99 -> 200 shared across feature dimensions, plus
// an optional feature projection.
struct AlignmentParams {
  Tensor time_map;    // (200, 99), rows sum to 1 at init
  Tensor projection;  // (D', D) or undefined

  static AlignmentParams init(bool with_projection, int dim);
  int output_dim(int input_dim) const {
    return projection.defined() ? static_cast<int>(projection.dim(0))
                                : input_dim;
  }
};

// out = A * in (then optionally * P^T); in must have exactly 99 rows
// (zero-pad short tails upstream). Differentiable in both parameters.
Tensor align(const Tensor& window_embeddings, const AlignmentParams& params);

// Slice a per-window 99 x D block starting at embedding frame `start`,
// zero-padding past the end; mask_out marks rows backed by real frames.
Tensor embedding_window(const EmbeddingFile& emb, int64_t start,
                        std::vector<uint8_t>* mask_out = nullptr);

}  // namespace segmenter

#endif  // SEGMENTER_ADAPTER_HPP_
