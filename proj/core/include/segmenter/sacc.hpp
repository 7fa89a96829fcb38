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

#ifndef SEGMENTER_SACC_HPP_
#define SEGMENTER_SACC_HPP_

#include <random>
#include <string>
#include <vector>

#include "segmenter/frontend.hpp"
#include "segmenter/tensor.hpp"

namespace segmenter {

struct SaccConfig {
  int attention_dim = 256;  // single head
  int input_dim = 257;      // STFT bins
  double epsilon = 1e-6;    // log compression offset
};

// Learnable key/query projections, trained jointly with the downstream
// network.
struct SaccParams {
  Tensor key;    // (d, input_dim)
  Tensor query;  // (d, input_dim)

  static SaccParams init(const SaccConfig& cfg, std::mt19937_64& rng);
};

// T x M per-frame channel weights; each row is on the simplex.
struct ChannelWeights {
  std::string recording_id;
  int64_t num_frames = 0;
  int num_channels = 0;
  std::vector<double> values;  // (T, M) row-major

  double at(int64_t t, int m) const { return values[t * num_channels + m]; }
};

// Per frame t: tokens are log-compressed channel magnitudes, the query is
// the channel mean; scaled dot-product scores softmax into weights and the
// channels collapse to one weighted magnitude spectrum.
//
//   e_m = K ln(mag_m + eps),  q = Q mean_m ln(mag_m + eps)
//   w   = softmax_m(<q, e_m> / sqrt(d)),  combined = sum_m w_m mag_m
//
// The returned tensor is (T, F) and differentiable in key/query.
Tensor sacc_combine(const Spectrogram& spec, const SaccParams& params,
                    const SaccConfig& cfg, ChannelWeights* weights_out);

// Non-graph convenience for frozen-parameter analysis.
ChannelWeights sacc_weights(const Spectrogram& spec, const SaccParams& params,
                            const SaccConfig& cfg);

// Fig.-style export: optionally divide by the matrix's global maximum.
enum class WeightNormalization { kNone, kMax };
std::vector<double> export_weights(const ChannelWeights& weights,
                                   WeightNormalization normalization);

}  // namespace segmenter

#endif  // SEGMENTER_SACC_HPP_
