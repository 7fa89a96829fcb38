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

#ifndef SEGMENTER_ADAM_HPP_
#define SEGMENTER_ADAM_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "segmenter/tensor.hpp"

namespace segmenter {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named, ordered parameter list. Ordering is part of the determinism
// contract: iteration order is insertion order.
struct ParamList {
  std::vector<std::pair<std::string, Tensor>> items;

  Tensor& add(const std::string& name, Tensor t);
  void append(const ParamList& other);
  int64_t total_size() const;
  void zero_grads();
};

struct AdamState {
  struct Moments {
    std::vector<double> m, v;
  };
  std::unordered_map<std::string, Moments> moments;
  int64_t step = 0;
};

// One bias-corrected Adam update over every parameter's accumulated
// gradient. Throws on non-finite gradients, naming the parameter.
void adam_step(ParamList& params, AdamState& state, const OptimizerConfig& cfg);

}  // namespace segmenter

#endif  // SEGMENTER_ADAM_HPP_
