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

#ifndef SEGMENTER_CHECKPOINT_HPP_
#define SEGMENTER_CHECKPOINT_HPP_

#include <string>

#include "segmenter/adam.hpp"

namespace segmenter {

// Versioned binary container: named parameters (shape + float64 payload)
// plus a JSON configuration blob. Round trip is exact.
struct Checkpoint {
  std::string config_json;
  ParamList params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace segmenter

#endif  // SEGMENTER_CHECKPOINT_HPP_
