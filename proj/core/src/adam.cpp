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

#include "segmenter/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace segmenter {

Tensor& ParamList::add(const std::string& name, Tensor t) {
  for (const auto& [n, unused] : items)
    if (n == name) throw std::invalid_argument("duplicate parameter: " + name);
  items.emplace_back(name, std::move(t));
  return items.back().second;
}

void ParamList::append(const ParamList& other) {
  for (const auto& [n, t] : other.items) add(n, t);
}

int64_t ParamList::total_size() const {
  int64_t n = 0;
  for (const auto& [name, t] : items) n += t.size();
  return n;
}

void ParamList::zero_grads() {
  for (auto& [name, t] : items) t.zero_grad();
}

void adam_step(ParamList& params, AdamState& state,
               const OptimizerConfig& cfg) {
  if (cfg.learning_rate <= 0.0)
    throw std::invalid_argument("adam_step: learning_rate must be > 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 ||
      cfg.beta2 >= 1.0)
    throw std::invalid_argument("adam_step: betas must be in [0, 1)");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  for (auto& [name, t] : params.items) {
    if (t.grad().empty()) t.zero_grad();
    auto& mom = state.moments[name];
    if (mom.m.empty()) {
      mom.m.assign(t.data().size(), 0.0);
      mom.v.assign(t.data().size(), 0.0);
    }
    auto& x = t.data();
    const auto& g = t.grad();
    for (size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(g[i]))
        throw std::runtime_error("adam_step: non-finite gradient in " + name);
      mom.m[i] = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * g[i];
      mom.v[i] = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = mom.m[i] / bc1;
      const double vhat = mom.v[i] / bc2;
      x[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace segmenter
