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

#include "segmenter/sacc.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace segmenter {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMapMat = Eigen::Map<const RowMat>;
using MapMat = Eigen::Map<RowMat>;

SaccParams SaccParams::init(const SaccConfig& cfg, std::mt19937_64& rng) {
  SaccParams p;
  p.key = Tensor::zeros({cfg.attention_dim, cfg.input_dim}, true);
  p.query = Tensor::zeros({cfg.attention_dim, cfg.input_dim}, true);
  kaiming_init(p.key, cfg.input_dim, rng);
  kaiming_init(p.query, cfg.input_dim, rng);
  return p;
}

namespace {

struct SaccCache {
  int64_t T;
  int M, F, d;
  std::vector<double> mag;    // (T, M, F)
  std::vector<double> logm;   // (T, M, F)
  std::vector<double> lbar;   // (T, F)
  std::vector<double> e;      // (T, M, d)
  std::vector<double> q;      // (T, d)
  std::vector<double> w;      // (T, M)
};

std::shared_ptr<SaccCache> run_forward(const Spectrogram& spec,
                                       const SaccParams& params,
                                       const SaccConfig& cfg) {
  const int M = spec.num_channels;
  const int64_t T = spec.num_frames;
  const int F = spec.num_bins;
  if (M < 1 || T < 1) throw std::invalid_argument("sacc: empty spectrogram");
  if (F != cfg.input_dim)
    throw std::invalid_argument("sacc: bin count does not match input_dim");
  const int d = cfg.attention_dim;

  auto c = std::make_shared<SaccCache>();
  c->T = T;
  c->M = M;
  c->F = F;
  c->d = d;
  c->mag.resize(static_cast<size_t>(T) * M * F);
  c->logm.resize(c->mag.size());
  c->lbar.assign(static_cast<size_t>(T) * F, 0.0);
  for (int64_t t = 0; t < T; ++t)
    for (int m = 0; m < M; ++m)
      for (int f = 0; f < F; ++f) {
        const double v = spec.at(m, t, f);
        if (!(std::isfinite(v) && v >= 0.0))
          throw std::invalid_argument("sacc: non-finite or negative magnitude");
        const size_t idx = (static_cast<size_t>(t) * M + m) * F + f;
        c->mag[idx] = v;
        c->logm[idx] = std::log(v + cfg.epsilon);
        c->lbar[static_cast<size_t>(t) * F + f] += c->logm[idx] / M;
      }

  // Keys for all (t, m) tokens and queries for all frames, two GEMMs.
  c->e.resize(static_cast<size_t>(T) * M * d);
  c->q.resize(static_cast<size_t>(T) * d);
  CMapMat K(params.key.data().data(), d, F);
  CMapMat Q(params.query.data().data(), d, F);
  MapMat(c->e.data(), T * M, d).noalias() =
      CMapMat(c->logm.data(), T * M, F) * K.transpose();
  MapMat(c->q.data(), T, d).noalias() =
      CMapMat(c->lbar.data(), T, F) * Q.transpose();

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  c->w.resize(static_cast<size_t>(T) * M);
  std::vector<double> scores(static_cast<size_t>(M));
  for (int64_t t = 0; t < T; ++t) {
    const double* qt = c->q.data() + t * d;
    double mx = -1e300;
    for (int m = 0; m < M; ++m) {
      const double* et = c->e.data() + (t * M + m) * d;
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += qt[k] * et[k];
      scores[static_cast<size_t>(m)] = s * inv_sqrt_d;
      mx = std::max(mx, scores[static_cast<size_t>(m)]);
    }
    double z = 0.0;
    for (int m = 0; m < M; ++m) {
      const double e = std::exp(scores[static_cast<size_t>(m)] - mx);
      c->w[static_cast<size_t>(t * M + m)] = e;
      z += e;
    }
    for (int m = 0; m < M; ++m) c->w[static_cast<size_t>(t * M + m)] /= z;
  }
  return c;
}

}  // namespace

Tensor sacc_combine(const Spectrogram& spec, const SaccParams& params,
                    const SaccConfig& cfg, ChannelWeights* weights_out) {
  auto cache = run_forward(spec, params, cfg);
  const int64_t T = cache->T;
  const int M = cache->M, F = cache->F, d = cache->d;

  Tensor out = make_custom_node({T, F}, {params.key, params.query});
  auto& ov = out.data();
  for (int64_t t = 0; t < T; ++t)
    for (int m = 0; m < M; ++m) {
      const double w = cache->w[static_cast<size_t>(t * M + m)];
      const double* mag = cache->mag.data() + (t * M + m) * F;
      double* orow = ov.data() + t * F;
      for (int f = 0; f < F; ++f) orow[f] += w * mag[f];
    }

  if (weights_out) {
    weights_out->recording_id = spec.recording_id;
    weights_out->num_frames = T;
    weights_out->num_channels = M;
    weights_out->values = cache->w;
  }

  if (out.needs_grad()) {
    auto key_impl = params.key.impl();
    auto query_impl = params.query.impl();
    // Raw pointer: the closure lives inside the node it belongs to.
    TensorImpl* out_impl = out.impl().get();
    out_impl->backprop = [cache, key_impl, query_impl, out_impl, T, M, F, d]() {
      const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
      // dL/de tokens and dL/dq frames accumulate here, then two GEMMs give
      // the projection gradients.
      std::vector<double> ge(static_cast<size_t>(T) * M * d, 0.0);
      std::vector<double> gq(static_cast<size_t>(T) * d, 0.0);
      std::vector<double> gw(static_cast<size_t>(M));
      for (int64_t t = 0; t < T; ++t) {
        const double* g = out_impl->grad.data() + t * F;
        double dot = 0.0;
        for (int m = 0; m < M; ++m) {
          const double* mag = cache->mag.data() + (t * M + m) * F;
          double s = 0.0;
          for (int f = 0; f < F; ++f) s += g[f] * mag[f];
          gw[static_cast<size_t>(m)] = s;
          dot += cache->w[static_cast<size_t>(t * M + m)] * s;
        }
        for (int m = 0; m < M; ++m) {
          const double gs = cache->w[static_cast<size_t>(t * M + m)] *
                            (gw[static_cast<size_t>(m)] - dot) * inv_sqrt_d;
          const double* et = cache->e.data() + (t * M + m) * d;
          const double* qt = cache->q.data() + t * d;
          double* get = ge.data() + (t * M + m) * d;
          double* gqt = gq.data() + t * d;
          for (int k = 0; k < d; ++k) {
            get[k] += gs * qt[k];
            gqt[k] += gs * et[k];
          }
        }
      }
      if (key_impl->needs_grad) {
        MapMat GK(grad_buffer(key_impl).data(), d, F);
        GK.noalias() += CMapMat(ge.data(), T * M, d).transpose() *
                        CMapMat(cache->logm.data(), T * M, F);
      }
      if (query_impl->needs_grad) {
        MapMat GQ(grad_buffer(query_impl).data(), d, F);
        GQ.noalias() += CMapMat(gq.data(), T, d).transpose() *
                        CMapMat(cache->lbar.data(), T, F);
      }
    };
  }
  return out;
}

ChannelWeights sacc_weights(const Spectrogram& spec, const SaccParams& params,
                            const SaccConfig& cfg) {
  auto cache = run_forward(spec, params, cfg);
  ChannelWeights w;
  w.recording_id = spec.recording_id;
  w.num_frames = cache->T;
  w.num_channels = cache->M;
  w.values = cache->w;
  return w;
}

std::vector<double> export_weights(const ChannelWeights& weights,
                                   WeightNormalization normalization) {
  std::vector<double> out = weights.values;
  if (normalization == WeightNormalization::kMax) {
    const int64_t m = weights.num_channels;
    for (int64_t t = 0; t < weights.num_frames; ++t) {
      double mx = 0.0;
      for (int64_t c = 0; c < m; ++c)
        mx = std::max(mx, out[static_cast<size_t>(t * m + c)]);
      if (mx <= 0.0)
        throw std::logic_error("export_weights: all-zero weight row");
      for (int64_t c = 0; c < m; ++c)
        out[static_cast<size_t>(t * m + c)] /= mx;
    }
  }
  return out;
}

}  // namespace segmenter
