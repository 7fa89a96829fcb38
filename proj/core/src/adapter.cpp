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

#include "segmenter/adapter.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace segmenter {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'G', 'E', 'M', 'B', '0', '1'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.write(b, sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  char b[sizeof(T)];
  in.read(b, sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

EmbeddingFile load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_embeddings: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_embeddings: bad magic: " + path);
  const auto version = read_le<uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("load_embeddings: unsupported version " +
                             std::to_string(version) + ": " + path);
  EmbeddingFile emb;
  emb.dim = static_cast<int>(read_le<uint32_t>(in));
  emb.num_frames = static_cast<int64_t>(read_le<uint64_t>(in));
  emb.frame_period_ms = static_cast<double>(read_le<float>(in));
  const auto id_len = read_le<uint32_t>(in);
  emb.recording_id.resize(id_len);
  in.read(emb.recording_id.data(), id_len);
  if (!in || emb.dim < 1 || emb.num_frames < 0)
    throw std::runtime_error("load_embeddings: corrupt header: " + path);

  const int64_t count = emb.num_frames * emb.dim;
  emb.values.resize(static_cast<size_t>(count));
  in.read(reinterpret_cast<char*>(emb.values.data()),
          count * static_cast<int64_t>(sizeof(float)));
  if (in.gcount() != count * static_cast<int64_t>(sizeof(float)))
    throw std::runtime_error("load_embeddings: truncated payload: " + path);
  for (float v : emb.values)
    if (!std::isfinite(v))
      throw std::runtime_error("load_embeddings: non-finite value: " + path);
  return emb;
}

void save_embeddings(const std::string& path, const EmbeddingFile& emb) {
  if (emb.dim < 1 ||
      static_cast<int64_t>(emb.values.size()) != emb.num_frames * emb.dim)
    throw std::invalid_argument("save_embeddings: shape/payload mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_embeddings: cannot open " + path);
  out.write(kMagic, 8);
  write_le<uint32_t>(out, kVersion);
  write_le<uint32_t>(out, static_cast<uint32_t>(emb.dim));
  write_le<uint64_t>(out, static_cast<uint64_t>(emb.num_frames));
  write_le<float>(out, static_cast<float>(emb.frame_period_ms));
  write_le<uint32_t>(out, static_cast<uint32_t>(emb.recording_id.size()));
  out.write(emb.recording_id.data(),
            static_cast<std::streamsize>(emb.recording_id.size()));
  out.write(reinterpret_cast<const char*>(emb.values.data()),
            static_cast<std::streamsize>(emb.values.size() * sizeof(float)));
}

AlignmentParams AlignmentParams::init(bool with_projection, int dim) {
  AlignmentParams p;
  p.time_map = Tensor::zeros({kAlignedFramesPerWindow, kEmbeddingFramesPerWindow},
                             true);
  // Linear-interpolation operator: output i reads source position
  // i * (99-1) / (200-1).
  auto& a = p.time_map.data();
  for (int i = 0; i < kAlignedFramesPerWindow; ++i) {
    const double pos = static_cast<double>(i) *
                       (kEmbeddingFramesPerWindow - 1) /
                       (kAlignedFramesPerWindow - 1);
    const int j0 = static_cast<int>(std::floor(pos));
    const double frac = pos - j0;
    a[static_cast<size_t>(i) * kEmbeddingFramesPerWindow + j0] += 1.0 - frac;
    if (j0 + 1 < kEmbeddingFramesPerWindow)
      a[static_cast<size_t>(i) * kEmbeddingFramesPerWindow + j0 + 1] += frac;
  }
  if (with_projection) {
    p.projection = Tensor::zeros({dim, dim}, true);
    for (int i = 0; i < dim; ++i)
      p.projection.data()[static_cast<size_t>(i) * dim + i] = 1.0;
  }
  return p;
}

Tensor align(const Tensor& window_embeddings, const AlignmentParams& params) {
  if (window_embeddings.shape().size() != 2)
    throw std::invalid_argument("align: input must be 2-d (99 x D)");
  if (window_embeddings.dim(0) > kEmbeddingFramesPerWindow)
    throw std::invalid_argument("align: more than 99 rows per window");
  if (window_embeddings.dim(0) != kEmbeddingFramesPerWindow)
    throw std::invalid_argument(
        "align: window must be zero-padded to exactly 99 rows");
  Tensor out = ops::matmul(params.time_map, window_embeddings);  // (200, D)
  if (params.projection.defined())
    out = ops::matmul(out, ops::transpose(params.projection));
  return out;
}

Tensor embedding_window(const EmbeddingFile& emb, int64_t start,
                        std::vector<uint8_t>* mask_out) {
  if (start < 0) throw std::invalid_argument("embedding_window: negative start");
  std::vector<double> data(
      static_cast<size_t>(kEmbeddingFramesPerWindow) * emb.dim, 0.0);
  if (mask_out) mask_out->assign(kEmbeddingFramesPerWindow, 0);
  for (int r = 0; r < kEmbeddingFramesPerWindow; ++r) {
    const int64_t src = start + r;
    if (src >= emb.num_frames) break;
    for (int d = 0; d < emb.dim; ++d)
      data[static_cast<size_t>(r) * emb.dim + d] =
          static_cast<double>(emb.at(src, d));
    if (mask_out) (*mask_out)[static_cast<size_t>(r)] = 1;
  }
  return Tensor::from_data({kEmbeddingFramesPerWindow, emb.dim},
                           std::move(data));
}

}  // namespace segmenter
