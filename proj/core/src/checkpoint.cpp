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

#include "segmenter/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace segmenter {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'G', 'C', 'K', 'P', 'T', '1'};
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

void write_string(std::ostream& out, const std::string& s) {
  write_le<uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const auto n = read_le<uint64_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(kMagic, 8);
  write_le<uint32_t>(out, kVersion);
  write_string(out, ckpt.config_json);
  write_le<uint64_t>(out, ckpt.params.items.size());
  for (const auto& [name, t] : ckpt.params.items) {
    write_string(out, name);
    write_le<uint32_t>(out, static_cast<uint32_t>(t.shape().size()));
    for (int64_t d : t.shape()) write_le<uint64_t>(out, static_cast<uint64_t>(d));
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.data().size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic: " + path);
  const auto version = read_le<uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " +
                             std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_json = read_string(in);
  const auto count = read_le<uint64_t>(in);
  for (uint64_t i = 0; i < count; ++i) {
    const std::string name = read_string(in);
    const auto ndim = read_le<uint32_t>(in);
    std::vector<int64_t> shape(ndim);
    int64_t size = 1;
    for (auto& d : shape) {
      d = static_cast<int64_t>(read_le<uint64_t>(in));
      size *= d;
    }
    std::vector<double> data(static_cast<size_t>(size));
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in)
      throw std::runtime_error("load_checkpoint: truncated payload at " + name);
    ckpt.params.add(name, Tensor::from_data(shape, std::move(data), true));
  }
  return ckpt;
}

}  // namespace segmenter
