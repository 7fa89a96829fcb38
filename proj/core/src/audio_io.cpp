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

#include "segmenter/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace segmenter {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

AudioClip load_audio(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_audio: cannot open " + path);

  char tag[4];
  in.read(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0)
    throw std::runtime_error("load_audio: not a RIFF file: " + path);
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0)
    throw std::runtime_error("load_audio: not a WAVE file: " + path);

  uint16_t format = 0, num_channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  std::vector<char> payload;
  bool have_fmt = false, have_data = false;
  while (in && !(have_fmt && have_data)) {
    in.read(tag, 4);
    if (!in) break;
    uint32_t chunk_size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16(in);
      num_channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      payload.resize(chunk_size);
      in.read(payload.data(), chunk_size);
      have_data = true;
    } else {
      in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  if (!have_fmt || !have_data)
    throw std::runtime_error("load_audio: missing fmt/data chunk: " + path);
  if (sample_rate != kSampleRate)
    throw std::runtime_error("load_audio: unsupported sample rate " +
                             std::to_string(sample_rate) + " (want 16000): " +
                             path);
  if (num_channels < 1)
    throw std::runtime_error("load_audio: no channels: " + path);

  const bool pcm16 = (format == 1 && bits == 16);
  const bool f32 = (format == 3 && bits == 32);
  if (!pcm16 && !f32)
    throw std::runtime_error(
        "load_audio: unsupported codec (format tag " + std::to_string(format) +
        ", " + std::to_string(bits) + " bits; want PCM16 or float32): " + path);

  const size_t bytes_per_sample = pcm16 ? 2 : 4;
  const size_t frame_bytes = bytes_per_sample * num_channels;
  const int64_t n = static_cast<int64_t>(payload.size() / frame_bytes);
  if (n < 1) throw std::runtime_error("load_audio: empty data chunk: " + path);

  AudioClip clip;
  clip.recording_id = std::filesystem::path(path).stem().string();
  clip.channels.assign(num_channels, std::vector<double>(static_cast<size_t>(n)));
  for (int64_t i = 0; i < n; ++i) {
    for (int c = 0; c < num_channels; ++c) {
      const char* p = payload.data() + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        int16_t s;
        std::memcpy(&s, p, 2);
        v = static_cast<double>(s) / 32767.0;
      } else {
        float s;
        std::memcpy(&s, p, 4);
        v = static_cast<double>(s);
      }
      if (!std::isfinite(v))
        throw std::runtime_error("load_audio: non-finite sample: " + path);
      clip.channels[static_cast<size_t>(c)][static_cast<size_t>(i)] = v;
    }
  }
  return clip;
}

void save_audio(const std::string& path, const AudioClip& clip) {
  if (clip.sample_rate != kSampleRate)
    throw std::runtime_error("save_audio: sample_rate must be 16000");
  const int M = clip.num_channels();
  const int64_t n = clip.num_samples();
  if (M < 1 || n < 1) throw std::runtime_error("save_audio: empty clip");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_audio: cannot open " + path);
  const uint32_t data_bytes = static_cast<uint32_t>(n * M * 2);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, static_cast<uint16_t>(M));
  write_u32(out, kSampleRate);
  write_u32(out, static_cast<uint32_t>(kSampleRate * M * 2));
  write_u16(out, static_cast<uint16_t>(M * 2));
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (int64_t i = 0; i < n; ++i)
    for (int c = 0; c < M; ++c) {
      double v = std::clamp(clip.channels[static_cast<size_t>(c)]
                                          [static_cast<size_t>(i)],
                            -1.0, 1.0);
      auto s = static_cast<int16_t>(std::lrint(v * 32767.0));
      char b[2] = {static_cast<char>(s & 0xff),
                   static_cast<char>((s >> 8) & 0xff)};
      out.write(b, 2);
    }
}

}  // namespace segmenter
