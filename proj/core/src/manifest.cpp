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

#include "segmenter/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace segmenter {

std::vector<ManifestEntry> DatasetManifest::partition(
    const std::string& name) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.partition == name) out.push_back(e);
  return out;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);

  DatasetManifest m;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  const auto base = std::filesystem::path(path).parent_path();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("load_manifest: " + path + ":" +
                               std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry e;
    e.recording_id = j.at("recording_id").get<std::string>();
    e.audio_path = j.at("audio").get<std::string>();
    e.rttm_path = j.at("rttm").get<std::string>();
    e.partition = j.at("partition").get<std::string>();
    e.domain = j.value("domain", std::string("default"));
    e.embedding_path = j.value("embedding", std::string());
    if (e.partition != "train" && e.partition != "dev" && e.partition != "eval")
      throw std::runtime_error("load_manifest: " + path + ":" +
                               std::to_string(line_no) +
                               ": bad partition '" + e.partition + "'");
    if (!ids.insert(e.recording_id).second)
      throw std::runtime_error("load_manifest: duplicate recording_id " +
                               e.recording_id);
    // Relative paths resolve against the manifest location.
    for (std::string* p : {&e.audio_path, &e.rttm_path, &e.embedding_path}) {
      if (p->empty()) continue;
      std::filesystem::path fp(*p);
      if (fp.is_relative()) *p = (base / fp).string();
      if (!std::filesystem::exists(*p))
        throw std::runtime_error("load_manifest: missing file " + *p);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_manifest: cannot open " + path);
  for (const auto& e : manifest.entries) {
    nlohmann::json j{{"recording_id", e.recording_id},
                     {"audio", e.audio_path},
                     {"rttm", e.rttm_path},
                     {"partition", e.partition},
                     {"domain", e.domain}};
    if (!e.embedding_path.empty()) j["embedding"] = e.embedding_path;
    out << j.dump() << "\n";
  }
}

}  // namespace segmenter
