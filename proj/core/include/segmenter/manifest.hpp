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

#ifndef SEGMENTER_MANIFEST_HPP_
#define SEGMENTER_MANIFEST_HPP_

#include <string>
#include <vector>

namespace segmenter {

struct ManifestEntry {
  std::string recording_id;
  std::string audio_path;
  std::string rttm_path;
  std::string partition;  // train / dev / eval
  std::string domain;
  std::string embedding_path;  // optional, for the embedding feature path
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> partition(const std::string& name) const;
};

// JSON lines, one entry per line:
// {"recording_id":..,"audio":..,"rttm":..,"partition":..,"domain":..}
// Recording ids must be unique and referenced paths must exist.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const DatasetManifest& manifest);

}  // namespace segmenter

#endif  // SEGMENTER_MANIFEST_HPP_
