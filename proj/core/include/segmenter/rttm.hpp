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

#ifndef SEGMENTER_RTTM_HPP_
#define SEGMENTER_RTTM_HPP_

#include <string>
#include <vector>

namespace segmenter {

struct SpeakerSegment {
  std::string recording_id;
  std::string speaker_id;
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds, > 0
};

// RTTM "SPEAKER" lines: SPEAKER <rec> <chan> <onset> <dur> <NA> <NA> <spk> ...
// Malformed lines raise with the 1-based line number.
std::vector<SpeakerSegment> parse_rttm(const std::string& path);

void write_rttm(const std::string& path,
                const std::vector<SpeakerSegment>& segments);

}  // namespace segmenter

#endif  // SEGMENTER_RTTM_HPP_
