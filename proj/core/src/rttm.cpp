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

#include "segmenter/rttm.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace segmenter {

std::vector<SpeakerSegment> parse_rttm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_rttm: cannot open " + path);

  std::vector<SpeakerSegment> segments;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    std::istringstream is(line);
    std::vector<std::string> fields;
    std::string f;
    while (is >> f) fields.push_back(f);
    if (fields.empty()) continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error("parse_rttm: " + path + ":" +
                               std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 9) fail("expected >= 9 fields");
    if (fields[0] != "SPEAKER") fail("type field is not SPEAKER");
    SpeakerSegment seg;
    seg.recording_id = fields[1];
    try {
      seg.onset = std::stod(fields[3]);
      seg.duration = std::stod(fields[4]);
    } catch (const std::exception&) {
      fail("non-numeric onset/duration");
    }
    if (seg.onset < 0.0) fail("negative onset");
    if (seg.duration <= 0.0) fail("non-positive duration");
    seg.speaker_id = fields[7];
    segments.push_back(std::move(seg));
  }
  return segments;
}

void write_rttm(const std::string& path,
                const std::vector<SpeakerSegment>& segments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_rttm: cannot open " + path);
  out << std::fixed << std::setprecision(3);
  for (const auto& s : segments)
    out << "SPEAKER " << s.recording_id << " 1 " << s.onset << " " << s.duration
        << " <NA> <NA> " << s.speaker_id << " <NA> <NA>\n";
}

}  // namespace segmenter
