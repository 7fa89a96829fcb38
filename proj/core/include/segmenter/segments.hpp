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

#ifndef SEGMENTER_SEGMENTS_HPP_
#define SEGMENTER_SEGMENTS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "segmenter/rttm.hpp"

namespace segmenter {

// Converts a 100 Hz binary decision track into segments. Frame t spans
// [t/100, (t+1)/100). Gaps shorter than or equal to gap_close_s are
// bridged first; segments shorter than min_duration_s are then dropped.
std::vector<SpeakerSegment> frames_to_segments(
    const std::vector<uint8_t>& decisions, const std::string& recording_id,
    const std::string& label, double gap_close_s = 0.0,
    double min_duration_s = 0.0);

}  // namespace segmenter

#endif  // SEGMENTER_SEGMENTS_HPP_
