// Copyright 2026 The keyret Authors
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

#include "keyret/keypoints.h"

namespace keyret {

namespace {

constexpr std::array<std::string_view, kNumKeypoints> kNames = {
    "pelvis", "left_tcp", "right_tcp", "left_foot", "right_foot"};

}  // namespace

std::string_view KeypointName(Keypoint k) { return kNames[Index(k)]; }

std::optional<Keypoint> KeypointFromName(std::string_view name) {
  for (Keypoint k : kAllKeypoints) {
    if (kNames[Index(k)] == name) return k;
  }
  return std::nullopt;
}

}  // namespace keyret
