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

#ifndef KEYRET_KEYPOINTS_H_
#define KEYRET_KEYPOINTS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include "keyret/geometry.h"

namespace keyret {

// The five task-space frames that describe whole-body motion. The numeric
// order is the serialization order everywhere (action rows, stats, files).
enum class Keypoint : int {
  kPelvis = 0,
  kLeftTcp = 1,
  kRightTcp = 2,
  kLeftFoot = 3,
  kRightFoot = 4,
};

inline constexpr std::size_t kNumKeypoints = 5;

inline constexpr std::array<Keypoint, kNumKeypoints> kAllKeypoints = {
    Keypoint::kPelvis, Keypoint::kLeftTcp, Keypoint::kRightTcp,
    Keypoint::kLeftFoot, Keypoint::kRightFoot};

std::string_view KeypointName(Keypoint k);
std::optional<Keypoint> KeypointFromName(std::string_view name);

inline constexpr std::size_t Index(Keypoint k) {
  return static_cast<std::size_t>(k);
}

using KeypointPoses = std::array<Pose, kNumKeypoints>;

// One demonstration / action sample: five keypoint poses in a common world
// frame, the two gripper widths (left, right) in meters, and a timestamp.
struct KeypointFrame {
  KeypointPoses poses;
  std::array<double, 2> gripper = {0.0, 0.0};
  double timestamp = 0.0;

  const Pose& operator[](Keypoint k) const { return poses[Index(k)]; }
  Pose& operator[](Keypoint k) { return poses[Index(k)]; }
};

}  // namespace keyret

#endif  // KEYRET_KEYPOINTS_H_
