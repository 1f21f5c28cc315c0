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

// Keypoint-relative action chunks.
//
// A chunk anchored at frame t holds, for each keypoint k and each step
// tau = t+1 .. t+H, the pose of k at tau expressed in k's own frame at t:
//
//   rel[k, tau] = inverse(abs[k, t]) * abs[k, tau]
//
// Gripper widths stay absolute. Encoded rows are 47 wide:
//
//   for k in (pelvis, left_tcp, right_tcp, left_foot, right_foot):
//     [tx, ty, tz, r00, r10, r20, r01, r11, r21]      (9 per keypoint)
//   [left_width, right_width]                         (columns 45, 46)
//
// Translations and widths are min-max normalized to [-1, 1] per dimension;
// the 6D rotation blocks are never rescaled.

#ifndef KEYRET_ACTION_CODEC_H_
#define KEYRET_ACTION_CODEC_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "keyret/geometry.h"
#include "keyret/keypoints.h"

namespace keyret {

inline constexpr int kActionWidth = 47;
inline constexpr int kScalarDims = 17;
inline constexpr int kDefaultHorizon = 48;
inline constexpr std::string_view kActionLayoutVersion = "kp47-v1";

using Trajectory = std::vector<KeypointFrame>;

// One future step of a relative chunk.
struct RelativeStep {
  KeypointPoses poses;
  std::array<double, 2> gripper = {0.0, 0.0};
};

using RelativeChunk = std::vector<RelativeStep>;

using ActionRows = Eigen::Matrix<double, Eigen::Dynamic, kActionWidth,
                                 Eigen::RowMajor>;

struct ActionChunk {
  ActionRows values;
  bool normalized = true;

  int horizon() const { return static_cast<int>(values.rows()); }
};

// Per-dimension bounds for the 15 translation and 2 gripper scalars.
struct NormalizationStats {
  std::array<double, kScalarDims> min{};
  std::array<double, kScalarDims> max{};
};

// Column of scalar dimension d (0..16) in a 47-wide row.
int ScalarColumn(int d);
// Human-readable column names, e.g. "left_tcp.tx", "right_tcp.r01",
// "gripper.left".
const std::array<std::string, kActionWidth>& ActionColumnNames();

// Relative poses of frames t+1 .. t+H with respect to frame t. Throws when
// the trajectory does not reach t+H.
RelativeChunk RelativeChunkAt(std::span<const KeypointFrame> trajectory,
                              std::size_t t, int horizon = kDefaultHorizon);

// Inverse of RelativeChunkAt given the anchor frame. Step j gets timestamp
// anchor.timestamp + (j + 1) * dt.
Trajectory AbsoluteFromChunk(const RelativeChunk& chunk,
                             const KeypointFrame& anchor, double dt = 0.0);

// Normalizes a relative chunk. Values outside [min, max] are clamped and
// counted in *clamped when non-null. Degenerate dims (min == max) encode to 0.
ActionChunk Encode(const RelativeChunk& chunk, const NormalizationStats& stats,
                   std::size_t* clamped = nullptr);

// Inverse normalization plus Gram-Schmidt on every rotation block. Throws if
// a rotation block is degenerate, naming the step and keypoint.
RelativeChunk Decode(const ActionChunk& chunk, const NormalizationStats& stats);

// Min / max over every relative chunk of every trajectory. Throws on an empty
// dataset or a trajectory too short for a single chunk.
NormalizationStats ComputeStats(std::span<const Trajectory> dataset,
                                int horizon = kDefaultHorizon);

std::string SerializeStats(const NormalizationStats& stats, int horizon);
// Returns the stats; *horizon receives the recorded horizon when non-null.
NormalizationStats ParseStats(std::string_view json_text,
                              int* horizon = nullptr);

}  // namespace keyret

#endif  // KEYRET_ACTION_CODEC_H_
