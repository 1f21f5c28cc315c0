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

#include "keyret/action_codec.h"

#include <algorithm>
#include <limits>

#include "json_util.h"
#include "keyret/error.h"

namespace keyret {

namespace {

using internal::json;

constexpr int kPerKeypoint = 9;
constexpr int kGripperColumn = 45;

double ScalarOf(const RelativeStep& step, int d) {
  if (d < 15) return step.poses[static_cast<std::size_t>(d / 3)].translation[d % 3];
  return step.gripper[static_cast<std::size_t>(d - 15)];
}

void SetScalar(RelativeStep& step, int d, double v) {
  if (d < 15) {
    step.poses[static_cast<std::size_t>(d / 3)].translation[d % 3] = v;
  } else {
    step.gripper[static_cast<std::size_t>(d - 15)] = v;
  }
}

std::array<std::string, kActionWidth> MakeColumnNames() {
  std::array<std::string, kActionWidth> names;
  constexpr std::array<const char*, kPerKeypoint> kSuffix = {
      "tx", "ty", "tz", "r00", "r10", "r20", "r01", "r11", "r21"};
  for (Keypoint k : kAllKeypoints) {
    for (int i = 0; i < kPerKeypoint; ++i) {
      names[Index(k) * kPerKeypoint + static_cast<std::size_t>(i)] =
          std::string(KeypointName(k)) + "." + kSuffix[static_cast<std::size_t>(i)];
    }
  }
  names[kGripperColumn] = "gripper.left";
  names[kGripperColumn + 1] = "gripper.right";
  return names;
}

}  // namespace

int ScalarColumn(int d) {
  if (d < 0 || d >= kScalarDims) throw Error("scalar dim out of range");
  if (d < 15) return kPerKeypoint * (d / 3) + d % 3;
  return kGripperColumn + (d - 15);
}

const std::array<std::string, kActionWidth>& ActionColumnNames() {
  static const auto names = MakeColumnNames();
  return names;
}

RelativeChunk RelativeChunkAt(std::span<const KeypointFrame> trajectory,
                              std::size_t t, int horizon) {
  if (horizon < 1) throw Error("horizon must be positive");
  const std::size_t last = t + static_cast<std::size_t>(horizon);
  if (last >= trajectory.size()) {
    throw Error("relative chunk at t=" + std::to_string(t) + " with H=" +
                std::to_string(horizon) + " needs " + std::to_string(last + 1) +
                " frames, trajectory has " + std::to_string(trajectory.size()));
  }
  const KeypointFrame& anchor = trajectory[t];
  KeypointPoses inv;
  for (std::size_t k = 0; k < kNumKeypoints; ++k) inv[k] = Inverse(anchor.poses[k]);

  RelativeChunk chunk(static_cast<std::size_t>(horizon));
  for (std::size_t j = 0; j < chunk.size(); ++j) {
    const KeypointFrame& future = trajectory[t + 1 + j];
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      chunk[j].poses[k] = inv[k] * future.poses[k];
    }
    chunk[j].gripper = future.gripper;
  }
  return chunk;
}

Trajectory AbsoluteFromChunk(const RelativeChunk& chunk,
                             const KeypointFrame& anchor, double dt) {
  Trajectory out(chunk.size());
  for (std::size_t j = 0; j < chunk.size(); ++j) {
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      out[j].poses[k] = anchor.poses[k] * chunk[j].poses[k];
    }
    out[j].gripper = chunk[j].gripper;
    out[j].timestamp = anchor.timestamp + static_cast<double>(j + 1) * dt;
  }
  return out;
}

ActionChunk Encode(const RelativeChunk& chunk, const NormalizationStats& stats,
                   std::size_t* clamped) {
  ActionChunk out;
  out.values.resize(static_cast<Eigen::Index>(chunk.size()), kActionWidth);
  out.normalized = true;
  std::size_t clamp_count = 0;
  for (std::size_t j = 0; j < chunk.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      out.values.row(row).segment<6>(static_cast<Eigen::Index>(k) * kPerKeypoint + 3) =
          Rot6dEncode(QuatToMatrix(chunk[j].poses[k].rotation)).transpose();
    }
    for (int d = 0; d < kScalarDims; ++d) {
      const double lo = stats.min[static_cast<std::size_t>(d)];
      const double hi = stats.max[static_cast<std::size_t>(d)];
      double x = ScalarOf(chunk[j], d);
      double v = 0.0;
      if (hi > lo) {
        if (x < lo || x > hi) {
          ++clamp_count;
          x = std::clamp(x, lo, hi);
        }
        v = 2.0 * (x - lo) / (hi - lo) - 1.0;
      }
      out.values(row, ScalarColumn(d)) = v;
    }
  }
  if (clamped != nullptr) *clamped += clamp_count;
  return out;
}

RelativeChunk Decode(const ActionChunk& chunk, const NormalizationStats& stats) {
  if (!chunk.normalized) throw Error("decode expects a normalized chunk");
  RelativeChunk out(static_cast<std::size_t>(chunk.horizon()));
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      const Rot6D v = chunk.values.row(row)
                          .segment<6>(static_cast<Eigen::Index>(k) * kPerKeypoint + 3)
                          .transpose();
      try {
        out[j].poses[k].rotation = MatrixToQuat(Rot6dDecode(v));
      } catch (const Error& e) {
        throw Error("step " + std::to_string(j) + ", keypoint " +
                    std::string(KeypointName(static_cast<Keypoint>(k))) + ": " +
                    e.what());
      }
    }
    for (int d = 0; d < kScalarDims; ++d) {
      const double lo = stats.min[static_cast<std::size_t>(d)];
      const double hi = stats.max[static_cast<std::size_t>(d)];
      const double v = chunk.values(row, ScalarColumn(d));
      SetScalar(out[j], d, hi > lo ? lo + 0.5 * (v + 1.0) * (hi - lo) : lo);
    }
  }
  return out;
}

NormalizationStats ComputeStats(std::span<const Trajectory> dataset,
                                int horizon) {
  if (dataset.empty()) throw Error("cannot compute stats of an empty dataset");
  NormalizationStats stats;
  stats.min.fill(std::numeric_limits<double>::infinity());
  stats.max.fill(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Trajectory& traj = dataset[i];
    if (traj.size() < static_cast<std::size_t>(horizon) + 1) {
      throw Error("trajectory " + std::to_string(i) + " has " +
                  std::to_string(traj.size()) + " frames, a chunk of horizon " +
                  std::to_string(horizon) + " needs " +
                  std::to_string(horizon + 1));
    }
    for (std::size_t t = 0; t + static_cast<std::size_t>(horizon) < traj.size(); ++t) {
      const RelativeChunk chunk = RelativeChunkAt(traj, t, horizon);
      for (const RelativeStep& step : chunk) {
        for (int d = 0; d < kScalarDims; ++d) {
          const double x = ScalarOf(step, d);
          auto& lo = stats.min[static_cast<std::size_t>(d)];
          auto& hi = stats.max[static_cast<std::size_t>(d)];
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
      }
    }
  }
  return stats;
}

std::string SerializeStats(const NormalizationStats& stats, int horizon) {
  json dims = json::array();
  const auto& names = ActionColumnNames();
  for (int d = 0; d < kScalarDims; ++d) {
    dims.push_back({{"name", names[static_cast<std::size_t>(ScalarColumn(d))]},
                    {"min", stats.min[static_cast<std::size_t>(d)]},
                    {"max", stats.max[static_cast<std::size_t>(d)]}});
  }
  json doc = {{"format_version", "stats-v1"},
              {"layout_version", std::string(kActionLayoutVersion)},
              {"horizon", horizon},
              {"dims", dims}};
  return doc.dump(2);
}

NormalizationStats ParseStats(std::string_view json_text, int* horizon) {
  NormalizationStats stats;
  try {
    const json doc = json::parse(json_text);
    const std::string layout = doc.at("layout_version").get<std::string>();
    if (layout != kActionLayoutVersion) {
      throw Error("stats layout '" + layout + "' does not match '" +
                  std::string(kActionLayoutVersion) + "'");
    }
    const auto& dims = doc.at("dims");
    if (!dims.is_array() || dims.size() != kScalarDims) {
      throw Error("stats need exactly 17 (min, max) pairs");
    }
    for (std::size_t d = 0; d < kScalarDims; ++d) {
      stats.min[d] = dims[d].at("min").get<double>();
      stats.max[d] = dims[d].at("max").get<double>();
      if (!(stats.min[d] <= stats.max[d])) {
        throw Error("stats dim " + std::to_string(d) + " has min > max");
      }
    }
    if (horizon != nullptr) *horizon = doc.value("horizon", kDefaultHorizon);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed stats document: ") + e.what());
  }
  return stats;
}

}  // namespace keyret
