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

// Reference-motion buffering and observation assembly for the 50 Hz tracking
// layer.

#ifndef KEYRET_MOTION_REF_H_
#define KEYRET_MOTION_REF_H_

#include <array>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "keyret/geometry.h"
#include "keyret/kinematics.h"
#include "keyret/skr.h"

namespace keyret {

inline constexpr double kControlRate = 50.0;

struct MotionChunk {
  std::vector<RobotMotionFrame> frames;
  double source_rate = kControlRate;
};

// Resamples onto a uniform grid at target_rate starting at the first frame.
// Root position and joints are interpolated linearly, root orientation by
// slerp. The last input frame is always emitted verbatim, appended after the
// grid when the span is not a multiple of the output period. A single-frame
// chunk is returned unchanged and *warning is set when non-null.
std::vector<RobotMotionFrame> Resample(const MotionChunk& chunk,
                                       double target_rate = kControlRate,
                                       std::string* warning = nullptr);

// Append-only store of control-rate reference frames, shared by one producer
// and one consumer. Frames never change after Append; the consumer reads any
// index below the watermark and moves its own cursor.
class ReferenceBuffer {
 public:
  ReferenceBuffer() = default;
  ReferenceBuffer(const ReferenceBuffer&) = delete;
  ReferenceBuffer& operator=(const ReferenceBuffer&) = delete;

  // Producer side.
  void Append(std::span<const RobotMotionFrame> frames);
  void Append(const RobotMotionFrame& frame);
  // No more frames will come. Wakes a waiting consumer.
  void Close();

  // Number of frames appended so far.
  std::size_t watermark() const;
  bool closed() const;
  // Blocks until index < watermark or the buffer is closed. Returns whether
  // the frame exists.
  bool WaitAvailable(std::size_t index) const;

  // Consumer side. Reads clamp to [0, watermark - 1]; throws when empty.
  RobotMotionFrame At(long long index) const;
  RobotMotionFrame AtOffset(int k) const { return At(static_cast<long long>(cursor_) + k); }
  std::size_t cursor() const { return cursor_; }
  void set_cursor(std::size_t cursor) { cursor_ = cursor; }

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<RobotMotionFrame> frames_;
  bool closed_ = false;
  // Owned by the consumer.
  std::size_t cursor_ = 0;
};

struct RobotState {
  Vec3 root_position = Vec3::Zero();
  Quat root_orientation;
  // Body-frame root angular velocity, rad/s.
  Vec3 angular_velocity = Vec3::Zero();
  JointVector joints;
  JointVector joint_velocities;
  JointVector previous_action;
  double timestamp = 0.0;

  double root_height() const { return root_position.z(); }
};

// Last N states, oldest first. The first push fills every slot.
class ProprioHistory {
 public:
  explicit ProprioHistory(int length = 4);

  void Push(const RobotState& state);
  int length() const { return length_; }
  bool empty() const { return states_.empty(); }
  const std::deque<RobotState>& states() const { return states_; }
  const RobotState& newest() const;

 private:
  int length_;
  std::deque<RobotState> states_;
};

struct OffsetSet {
  std::vector<int> offsets = {0, 1, 2, 3, 4, -1, -2, -4, -8, -12, -16};

  // Throws unless non-empty and containing 0.
  void Validate() const;
  int max() const;
  int min() const;
  std::size_t size() const { return offsets.size(); }
};

struct CommandFrame {
  // Reference minus current root position in the current heading frame.
  Vec3 dp = Vec3::Zero();
  // inverse(current orientation) * reference orientation.
  Quat dq;
  double h_ref = 0.0;
  Vec3 g_ref = Vec3::Zero();
  JointVector joints;

  int width() const { return 11 + static_cast<int>(joints.size()); }
  Eigen::VectorXd Flatten() const;
};

CommandFrame MakeCommandFrame(const RobotMotionFrame& reference,
                              const RobotState& state);
// Reads the frame at cursor + k, clamped to the buffer.
CommandFrame CommandAt(const ReferenceBuffer& buffer, const RobotState& state,
                       int k);
// Blocks of 11 + dof in offset order.
Eigen::VectorXd AssembleCommand(const ReferenceBuffer& buffer,
                                const RobotState& state,
                                const OffsetSet& offsets = {});

// [h, g (3), omega (3N), q (dof N), qdot (dof N), a_prev (dof N)], newest last
// within each history block.
Eigen::VectorXd AssembleProprio(const ProprioHistory& history);

// Leg and waist joints feeding the high-level policy, in model order.
inline constexpr std::array<const char*, 15> kHighLevelJoints = {
    "left_hip_pitch_joint",  "left_hip_roll_joint",   "left_hip_yaw_joint",
    "left_knee_joint",       "left_ankle_pitch_joint", "left_ankle_roll_joint",
    "right_hip_pitch_joint", "right_hip_roll_joint",  "right_hip_yaw_joint",
    "right_knee_joint",      "right_ankle_pitch_joint", "right_ankle_roll_joint",
    "waist_yaw_joint",       "waist_roll_joint",      "waist_pitch_joint"};

// Dof indices of kHighLevelJoints; throws if the model lacks one.
std::array<int, 15> HighLevelJointIndices(const KinematicModel& model);
Eigen::VectorXd SelectHighLevelJoints(const std::array<int, 15>& indices,
                                      const JointVector& q);
// Three 15-vectors, oldest first, concatenated to 45 values.
Eigen::VectorXd HighLevelProprio(std::span<const Eigen::VectorXd> frames);

// Column names for CSV export.
std::vector<std::string> CommandColumnNames(const KinematicModel& model,
                                            const OffsetSet& offsets = {});
std::vector<std::string> ProprioColumnNames(const KinematicModel& model,
                                            int history_length = 4);

}  // namespace keyret

#endif  // KEYRET_MOTION_REF_H_
