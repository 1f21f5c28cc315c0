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

// Spatial keypoint retargeting: five keypoint targets -> robot motion frame.
//
// Only the vertical pelvis-to-foot distance is rescaled to bridge the height
// gap between demonstrator and robot; everything else is kept metric and
// handed to a whole-body damped-least-squares IK over the floating root and
// all joints.

#ifndef KEYRET_SKR_H_
#define KEYRET_SKR_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "keyret/geometry.h"
#include "keyret/keypoints.h"
#include "keyret/kinematics.h"

namespace keyret {

// Root position (3) + root orientation wxyz (4) + joint positions (dof).
struct RobotMotionFrame {
  Vec3 root_position = Vec3::Zero();
  Quat root_orientation;
  JointVector joints;

  Pose root() const { return {root_position, root_orientation}; }
  int width() const { return 7 + static_cast<int>(joints.size()); }
  // Flat 7 + dof vector in the order above.
  Eigen::VectorXd Flatten() const;
  static RobotMotionFrame Unflatten(const Eigen::VectorXd& v);
};

// Frame standing at the model's default posture and root height.
RobotMotionFrame DefaultFrame(const KinematicModel& model);
// Default joints with the root placed so the pelvis keypoint lands on the
// pelvis target. Initial seed for streaming retargeting.
RobotMotionFrame PelvisAlignedSeed(const KinematicModel& model,
                                   const KeypointFrame& targets);

struct TaskWeight {
  double position = 1.0;
  double orientation = 0.5;
};

struct IkOptions {
  int max_iterations = 200;
  double damping = 1e-3;
  // stop once the applied step is shorter than this
  double step_tolerance = 1e-10;
  // converged once sqrt(r^T W r) falls below this
  double residual_tolerance = 1e-6;
  double max_step_norm = 0.5;
  int max_backtracks = 5;
};

struct SkrConfig {
  double height_scale = 1.0;
  std::array<TaskWeight, kNumKeypoints> weights;
  IkOptions ik;

  // Throws if any field is out of range.
  void Validate() const;
};

std::string SerializeSkrConfig(const SkrConfig& cfg);
SkrConfig ParseSkrConfig(std::string_view json_text);

struct IkReport {
  int iterations = 0;
  bool converged = false;
  // sqrt(r^T W r) at the returned solution
  double residual = 0.0;
  std::array<double, kNumKeypoints> position_error{};
  std::array<double, kNumKeypoints> orientation_error{};

  double max_position_error() const;
  double max_orientation_error() const;
};

// Robot-over-human ratio of standing pelvis heights.
double HeightScaleFromCalibration(double robot_pelvis_height,
                                  double demonstrator_pelvis_height);

// Scales only the z distance between each foot and the pelvis.
KeypointFrame ScaleKeypoints(const KeypointFrame& frame, double height_scale);

struct RetargetResult {
  RobotMotionFrame frame;
  IkReport report;
};

// Damped least squares over [root twist (6); joints (dof)] on the stacked
// 30-row weighted keypoint residual. Joint variables that would leave their
// limits are pinned at the bound and the remaining step is re-solved; the
// result is clamped as well. A step that raises the cost is halved up to
// max_backtracks times before the solver gives up. Non-convergence is
// reported, not thrown.
RetargetResult Retarget(const KinematicModel& model,
                        const KeypointFrame& targets,
                        const RobotMotionFrame& seed, const SkrConfig& cfg);

// Per-keypoint errors of `frame` against `targets`.
IkReport EvaluateKeypointError(const KinematicModel& model,
                               const KeypointFrame& targets,
                               const RobotMotionFrame& frame);

// Solves each target with the previous solution as seed. Reports are
// appended to `reports` when non-null.
std::vector<RobotMotionFrame> RetargetStream(
    const KinematicModel& model, std::span<const KeypointFrame> targets,
    const RobotMotionFrame& initial, const SkrConfig& cfg,
    std::vector<IkReport>* reports = nullptr);

// Keypoint frame of a robot configuration (world frame, zero grippers).
KeypointFrame KeypointsOf(const KinematicModel& model,
                          const RobotMotionFrame& frame, double timestamp = 0.0);

}  // namespace keyret

#endif  // KEYRET_SKR_H_
