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

#ifndef KEYRET_KINEMATICS_H_
#define KEYRET_KINEMATICS_H_

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "keyret/error.h"
#include "keyret/geometry.h"
#include "keyret/keypoints.h"

namespace keyret {

using JointVector = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

enum class JointType { kRevolute, kPrismatic, kFixed };

// A joint connects `parent` to `child`. The child frame is
//   parent * origin * motion(q)
// where motion is a rotation about `axis` (revolute) or a translation along
// it (prismatic), with the axis given in the origin frame.
struct JointSpec {
  std::string name;
  JointType type = JointType::kRevolute;
  std::string parent;
  std::string child;
  Pose origin;
  Vec3 axis = Vec3::UnitZ();
  double lower = 0.0;
  double upper = 0.0;
};

struct KeypointBinding {
  std::string link;
  Pose offset;
};

// Every violation found while validating a model document.
class ModelError : public Error {
 public:
  explicit ModelError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Immutable tree-structured kinematic model with five keypoint attachments.
class KinematicModel {
 public:
  // Validates the description and builds the model. Throws ModelError
  // listing every problem found.
  static KinematicModel Build(std::string name, std::vector<std::string> links,
                              std::vector<JointSpec> joints,
                              std::array<KeypointBinding, kNumKeypoints>
                                  keypoints,
                              double default_root_height = 0.0,
                              JointVector default_posture = {});

  const std::string& name() const { return name_; }
  int dof() const { return static_cast<int>(dof_joints_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }

  const std::vector<std::string>& links() const { return links_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const std::string& root_link() const { return links_[root_]; }
  const KeypointBinding& keypoint(Keypoint k) const {
    return keypoints_[Index(k)];
  }

  // Name of the joint driving generalized coordinate i.
  const std::string& dof_name(int i) const;
  // -1 when absent.
  int LinkIndex(std::string_view link) const;
  int DofIndex(std::string_view joint) const;

  const JointVector& lower_limits() const { return lower_; }
  const JointVector& upper_limits() const { return upper_; }
  JointVector Clamp(const JointVector& q) const;
  bool WithinLimits(const JointVector& q, double slack = 0.0) const;

  // Standing root height for the default posture; used for height
  // calibration.
  double default_root_height() const { return default_root_height_; }
  const JointVector& default_posture() const { return default_posture_; }

  // True if generalized coordinate i moves the keypoint frame.
  bool Moves(Keypoint k, int i) const {
    return keypoint_paths_[Index(k)][static_cast<std::size_t>(i)];
  }

  // Internal topology used by the kinematics routines.
  struct Step {
    int joint;         // index into joints()
    int parent_link;
    int child_link;
    int dof_index;     // -1 for fixed joints
  };
  const std::vector<Step>& topological_order() const { return order_; }
  int keypoint_link(Keypoint k) const { return keypoint_links_[Index(k)]; }

 private:
  KinematicModel() = default;

  std::string name_;
  std::vector<std::string> links_;
  std::vector<JointSpec> joints_;
  std::array<KeypointBinding, kNumKeypoints> keypoints_;
  std::array<int, kNumKeypoints> keypoint_links_{};
  std::array<std::vector<bool>, kNumKeypoints> keypoint_paths_;
  std::vector<int> dof_joints_;
  std::vector<Step> order_;
  int root_ = 0;
  JointVector lower_;
  JointVector upper_;
  double default_root_height_ = 0.0;
  JointVector default_posture_;
};

// Model JSON (see docs/formats.md).
KinematicModel ParseModel(std::string_view json_text);
KinematicModel LoadModel(const std::filesystem::path& path);
std::string SerializeModel(const KinematicModel& model);

// World poses of every link and keypoint frame.
struct FkResult {
  std::vector<Pose> links;
  KeypointPoses keypoints;
  // Per joint (indexed like KinematicModel::joints()): world position of the
  // joint frame and world direction of its axis.
  std::vector<Vec3> joint_positions;
  std::vector<Vec3> joint_axes;

  const Pose& keypoint(Keypoint k) const { return keypoints[Index(k)]; }
};

FkResult ForwardKinematics(const KinematicModel& model, const JointVector& q,
                           const Pose& root = Pose::Identity());

// Pose of one named link; throws on unknown name.
Pose LinkPose(const KinematicModel& model, const FkResult& fk,
              std::string_view link);

// Geometric Jacobian of a keypoint frame in the world frame: rows 0-2 map
// joint rates to linear velocity of the keypoint origin, rows 3-5 to angular
// velocity.
Jacobian KeypointJacobian(const KinematicModel& model, const FkResult& fk,
                          Keypoint keypoint);
Jacobian KeypointJacobian(const KinematicModel& model, const JointVector& q,
                          Keypoint keypoint,
                          const Pose& root = Pose::Identity());
// Name-based lookup; throws on an unknown keypoint name.
Jacobian KeypointJacobian(const KinematicModel& model, const JointVector& q,
                          std::string_view keypoint,
                          const Pose& root = Pose::Identity());

}  // namespace keyret

#endif  // KEYRET_KINEMATICS_H_
