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

#include "keyret/kinematics.h"

#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json_util.h"

namespace keyret {

namespace {

using internal::json;

constexpr double kAxisTolerance = 1e-6;

std::string JoinProblems(const std::vector<std::string>& problems) {
  std::string out = "invalid kinematic model:";
  for (const auto& p : problems) out += "\n  - " + p;
  return out;
}

const char* TypeName(JointType t) {
  switch (t) {
    case JointType::kRevolute:
      return "revolute";
    case JointType::kPrismatic:
      return "prismatic";
    case JointType::kFixed:
      return "fixed";
  }
  return "?";
}

}  // namespace

ModelError::ModelError(std::vector<std::string> problems)
    : Error(JoinProblems(problems)), problems_(std::move(problems)) {}

KinematicModel KinematicModel::Build(
    std::string name, std::vector<std::string> links,
    std::vector<JointSpec> joints,
    std::array<KeypointBinding, kNumKeypoints> keypoints,
    double default_root_height, JointVector default_posture) {
  std::vector<std::string> problems;

  std::map<std::string, int, std::less<>> link_index;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!link_index.emplace(links[i], static_cast<int>(i)).second) {
      problems.push_back("duplicate link '" + links[i] + "'");
    }
  }
  if (links.empty()) problems.push_back("model has no links");

  std::set<std::string, std::less<>> joint_names;
  std::vector<int> parent_joint(links.size(), -1);
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const JointSpec& js = joints[j];
    const std::string tag = "joint '" + js.name + "'";
    if (!joint_names.insert(js.name).second) {
      problems.push_back("duplicate joint '" + js.name + "'");
    }
    auto p = link_index.find(js.parent);
    auto c = link_index.find(js.child);
    if (p == link_index.end()) {
      problems.push_back(tag + ": unknown parent link '" + js.parent + "'");
    }
    if (c == link_index.end()) {
      problems.push_back(tag + ": unknown child link '" + js.child + "'");
    } else if (parent_joint[static_cast<std::size_t>(c->second)] >= 0) {
      problems.push_back("link '" + js.child + "' has more than one parent");
    } else {
      parent_joint[static_cast<std::size_t>(c->second)] = static_cast<int>(j);
    }
    if (!js.origin.IsFinite() ||
        std::abs(js.origin.rotation.Norm() - 1.0) > kAxisTolerance) {
      problems.push_back(tag + ": origin must be finite with unit rotation");
    }
    if (js.type != JointType::kFixed) {
      if (!js.axis.allFinite() || std::abs(js.axis.norm() - 1.0) > kAxisTolerance) {
        std::ostringstream msg;
        msg << tag << ": axis is not unit norm (|axis| = " << js.axis.norm()
            << ")";
        problems.push_back(msg.str());
      }
      if (!(js.lower < js.upper)) {
        std::ostringstream msg;
        msg << tag << ": limits require lo < hi (got [" << js.lower << ", "
            << js.upper << "])";
        problems.push_back(msg.str());
      }
    }
  }

  int root = -1;
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (parent_joint[i] < 0) {
      if (root >= 0) {
        problems.push_back("links '" + links[static_cast<std::size_t>(root)] +
                           "' and '" + links[i] +
                           "' both lack a parent (forest, not a tree)");
      } else {
        root = static_cast<int>(i);
      }
    }
  }
  if (root < 0 && !links.empty()) {
    problems.push_back("no root link: the joint graph contains a cycle");
  }

  std::array<int, kNumKeypoints> keypoint_links{};
  for (Keypoint k : kAllKeypoints) {
    const auto& b = keypoints[Index(k)];
    auto it = link_index.find(b.link);
    if (b.link.empty()) {
      problems.push_back("missing keypoint binding '" +
                         std::string(KeypointName(k)) + "'");
    } else if (it == link_index.end()) {
      problems.push_back("keypoint '" + std::string(KeypointName(k)) +
                         "' binds unknown link '" + b.link + "'");
    } else {
      keypoint_links[Index(k)] = it->second;
    }
  }

  if (!problems.empty()) throw ModelError(std::move(problems));

  KinematicModel m;
  m.name_ = std::move(name);
  m.root_ = root;
  m.keypoint_links_ = keypoint_links;

  // dof order is declaration order of the movable joints
  std::vector<int> dof_of_joint(joints.size(), -1);
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (joints[j].type != JointType::kFixed) {
      dof_of_joint[j] = static_cast<int>(m.dof_joints_.size());
      m.dof_joints_.push_back(static_cast<int>(j));
    }
  }

  // breadth-first from the root; links never reached sit on a cycle
  std::vector<std::vector<int>> children(links.size());
  for (std::size_t j = 0; j < joints.size(); ++j) {
    children[static_cast<std::size_t>(link_index.at(joints[j].parent))]
        .push_back(static_cast<int>(j));
  }
  std::vector<int> link_parent(links.size(), -1);
  std::vector<bool> reached(links.size(), false);
  std::deque<int> queue = {root};
  reached[static_cast<std::size_t>(root)] = true;
  while (!queue.empty()) {
    const int link = queue.front();
    queue.pop_front();
    for (int j : children[static_cast<std::size_t>(link)]) {
      const int child = link_index.at(joints[static_cast<std::size_t>(j)].child);
      if (reached[static_cast<std::size_t>(child)]) continue;
      reached[static_cast<std::size_t>(child)] = true;
      link_parent[static_cast<std::size_t>(child)] = j;
      m.order_.push_back({j, link, child, dof_of_joint[static_cast<std::size_t>(j)]});
      queue.push_back(child);
    }
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (!reached[i]) problems.push_back("link '" + links[i] + "' lies on a cycle");
  }
  if (!problems.empty()) throw ModelError(std::move(problems));

  const int dof = m.dof();
  m.lower_.resize(dof);
  m.upper_.resize(dof);
  for (int i = 0; i < dof; ++i) {
    const auto& js = joints[static_cast<std::size_t>(m.dof_joints_[static_cast<std::size_t>(i)])];
    m.lower_[i] = js.lower;
    m.upper_[i] = js.upper;
  }

  for (Keypoint k : kAllKeypoints) {
    auto& path = m.keypoint_paths_[Index(k)];
    path.assign(static_cast<std::size_t>(dof), false);
    int link = keypoint_links[Index(k)];
    while (link_parent[static_cast<std::size_t>(link)] >= 0) {
      const int j = link_parent[static_cast<std::size_t>(link)];
      if (dof_of_joint[static_cast<std::size_t>(j)] >= 0) {
        path[static_cast<std::size_t>(dof_of_joint[static_cast<std::size_t>(j)])] = true;
      }
      link = link_index.at(joints[static_cast<std::size_t>(j)].parent);
    }
  }

  if (default_posture.size() == 0) {
    default_posture = JointVector::Zero(dof);
  } else if (default_posture.size() != dof) {
    throw ModelError({"default_posture has " +
                      std::to_string(default_posture.size()) +
                      " entries, model has dof " + std::to_string(dof)});
  }
  m.default_root_height_ = default_root_height;
  m.default_posture_ = std::move(default_posture);
  m.links_ = std::move(links);
  m.joints_ = std::move(joints);
  m.keypoints_ = std::move(keypoints);
  return m;
}

const std::string& KinematicModel::dof_name(int i) const {
  return joints_[static_cast<std::size_t>(dof_joints_.at(static_cast<std::size_t>(i)))].name;
}

int KinematicModel::LinkIndex(std::string_view link) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i] == link) return static_cast<int>(i);
  }
  return -1;
}

int KinematicModel::DofIndex(std::string_view joint) const {
  for (int i = 0; i < dof(); ++i) {
    if (dof_name(i) == joint) return i;
  }
  return -1;
}

JointVector KinematicModel::Clamp(const JointVector& q) const {
  return q.cwiseMax(lower_).cwiseMin(upper_);
}

bool KinematicModel::WithinLimits(const JointVector& q, double slack) const {
  if (q.size() != dof()) return false;
  return ((q.array() >= lower_.array() - slack) &&
          (q.array() <= upper_.array() + slack))
      .all();
}

KinematicModel ParseModel(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(std::string("model document is not valid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.contains("format_version") &&
      doc.at("format_version") != "model-v1") {
    throw Error("model format_version must be \"model-v1\"");
  }
  try {
    std::vector<std::string> links;
    for (const auto& l : doc.at("links")) {
      links.push_back(l.is_string() ? l.get<std::string>()
                                    : l.at("name").get<std::string>());
    }
    std::vector<JointSpec> joints;
    for (const auto& j : doc.at("joints")) {
      JointSpec js;
      js.name = j.at("name").get<std::string>();
      const std::string type = j.value("type", "revolute");
      if (type == "revolute") {
        js.type = JointType::kRevolute;
      } else if (type == "prismatic") {
        js.type = JointType::kPrismatic;
      } else if (type == "fixed") {
        js.type = JointType::kFixed;
      } else {
        throw Error("joint '" + js.name + "': unknown type '" + type + "'");
      }
      js.parent = j.at("parent").get<std::string>();
      js.child = j.at("child").get<std::string>();
      js.origin = internal::ReadPose(j.value("origin", json()), js.name + ".origin");
      if (js.type != JointType::kFixed) {
        js.axis = internal::ReadVec3(j.at("axis"), js.name + ".axis");
        const auto& lim = j.at("limits");
        if (!lim.is_array() || lim.size() != 2) {
          throw Error("joint '" + js.name + "': limits must be [lo, hi]");
        }
        js.lower = lim[0].get<double>();
        js.upper = lim[1].get<double>();
      }
      joints.push_back(std::move(js));
    }
    std::array<KeypointBinding, kNumKeypoints> bindings;
    const auto& kps = doc.at("keypoints");
    for (Keypoint k : kAllKeypoints) {
      const std::string key(KeypointName(k));
      if (!kps.contains(key)) continue;  // reported by Build
      bindings[Index(k)].link = kps.at(key).at("link").get<std::string>();
      bindings[Index(k)].offset =
          internal::ReadPose(kps.at(key).value("offset", json()), key + ".offset");
    }
    JointVector posture;
    if (doc.contains("default_posture")) {
      posture = internal::ReadVector(doc.at("default_posture"), "default_posture");
    }
    return KinematicModel::Build(doc.value("name", "unnamed"), std::move(links),
                                 std::move(joints), std::move(bindings),
                                 doc.value("default_root_height", 0.0),
                                 std::move(posture));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model document: ") + e.what());
  }
}

KinematicModel LoadModel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseModel(buf.str());
}

std::string SerializeModel(const KinematicModel& model) {
  json doc;
  doc["format_version"] = "model-v1";
  doc["name"] = model.name();
  doc["default_root_height"] = model.default_root_height();
  doc["default_posture"] = internal::WriteVector(model.default_posture());
  json links = json::array();
  for (const auto& l : model.links()) links.push_back({{"name", l}});
  doc["links"] = links;
  json joints = json::array();
  for (const auto& js : model.joints()) {
    json j = {{"name", js.name},
              {"type", TypeName(js.type)},
              {"parent", js.parent},
              {"child", js.child},
              {"origin", internal::WritePose(js.origin)}};
    if (js.type != JointType::kFixed) {
      j["axis"] = internal::WriteVec3(js.axis);
      j["limits"] = json::array({js.lower, js.upper});
    }
    joints.push_back(j);
  }
  doc["joints"] = joints;
  json kps = json::object();
  for (Keypoint k : kAllKeypoints) {
    kps[std::string(KeypointName(k))] = {
        {"link", model.keypoint(k).link},
        {"offset", internal::WritePose(model.keypoint(k).offset)}};
  }
  doc["keypoints"] = kps;
  return doc.dump(2);
}

FkResult ForwardKinematics(const KinematicModel& model, const JointVector& q,
                           const Pose& root) {
  if (q.size() != model.dof()) {
    throw Error("joint vector has length " + std::to_string(q.size()) +
                ", model '" + model.name() + "' has dof " +
                std::to_string(model.dof()));
  }
  if (!q.allFinite()) throw Error("joint vector contains non-finite values");

  FkResult fk;
  fk.links.assign(static_cast<std::size_t>(model.num_links()), Pose());
  fk.joint_positions.assign(model.joints().size(), Vec3::Zero());
  fk.joint_axes.assign(model.joints().size(), Vec3::Zero());
  fk.links[static_cast<std::size_t>(model.LinkIndex(model.root_link()))] = root;

  for (const auto& step : model.topological_order()) {
    const JointSpec& js = model.joints()[static_cast<std::size_t>(step.joint)];
    const Pose frame = fk.links[static_cast<std::size_t>(step.parent_link)] * js.origin;
    Pose motion;
    if (js.type == JointType::kRevolute) {
      motion.rotation = Quat::FromAxisAngle(js.axis, q[step.dof_index]);
    } else if (js.type == JointType::kPrismatic) {
      motion.translation = js.axis * q[step.dof_index];
    }
    fk.joint_positions[static_cast<std::size_t>(step.joint)] = frame.translation;
    fk.joint_axes[static_cast<std::size_t>(step.joint)] = frame.rotation.Rotate(js.axis);
    fk.links[static_cast<std::size_t>(step.child_link)] = frame * motion;
  }
  for (Keypoint k : kAllKeypoints) {
    fk.keypoints[Index(k)] =
        fk.links[static_cast<std::size_t>(model.keypoint_link(k))] *
        model.keypoint(k).offset;
  }
  return fk;
}

Pose LinkPose(const KinematicModel& model, const FkResult& fk,
              std::string_view link) {
  const int i = model.LinkIndex(link);
  if (i < 0) throw Error("unknown link '" + std::string(link) + "'");
  return fk.links[static_cast<std::size_t>(i)];
}

Jacobian KeypointJacobian(const KinematicModel& model, const FkResult& fk,
                          Keypoint keypoint) {
  Jacobian jac = Jacobian::Zero(6, model.dof());
  const Vec3 p = fk.keypoint(keypoint).translation;
  for (const auto& step : model.topological_order()) {
    if (step.dof_index < 0 || !model.Moves(keypoint, step.dof_index)) continue;
    const JointSpec& js = model.joints()[static_cast<std::size_t>(step.joint)];
    const Vec3& axis = fk.joint_axes[static_cast<std::size_t>(step.joint)];
    if (js.type == JointType::kRevolute) {
      jac.block<3, 1>(0, step.dof_index) =
          axis.cross(p - fk.joint_positions[static_cast<std::size_t>(step.joint)]);
      jac.block<3, 1>(3, step.dof_index) = axis;
    } else {
      jac.block<3, 1>(0, step.dof_index) = axis;
    }
  }
  return jac;
}

Jacobian KeypointJacobian(const KinematicModel& model, const JointVector& q,
                          Keypoint keypoint, const Pose& root) {
  return KeypointJacobian(model, ForwardKinematics(model, q, root), keypoint);
}

Jacobian KeypointJacobian(const KinematicModel& model, const JointVector& q,
                          std::string_view keypoint, const Pose& root) {
  const auto k = KeypointFromName(keypoint);
  if (!k) throw Error("unknown keypoint '" + std::string(keypoint) + "'");
  return KeypointJacobian(model, q, *k, root);
}

}  // namespace keyret
