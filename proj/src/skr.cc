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

#include "keyret/skr.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "json_util.h"

namespace keyret {

namespace {

using internal::json;

constexpr int kRowsPerKeypoint = 6;
constexpr int kRootVars = 6;

struct Linearization {
  Eigen::VectorXd residual;  // 30, unweighted
  Eigen::MatrixXd jacobian;  // 30 x (6 + dof)
  double cost = 0.0;         // r^T W r
};

Eigen::VectorXd TaskWeights(const SkrConfig& cfg) {
  Eigen::VectorXd w(kRowsPerKeypoint * static_cast<int>(kNumKeypoints));
  for (Keypoint k : kAllKeypoints) {
    const int row = kRowsPerKeypoint * static_cast<int>(Index(k));
    w.segment<3>(row).setConstant(cfg.weights[Index(k)].position);
    w.segment<3>(row + 3).setConstant(cfg.weights[Index(k)].orientation);
  }
  return w;
}

Eigen::VectorXd Residual(const FkResult& fk, const KeypointFrame& targets) {
  Eigen::VectorXd r(kRowsPerKeypoint * static_cast<int>(kNumKeypoints));
  for (Keypoint k : kAllKeypoints) {
    const int row = kRowsPerKeypoint * static_cast<int>(Index(k));
    const Pose& cur = fk.keypoint(k);
    const Pose& tgt = targets[k];
    r.segment<3>(row) = tgt.translation - cur.translation;
    r.segment<3>(row + 3) =
        (tgt.rotation * cur.rotation.Conjugate()).ToRotationVector();
  }
  return r;
}

double Cost(const Eigen::VectorXd& r, const Eigen::VectorXd& w) {
  return r.dot(w.cwiseProduct(r));
}

Linearization Linearize(const KinematicModel& model, const FkResult& fk,
                        const Vec3& root_position, const KeypointFrame& targets,
                        const Eigen::VectorXd& weights) {
  const int dof = model.dof();
  Linearization lin;
  lin.residual = Residual(fk, targets);
  lin.cost = Cost(lin.residual, weights);
  lin.jacobian.setZero(kRowsPerKeypoint * static_cast<int>(kNumKeypoints),
                       kRootVars + dof);
  for (Keypoint k : kAllKeypoints) {
    const int row = kRowsPerKeypoint * static_cast<int>(Index(k));
    const Vec3 arm = fk.keypoint(k).translation - root_position;
    // root translation, then root rotation increment (world frame)
    lin.jacobian.block<3, 3>(row, 0).setIdentity();
    lin.jacobian.block<3, 3>(row, 3) = -Skew(arm);
    lin.jacobian.block<3, 3>(row + 3, 3).setIdentity();
    lin.jacobian.block(row, kRootVars, 6, dof) = KeypointJacobian(model, fk, k);
  }
  return lin;
}

RobotMotionFrame ApplyStep(const KinematicModel& model,
                           const RobotMotionFrame& frame,
                           const Eigen::VectorXd& step) {
  RobotMotionFrame out;
  out.root_position = frame.root_position + step.head<3>();
  out.root_orientation =
      (Quat::FromRotationVector(step.segment<3>(3)) * frame.root_orientation)
          .Normalized();
  out.joints = model.Clamp(frame.joints + step.tail(model.dof()));
  return out;
}

// Solves normal * step = rhs with the joint part of the step restricted to
// [lo, hi]. Variables whose unconstrained step leaves the box are pinned to
// the bound they cross and the rest is re-solved.
Eigen::VectorXd BoxedStep(const Eigen::MatrixXd& normal,
                          const Eigen::VectorXd& rhs, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  const Eigen::Index n = rhs.size();
  const Eigen::Index dof = lo.size();
  std::vector<bool> pinned(static_cast<std::size_t>(n), false);
  Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
  for (Eigen::Index pass = 0; pass <= dof; ++pass) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!pinned[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd a(nf, nf);
    Eigen::VectorXd b(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
      b[r] = rhs[free[r]];
      for (Eigen::Index i = 0; i < n; ++i) {
        if (pinned[static_cast<std::size_t>(i)]) b[r] -= normal(free[r], i) * step[i];
      }
      for (Eigen::Index c = 0; c < nf; ++c) a(r, c) = normal(free[r], free[c]);
    }
    const Eigen::VectorXd x = a.ldlt().solve(b);
    bool changed = false;
    for (Eigen::Index r = 0; r < nf; ++r) {
      const Eigen::Index i = free[r];
      step[i] = x[r];
      if (i < kRootVars) continue;
      const Eigen::Index j = i - kRootVars;
      if (step[i] < lo[j] || step[i] > hi[j]) {
        step[i] = std::clamp(step[i], lo[j], hi[j]);
        pinned[static_cast<std::size_t>(i)] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return step;
}

double FrameDistance(const RobotMotionFrame& a, const RobotMotionFrame& b) {
  const double dp = (a.root_position - b.root_position).squaredNorm();
  const double dr = RotationAngle(a.root_orientation, b.root_orientation);
  const double dq = (a.joints - b.joints).squaredNorm();
  return std::sqrt(dp + dr * dr + dq);
}

json WeightsToJson(const TaskWeight& w) {
  return {{"position", w.position}, {"orientation", w.orientation}};
}

}  // namespace

Eigen::VectorXd RobotMotionFrame::Flatten() const {
  Eigen::VectorXd v(width());
  v.head<3>() = root_position;
  v.segment<4>(3) = root_orientation.ToWxyz();
  v.tail(joints.size()) = joints;
  return v;
}

RobotMotionFrame RobotMotionFrame::Unflatten(const Eigen::VectorXd& v) {
  if (v.size() < 7) throw Error("motion frame needs at least 7 values");
  RobotMotionFrame f;
  f.root_position = v.head<3>();
  f.root_orientation = Quat(v[3], v[4], v[5], v[6]);
  f.joints = v.tail(v.size() - 7);
  return f;
}

RobotMotionFrame DefaultFrame(const KinematicModel& model) {
  RobotMotionFrame f;
  f.root_position = Vec3(0.0, 0.0, model.default_root_height());
  f.joints = model.default_posture();
  return f;
}

RobotMotionFrame PelvisAlignedSeed(const KinematicModel& model,
                                   const KeypointFrame& targets) {
  RobotMotionFrame seed = DefaultFrame(model);
  const Pose root =
      targets[Keypoint::kPelvis] * Inverse(model.keypoint(Keypoint::kPelvis).offset);
  seed.root_position = root.translation;
  seed.root_orientation = root.rotation.Normalized();
  return seed;
}

void SkrConfig::Validate() const {
  if (!(height_scale > 0.0) || !std::isfinite(height_scale)) {
    throw Error("height_scale must be positive");
  }
  bool any_positive = false;
  for (const auto& w : weights) {
    if (!(w.position >= 0.0) || !(w.orientation >= 0.0)) {
      throw Error("task weights must be non-negative");
    }
    any_positive = any_positive || w.position > 0.0 || w.orientation > 0.0;
  }
  if (!any_positive) throw Error("at least one task weight must be positive");
  if (!(ik.damping > 0.0)) throw Error("IK damping must be positive");
  if (ik.max_iterations < 0) throw Error("max_iterations must be >= 0");
  if (!(ik.max_step_norm > 0.0)) throw Error("max_step_norm must be positive");
  if (ik.max_backtracks < 0) throw Error("max_backtracks must be >= 0");
}

std::string SerializeSkrConfig(const SkrConfig& cfg) {
  json weights = json::object();
  for (Keypoint k : kAllKeypoints) {
    weights[std::string(KeypointName(k))] = WeightsToJson(cfg.weights[Index(k)]);
  }
  json doc = {{"format_version", "skr-config-v1"},
              {"height_scale", cfg.height_scale},
              {"weights", weights},
              {"ik",
               {{"max_iterations", cfg.ik.max_iterations},
                {"damping", cfg.ik.damping},
                {"step_tolerance", cfg.ik.step_tolerance},
                {"residual_tolerance", cfg.ik.residual_tolerance},
                {"max_step_norm", cfg.ik.max_step_norm},
                {"max_backtracks", cfg.ik.max_backtracks}}}};
  return doc.dump(2);
}

SkrConfig ParseSkrConfig(std::string_view json_text) {
  SkrConfig cfg;
  try {
    const json doc = json::parse(json_text);
    if (doc.contains("format_version") && doc.at("format_version") != "skr-config-v1") {
      throw Error("SKR config format_version must be \"skr-config-v1\"");
    }
    cfg.height_scale = doc.value("height_scale", cfg.height_scale);
    if (doc.contains("weights")) {
      const auto& w = doc.at("weights");
      for (auto it = w.begin(); it != w.end(); ++it) {
        const auto k = KeypointFromName(it.key());
        if (!k) throw Error("unknown keypoint '" + it.key() + "' in weights");
        auto& tw = cfg.weights[Index(*k)];
        tw.position = it.value().value("position", tw.position);
        tw.orientation = it.value().value("orientation", tw.orientation);
      }
    }
    if (doc.contains("ik")) {
      const auto& ik = doc.at("ik");
      cfg.ik.max_iterations = ik.value("max_iterations", cfg.ik.max_iterations);
      cfg.ik.damping = ik.value("damping", cfg.ik.damping);
      cfg.ik.step_tolerance = ik.value("step_tolerance", cfg.ik.step_tolerance);
      cfg.ik.residual_tolerance =
          ik.value("residual_tolerance", cfg.ik.residual_tolerance);
      cfg.ik.max_step_norm = ik.value("max_step_norm", cfg.ik.max_step_norm);
      cfg.ik.max_backtracks = ik.value("max_backtracks", cfg.ik.max_backtracks);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("malformed SKR config: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

double IkReport::max_position_error() const {
  return *std::max_element(position_error.begin(), position_error.end());
}

double IkReport::max_orientation_error() const {
  return *std::max_element(orientation_error.begin(), orientation_error.end());
}

double HeightScaleFromCalibration(double robot_pelvis_height,
                                  double demonstrator_pelvis_height) {
  if (!(robot_pelvis_height > 0.0) || !(demonstrator_pelvis_height > 0.0)) {
    throw Error("calibration heights must be positive");
  }
  return robot_pelvis_height / demonstrator_pelvis_height;
}

KeypointFrame ScaleKeypoints(const KeypointFrame& frame, double height_scale) {
  KeypointFrame out = frame;
  const double pelvis_z = frame[Keypoint::kPelvis].translation.z();
  for (Keypoint foot : {Keypoint::kLeftFoot, Keypoint::kRightFoot}) {
    const double z = frame[foot].translation.z();
    out[foot].translation.z() = pelvis_z + height_scale * (z - pelvis_z);
  }
  return out;
}

IkReport EvaluateKeypointError(const KinematicModel& model,
                               const KeypointFrame& targets,
                               const RobotMotionFrame& frame) {
  const FkResult fk = ForwardKinematics(model, frame.joints, frame.root());
  IkReport report;
  for (Keypoint k : kAllKeypoints) {
    report.position_error[Index(k)] =
        (targets[k].translation - fk.keypoint(k).translation).norm();
    report.orientation_error[Index(k)] =
        RotationAngle(targets[k].rotation, fk.keypoint(k).rotation);
  }
  return report;
}

RetargetResult Retarget(const KinematicModel& model,
                        const KeypointFrame& targets,
                        const RobotMotionFrame& seed, const SkrConfig& cfg) {
  cfg.Validate();
  if (seed.joints.size() != model.dof()) {
    throw Error("seed has " + std::to_string(seed.joints.size()) +
                " joints, model has dof " + std::to_string(model.dof()));
  }
  for (Keypoint k : kAllKeypoints) {
    if (!targets[k].IsFinite()) {
      throw Error("non-finite target for keypoint " +
                  std::string(KeypointName(k)));
    }
  }
  const IkOptions& opt = cfg.ik;
  const Eigen::VectorXd weights = TaskWeights(cfg);

  RobotMotionFrame current = seed;
  current.root_orientation = seed.root_orientation.Normalized();
  current.joints = model.Clamp(seed.joints);
  FkResult fk = ForwardKinematics(model, current.joints, current.root());

  int iterations = 0;
  while (true) {
    const Linearization lin =
        Linearize(model, fk, current.root_position, targets, weights);
    if (!std::isfinite(lin.cost) || !lin.jacobian.allFinite()) {
      throw Error("IK produced a non-finite intermediate at iteration " +
                  std::to_string(iterations));
    }
    if (std::sqrt(lin.cost) < opt.residual_tolerance) break;
    if (iterations >= opt.max_iterations) break;

    const Eigen::MatrixXd jtw = lin.jacobian.transpose() * weights.asDiagonal();
    Eigen::MatrixXd normal = jtw * lin.jacobian;
    normal.diagonal().array() += opt.damping;
    Eigen::VectorXd step =
        BoxedStep(normal, jtw * lin.residual, model.lower_limits() - current.joints,
                  model.upper_limits() - current.joints);
    if (!step.allFinite()) {
      throw Error("IK step is non-finite at iteration " +
                  std::to_string(iterations));
    }
    const double norm = step.norm();
    if (norm > opt.max_step_norm) step *= opt.max_step_norm / norm;

    // backtrack until the cost does not increase
    bool accepted = false;
    RobotMotionFrame candidate;
    FkResult candidate_fk;
    for (int attempt = 0; attempt <= opt.max_backtracks; ++attempt) {
      candidate = ApplyStep(model, current, step);
      candidate_fk =
          ForwardKinematics(model, candidate.joints, candidate.root());
      const double cost = Cost(Residual(candidate_fk, targets), weights);
      if (cost <= lin.cost) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    ++iterations;
    const double moved = FrameDistance(candidate, current);
    current = std::move(candidate);
    fk = std::move(candidate_fk);
    if (moved < opt.step_tolerance) break;
  }

  RetargetResult result;
  result.frame = current;
  result.report = EvaluateKeypointError(model, targets, current);
  result.report.iterations = iterations;
  result.report.residual = std::sqrt(Cost(Residual(fk, targets), weights));
  result.report.converged = result.report.residual < opt.residual_tolerance;
  return result;
}

std::vector<RobotMotionFrame> RetargetStream(
    const KinematicModel& model, std::span<const KeypointFrame> targets,
    const RobotMotionFrame& initial, const SkrConfig& cfg,
    std::vector<IkReport>* reports) {
  if (targets.empty()) throw Error("retarget stream needs at least one frame");
  std::vector<RobotMotionFrame> out;
  out.reserve(targets.size());
  RobotMotionFrame seed = initial;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    RetargetResult r;
    try {
      r = Retarget(model, targets[i], seed, cfg);
    } catch (const Error& e) {
      throw Error("frame " + std::to_string(i) + ": " + e.what());
    }
    if (reports != nullptr) reports->push_back(r.report);
    seed = r.frame;
    out.push_back(std::move(r.frame));
  }
  return out;
}

KeypointFrame KeypointsOf(const KinematicModel& model,
                          const RobotMotionFrame& frame, double timestamp) {
  const FkResult fk = ForwardKinematics(model, frame.joints, frame.root());
  KeypointFrame kf;
  kf.poses = fk.keypoints;
  kf.timestamp = timestamp;
  return kf;
}

}  // namespace keyret
