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

#include "keyret/motion_ref.h"

#include <algorithm>
#include <cmath>

#include "keyret/error.h"

namespace keyret {

namespace {

RobotMotionFrame Interpolate(const RobotMotionFrame& a,
                             const RobotMotionFrame& b, double u) {
  RobotMotionFrame out;
  out.root_position = a.root_position + u * (b.root_position - a.root_position);
  out.root_orientation = Slerp(a.root_orientation, b.root_orientation, u);
  out.joints = a.joints + u * (b.joints - a.joints);
  return out;
}

}  // namespace

std::vector<RobotMotionFrame> Resample(const MotionChunk& chunk,
                                       double target_rate,
                                       std::string* warning) {
  const auto& in = chunk.frames;
  if (in.empty()) throw Error("cannot resample an empty motion chunk");
  if (!(chunk.source_rate > 0.0) || !(target_rate > 0.0)) {
    throw Error("resample rates must be positive");
  }
  for (const auto& f : in) {
    if (f.joints.size() != in.front().joints.size()) {
      throw Error("motion chunk frames differ in dof");
    }
  }
  if (in.size() == 1) {
    if (warning != nullptr) *warning = "single-frame chunk returned unchanged";
    return in;
  }

  const std::size_t last = in.size() - 1;
  // Source-index position of output sample i is i * source_rate / target_rate.
  const double step = chunk.source_rate / target_rate;
  std::vector<RobotMotionFrame> out;
  for (std::size_t i = 0;; ++i) {
    const double u = static_cast<double>(i) * chunk.source_rate / target_rate;
    if (u > static_cast<double>(last) + 1e-9 * step) break;
    const double base = std::floor(u);
    const auto j = static_cast<std::size_t>(base);
    const double frac = u - base;
    if (j >= last) {
      out.push_back(in[last]);
    } else if (frac == 0.0) {
      out.push_back(in[j]);
    } else {
      out.push_back(Interpolate(in[j], in[j + 1], frac));
    }
  }
  // Endpoint not on the grid: emit it explicitly.
  const double covered = static_cast<double>(out.size() - 1) * step;
  if (covered < static_cast<double>(last) - 1e-9 * step) out.push_back(in[last]);
  return out;
}

void ReferenceBuffer::Append(std::span<const RobotMotionFrame> frames) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (closed_) throw Error("append to a closed reference buffer");
    frames_.insert(frames_.end(), frames.begin(), frames.end());
  }
  cv_.notify_all();
}

void ReferenceBuffer::Append(const RobotMotionFrame& frame) {
  Append(std::span<const RobotMotionFrame>(&frame, 1));
}

void ReferenceBuffer::Close() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::size_t ReferenceBuffer::watermark() const {
  std::lock_guard<std::mutex> lock(mu_);
  return frames_.size();
}

bool ReferenceBuffer::closed() const {
  std::lock_guard<std::mutex> lock(mu_);
  return closed_;
}

bool ReferenceBuffer::WaitAvailable(std::size_t index) const {
  std::unique_lock<std::mutex> lock(mu_);
  cv_.wait(lock, [&] { return index < frames_.size() || closed_; });
  return index < frames_.size();
}

RobotMotionFrame ReferenceBuffer::At(long long index) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (frames_.empty()) throw Error("reference buffer is empty");
  const long long hi = static_cast<long long>(frames_.size()) - 1;
  return frames_[static_cast<std::size_t>(std::clamp(index, 0LL, hi))];
}

ProprioHistory::ProprioHistory(int length) : length_(length) {
  if (length < 1) throw Error("history length must be at least 1");
}

void ProprioHistory::Push(const RobotState& state) {
  if (states_.empty()) {
    states_.assign(static_cast<std::size_t>(length_), state);
    return;
  }
  states_.pop_front();
  states_.push_back(state);
}

const RobotState& ProprioHistory::newest() const {
  if (states_.empty()) throw Error("proprio history is empty");
  return states_.back();
}

void OffsetSet::Validate() const {
  if (offsets.empty()) throw Error("offset set is empty");
  if (std::find(offsets.begin(), offsets.end(), 0) == offsets.end()) {
    throw Error("offset set must contain 0");
  }
}

int OffsetSet::max() const {
  Validate();
  return *std::max_element(offsets.begin(), offsets.end());
}

int OffsetSet::min() const {
  Validate();
  return *std::min_element(offsets.begin(), offsets.end());
}

Eigen::VectorXd CommandFrame::Flatten() const {
  Eigen::VectorXd v(width());
  v.segment<3>(0) = dp;
  v.segment<4>(3) = dq.ToWxyz();
  v[7] = h_ref;
  v.segment<3>(8) = g_ref;
  v.tail(joints.size()) = joints;
  return v;
}

CommandFrame MakeCommandFrame(const RobotMotionFrame& reference,
                              const RobotState& state) {
  CommandFrame c;
  const Quat heading = HeadingQuat(state.root_orientation);
  c.dp = heading.Conjugate().Rotate(reference.root_position - state.root_position);
  c.dq = state.root_orientation.Conjugate() * reference.root_orientation;
  c.h_ref = reference.root_position.z();
  c.g_ref = ProjectedGravity(reference.root_orientation);
  c.joints = reference.joints;
  return c;
}

CommandFrame CommandAt(const ReferenceBuffer& buffer, const RobotState& state,
                       int k) {
  return MakeCommandFrame(buffer.AtOffset(k), state);
}

Eigen::VectorXd AssembleCommand(const ReferenceBuffer& buffer,
                                const RobotState& state,
                                const OffsetSet& offsets) {
  offsets.Validate();
  std::vector<Eigen::VectorXd> blocks;
  blocks.reserve(offsets.size());
  Eigen::Index total = 0;
  for (int k : offsets.offsets) {
    blocks.push_back(CommandAt(buffer, state, k).Flatten());
    total += blocks.back().size();
  }
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.segment(at, b.size()) = b;
    at += b.size();
  }
  return out;
}

Eigen::VectorXd AssembleProprio(const ProprioHistory& history) {
  const RobotState& now = history.newest();
  const auto n = static_cast<Eigen::Index>(history.length());
  const Eigen::Index dof = now.joints.size();
  Eigen::VectorXd out(4 + n * (3 + 3 * dof));
  out[0] = now.root_height();
  out.segment<3>(1) = ProjectedGravity(now.root_orientation);
  Eigen::Index at = 4;
  for (const auto& s : history.states()) {
    out.segment<3>(at) = s.angular_velocity;
    at += 3;
  }
  auto put = [&](auto member) {
    for (const auto& s : history.states()) {
      const JointVector& v = s.*member;
      if (v.size() != dof) throw Error("proprio history entries differ in dof");
      out.segment(at, dof) = v;
      at += dof;
    }
  };
  put(&RobotState::joints);
  put(&RobotState::joint_velocities);
  put(&RobotState::previous_action);
  return out;
}

std::array<int, 15> HighLevelJointIndices(const KinematicModel& model) {
  std::array<int, 15> idx{};
  for (std::size_t i = 0; i < kHighLevelJoints.size(); ++i) {
    idx[i] = model.DofIndex(kHighLevelJoints[i]);
    if (idx[i] < 0) {
      throw Error(std::string("model has no joint '") + kHighLevelJoints[i] + "'");
    }
  }
  return idx;
}

Eigen::VectorXd SelectHighLevelJoints(const std::array<int, 15>& indices,
                                      const JointVector& q) {
  Eigen::VectorXd out(15);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= q.size()) {
      throw Error("high-level joint index out of range");
    }
    out[static_cast<Eigen::Index>(i)] = q[indices[i]];
  }
  return out;
}

Eigen::VectorXd HighLevelProprio(std::span<const Eigen::VectorXd> frames) {
  if (frames.size() != 3) {
    throw Error("high-level proprio needs 3 frames, got " +
                std::to_string(frames.size()));
  }
  Eigen::VectorXd out(45);
  for (std::size_t i = 0; i < 3; ++i) {
    if (frames[i].size() != 15) {
      throw Error("high-level proprio frame " + std::to_string(i) + " has " +
                  std::to_string(frames[i].size()) + " values, expected 15");
    }
    out.segment<15>(static_cast<Eigen::Index>(15 * i)) = frames[i];
  }
  return out;
}

std::vector<std::string> CommandColumnNames(const KinematicModel& model,
                                            const OffsetSet& offsets) {
  std::vector<std::string> names;
  for (int k : offsets.offsets) {
    const std::string p =
        "cmd.k" + std::string(k >= 0 ? "+" : "") + std::to_string(k) + ".";
    for (const char* c : {"x", "y", "z"}) names.push_back(p + "dp." + c);
    for (const char* c : {"w", "x", "y", "z"}) names.push_back(p + "dq." + c);
    names.push_back(p + "h");
    for (const char* c : {"x", "y", "z"}) names.push_back(p + "g." + c);
    for (int j = 0; j < model.dof(); ++j) names.push_back(p + "q." + model.dof_name(j));
  }
  return names;
}

std::vector<std::string> ProprioColumnNames(const KinematicModel& model,
                                            int history_length) {
  std::vector<std::string> names = {"prop.h", "prop.g.x", "prop.g.y", "prop.g.z"};
  auto slot = [&](int i) {
    const int back = history_length - 1 - i;
    return back == 0 ? std::string("t") : "t-" + std::to_string(back);
  };
  for (int i = 0; i < history_length; ++i) {
    for (const char* c : {"x", "y", "z"}) {
      names.push_back("prop.omega." + slot(i) + "." + c);
    }
  }
  for (const char* block : {"q", "qd", "a"}) {
    for (int i = 0; i < history_length; ++i) {
      for (int j = 0; j < model.dof(); ++j) {
        names.push_back(std::string("prop.") + block + "." + slot(i) + "." +
                        model.dof_name(j));
      }
    }
  }
  return names;
}

}  // namespace keyret
