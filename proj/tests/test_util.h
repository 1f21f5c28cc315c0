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

// Shared helpers for the keyret tests: fixture paths and hand-rolled random
// generators driven by a fixed-seed std::mt19937_64.

#ifndef KEYRET_TESTS_TEST_UTIL_H_
#define KEYRET_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "keyret/action_codec.h"
#include "keyret/geometry.h"
#include "keyret/kinematics.h"
#include "keyret/skr.h"

namespace keyret::testing {

inline std::string ModelPath(const std::string& name) {
  return std::string(KEYRET_MODELS_DIR) + "/" + name + ".json";
}

inline std::string DataPath(const std::string& name) {
  return std::string(KEYRET_TEST_DATA_DIR) + "/" + name;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double Normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int Int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vec3 Vector(double scale = 1.0) {
    return {Uniform(-scale, scale), Uniform(-scale, scale), Uniform(-scale, scale)};
  }

  // Uniform on SO(3): normalized 4D Gaussian.
  Quat Rotation() {
    Quat q{Normal(), Normal(), Normal(), Normal()};
    return q.Normalized();
  }

  Pose RigidTransform(double scale = 1.0) { return {Vector(scale), Rotation()}; }

  // Uniform in [center + fraction * (lo - center), center + fraction * (hi - center)].
  JointVector Config(const KinematicModel& model, double fraction = 1.0) {
    const JointVector& lo = model.lower_limits();
    const JointVector& hi = model.upper_limits();
    const JointVector& c = model.default_posture();
    JointVector q(model.dof());
    for (int i = 0; i < model.dof(); ++i) {
      q[i] = Uniform(c[i] + fraction * (lo[i] - c[i]), c[i] + fraction * (hi[i] - c[i]));
    }
    return q;
  }

  // Smooth keypoint path: per keypoint a random base pose plus low-frequency
  // sinusoids on translation and rotation vector.
  Trajectory SmoothTrajectory(int frames, double rate = 50.0) {
    struct Wave {
      Pose base;
      Vec3 amp_t, amp_r, freq, phase;
    };
    std::array<Wave, kNumKeypoints> waves;
    for (auto& w : waves) {
      w.base = RigidTransform(1.0);
      w.amp_t = Vector(0.3);
      w.amp_r = Vector(0.8);
      w.freq = {Uniform(0.1, 1.0), Uniform(0.1, 1.0), Uniform(0.1, 1.0)};
      w.phase = Vector(std::numbers::pi);
    }
    const double g0 = Uniform(0.0, 0.08), g1 = Uniform(0.0, 0.08);
    Trajectory traj(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) {
      const double t = i / rate;
      KeypointFrame& f = traj[static_cast<std::size_t>(i)];
      f.timestamp = t;
      for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        const Wave& w = waves[k];
        Vec3 s;
        for (int a = 0; a < 3; ++a) s[a] = std::sin(2 * std::numbers::pi * w.freq[a] * t + w.phase[a]);
        f.poses[k].translation = w.base.translation + w.amp_t.cwiseProduct(s);
        f.poses[k].rotation = w.base.rotation * Quat::FromRotationVector(w.amp_r.cwiseProduct(s));
      }
      f.gripper = {g0 + 0.01 * std::sin(t), g1 + 0.01 * std::cos(t)};
    }
    return traj;
  }

  // Keypoints of a smooth whole-body motion: each joint oscillates around
  // the default posture within a quarter of its range, the root drifts
  // forward and sways.
  Trajectory FkMotion(const KinematicModel& model, double seconds, double rate) {
    const JointVector& lo = model.lower_limits();
    const JointVector& hi = model.upper_limits();
    const JointVector& c = model.default_posture();
    JointVector amp(model.dof()), freq(model.dof()), phase(model.dof());
    for (int j = 0; j < model.dof(); ++j) {
      amp[j] = 0.25 * std::min(hi[j] - c[j], c[j] - lo[j]) * Uniform(0.2, 1.0);
      freq[j] = Uniform(0.1, 0.6);
      phase[j] = Uniform(-std::numbers::pi, std::numbers::pi);
    }
    const int n = static_cast<int>(std::floor(seconds * rate + 1e-9)) + 1;
    Trajectory traj;
    RobotMotionFrame f = DefaultFrame(model);
    for (int i = 0; i < n; ++i) {
      const double t = i / rate;
      for (int j = 0; j < model.dof(); ++j) {
        f.joints[j] = c[j] + amp[j] * std::sin(2 * std::numbers::pi * freq[j] * t + phase[j]);
      }
      f.root_position = Vec3(0.1 * t, 0.03 * std::sin(1.3 * t), model.default_root_height());
      f.root_orientation = Quat::FromAxisAngle(Vec3::UnitZ(), 0.1 * std::sin(0.7 * t));
      traj.push_back(KeypointsOf(model, f, t));
    }
    return traj;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Max translation error and geodesic angle between two keypoint frames.
inline std::pair<double, double> FrameError(const KeypointFrame& a,
                                            const KeypointFrame& b) {
  double dt = 0.0, dr = 0.0;
  for (std::size_t k = 0; k < kNumKeypoints; ++k) {
    dt = std::max(dt, (a.poses[k].translation - b.poses[k].translation).norm());
    dr = std::max(dr, RotationAngle(a.poses[k].rotation, b.poses[k].rotation));
  }
  return {dt, dr};
}

}  // namespace keyret::testing

#endif  // KEYRET_TESTS_TEST_UTIL_H_
