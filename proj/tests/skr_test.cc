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

#include <cmath>

#include <gtest/gtest.h>

#include "keyret/error.h"
#include "test_util.h"

namespace keyret {
namespace {

class SkrTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    model_ = new KinematicModel(LoadModel(testing::ModelPath("biped29")));
  }
  static void TearDownTestSuite() { delete model_; }

  // Random in-limit configuration with a random floating root.
  RobotMotionFrame RandomFrame(testing::Gen& gen, double fraction) {
    RobotMotionFrame f = DefaultFrame(*model_);
    f.joints = gen.Config(*model_, fraction);
    f.root_position += gen.Vector(0.3);
    f.root_orientation = Quat::FromRotationVector(gen.Vector(0.3));
    return f;
  }

  static KinematicModel* model_;
};

KinematicModel* SkrTest::model_ = nullptr;

TEST(ScaleKeypointsTest, OnlyFootHeightsChange) {
  testing::Gen gen(41);
  for (int n = 0; n < 100; ++n) {
    KeypointFrame f;
    for (auto& p : f.poses) p = gen.RigidTransform();
    f.gripper = {gen.Uniform(0, 0.1), gen.Uniform(0, 0.1)};
    const double s = gen.Uniform(0.3, 2.0);
    const KeypointFrame out = ScaleKeypoints(f, s);
    for (Keypoint k : kAllKeypoints) {
      EXPECT_EQ(out[k].translation.x(), f[k].translation.x());
      EXPECT_EQ(out[k].translation.y(), f[k].translation.y());
      EXPECT_EQ(out[k].rotation.w, f[k].rotation.w);
      EXPECT_EQ(out[k].rotation.x, f[k].rotation.x);
    }
    for (Keypoint k : {Keypoint::kPelvis, Keypoint::kLeftTcp, Keypoint::kRightTcp}) {
      EXPECT_EQ(out[k].translation, f[k].translation);
    }
    EXPECT_EQ(out.gripper, f.gripper);
    const double pz = f[Keypoint::kPelvis].translation.z();
    for (Keypoint k : {Keypoint::kLeftFoot, Keypoint::kRightFoot}) {
      const double before = f[k].translation.z() - pz;
      const double after = out[k].translation.z() - pz;
      EXPECT_LT(std::abs(after - s * before), 1e-12 * std::max(1.0, std::abs(s * before)));
    }
  }
}

TEST(ScaleKeypointsTest, HeightScaleFromCalibration) {
  EXPECT_DOUBLE_EQ(HeightScaleFromCalibration(0.793, 1.0), 0.793);
  EXPECT_THROW(HeightScaleFromCalibration(0.8, 0.0), Error);
}

TEST_F(SkrTest, ConvergesOnReachableTargets) {
  testing::Gen gen(42);
  SkrConfig cfg;
  int converged = 0;
  for (int n = 0; n < 20; ++n) {
    const RobotMotionFrame truth = RandomFrame(gen, 0.5);
    const KeypointFrame targets = KeypointsOf(*model_, truth);
    const RetargetResult r = Retarget(*model_, targets, DefaultFrame(*model_), cfg);
    EXPECT_TRUE(model_->WithinLimits(r.frame.joints));
    EXPECT_NEAR(r.frame.root_orientation.Norm(), 1.0, 1e-12);
    if (r.report.converged) {
      ++converged;
      EXPECT_LT(r.report.max_position_error(), 1e-3);
      EXPECT_LT(r.report.max_orientation_error(), 1e-2);
    }
  }
  EXPECT_GE(converged, 18);
}

TEST_F(SkrTest, SeedAtSolutionReturnsImmediately) {
  const RobotMotionFrame f = DefaultFrame(*model_);
  const RetargetResult r = Retarget(*model_, KeypointsOf(*model_, f), f, SkrConfig{});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 0);
  EXPECT_EQ(r.frame.joints, f.joints);
}

TEST_F(SkrTest, UnreachableTargetReportsNotThrows) {
  KeypointFrame targets = KeypointsOf(*model_, DefaultFrame(*model_));
  targets.poses[Index(Keypoint::kLeftTcp)].translation += Vec3(3.0, 0, 0);
  const RetargetResult r = Retarget(*model_, targets, DefaultFrame(*model_), SkrConfig{});
  EXPECT_FALSE(r.report.converged);
  EXPECT_TRUE(model_->WithinLimits(r.frame.joints));
}

TEST_F(SkrTest, NonFiniteTargetThrows) {
  KeypointFrame targets = KeypointsOf(*model_, DefaultFrame(*model_));
  targets.poses[0].translation.x() = std::nan("");
  EXPECT_THROW(Retarget(*model_, targets, DefaultFrame(*model_), SkrConfig{}), Error);
}

TEST_F(SkrTest, StreamWarmStartsAndNamesFrames) {
  testing::Gen gen(43);
  std::vector<KeypointFrame> targets;
  RobotMotionFrame f = DefaultFrame(*model_);
  for (int i = 0; i < 10; ++i) {
    f.joints[3] = 0.2 + 0.02 * i;
    targets.push_back(KeypointsOf(*model_, f, 0.02 * i));
  }
  std::vector<IkReport> reports;
  const auto out = RetargetStream(*model_, targets, DefaultFrame(*model_), SkrConfig{}, &reports);
  ASSERT_EQ(out.size(), targets.size());
  ASSERT_EQ(reports.size(), targets.size());
  for (const auto& r : reports) EXPECT_TRUE(r.converged);
  // Warm start: later frames need only a couple of iterations.
  EXPECT_LE(reports.back().iterations, 10);
  targets[6].poses[2].translation.z() = std::nan("");
  try {
    RetargetStream(*model_, targets, DefaultFrame(*model_), SkrConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("frame 6: ", 0), 0u) << e.what();
  }
}

TEST(SkrConfigTest, JsonRoundTripAndValidation) {
  SkrConfig cfg;
  cfg.height_scale = 0.75;
  cfg.weights[Index(Keypoint::kRightFoot)] = {2.0, 0.25};
  cfg.ik.damping = 1e-2;
  const SkrConfig back = ParseSkrConfig(SerializeSkrConfig(cfg));
  EXPECT_EQ(back.height_scale, 0.75);
  EXPECT_EQ(back.weights[Index(Keypoint::kRightFoot)].position, 2.0);
  EXPECT_EQ(back.weights[Index(Keypoint::kRightFoot)].orientation, 0.25);
  EXPECT_EQ(back.ik.damping, 1e-2);
  EXPECT_THROW(ParseSkrConfig(R"({"height_scale": -1})"), Error);
  EXPECT_THROW(ParseSkrConfig(R"({"format_version": "skr-config-v0"})"), Error);
  EXPECT_THROW(ParseSkrConfig(R"({"weights": {"nose": {"position": 1}}})"), Error);
}

TEST(MotionFrameTest, FlattenRoundTrip) {
  RobotMotionFrame f;
  f.root_position = Vec3(1, 2, 3);
  f.root_orientation = Quat::FromAxisAngle(Vec3::UnitY(), 0.3);
  f.joints = JointVector::LinSpaced(29, -1, 1);
  const Eigen::VectorXd v = f.Flatten();
  EXPECT_EQ(v.size(), 36);
  EXPECT_EQ(RobotMotionFrame::Unflatten(v).Flatten(), v);
}

}  // namespace
}  // namespace keyret
