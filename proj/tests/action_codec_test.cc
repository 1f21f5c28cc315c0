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
#include <cmath>

#include <gtest/gtest.h>

#include "keyret/error.h"
#include "test_util.h"

namespace keyret {
namespace {

Trajectory StaticTrajectory(int frames, const KeypointFrame& f) {
  Trajectory t(static_cast<std::size_t>(frames), f);
  for (int i = 0; i < frames; ++i) t[static_cast<std::size_t>(i)].timestamp = 0.02 * i;
  return t;
}

// left_tcp moves +x by `step` per frame, everything else fixed.
Trajectory LeftTcpRamp(int frames, double step) {
  testing::Gen gen(21);
  KeypointFrame base;
  for (auto& p : base.poses) p = gen.RigidTransform();
  base.gripper = {0.03, 0.05};
  Trajectory t = StaticTrajectory(frames, base);
  for (int i = 0; i < frames; ++i) {
    Pose& p = t[static_cast<std::size_t>(i)].poses[Index(Keypoint::kLeftTcp)];
    p.rotation = Quat::Identity();
    p.translation = Vec3(0.5 + step * i, 0.1, 0.9);
  }
  return t;
}

NormalizationStats UnitStats() {
  NormalizationStats s;
  s.min.fill(-1.0);
  s.max.fill(1.0);
  return s;
}

TEST(ActionCodecTest, StaticTrajectoryGivesIdentity) {
  testing::Gen gen(22);
  KeypointFrame f;
  for (auto& p : f.poses) p = gen.RigidTransform();
  f.gripper = {0.02, 0.04};
  const Trajectory t = StaticTrajectory(60, f);
  const RelativeChunk c = RelativeChunkAt(t, 3, 48);
  ASSERT_EQ(c.size(), 48u);
  for (const auto& step : c) {
    for (const auto& p : step.poses) {
      EXPECT_LT(p.translation.norm(), 1e-15);
      EXPECT_LT(RotationAngle(p.rotation, Quat::Identity()), 1e-7);
    }
    EXPECT_EQ(step.gripper, f.gripper);
  }
}

TEST(ActionCodecTest, TranslationRampClosedForm) {
  const Trajectory t = LeftTcpRamp(60, 0.01);
  const RelativeChunk c = RelativeChunkAt(t, 5, 48);
  for (std::size_t j = 0; j < c.size(); ++j) {
    const Pose& p = c[j].poses[Index(Keypoint::kLeftTcp)];
    EXPECT_NEAR(p.translation.x(), 0.01 * static_cast<double>(j + 1), 1e-12);
    EXPECT_NEAR(p.translation.y(), 0.0, 1e-15);
    EXPECT_NEAR(p.translation.z(), 0.0, 1e-15);
    EXPECT_EQ(p.rotation.w, 1.0);
  }
}

TEST(ActionCodecTest, InsufficientFramesNamesCounts) {
  const Trajectory t = LeftTcpRamp(40, 0.01);
  try {
    RelativeChunkAt(t, 0, 48);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("49"), std::string::npos) << msg;
    EXPECT_NE(msg.find("40"), std::string::npos) << msg;
  }
  EXPECT_NO_THROW(RelativeChunkAt(t, 39 - 4, 4));
  EXPECT_THROW(RelativeChunkAt(t, 36, 4), Error);
}

TEST(ActionCodecTest, AbsoluteRoundTrip) {
  testing::Gen gen(23);
  const Trajectory t = gen.SmoothTrajectory(120);
  for (std::size_t anchor : {0u, 17u, 71u}) {
    const RelativeChunk c = RelativeChunkAt(t, anchor, 48);
    const Trajectory back = AbsoluteFromChunk(c, t[anchor], 0.02);
    for (std::size_t j = 0; j < back.size(); ++j) {
      const auto [dt, dr] = testing::FrameError(back[j], t[anchor + 1 + j]);
      EXPECT_LT(dt, 1e-9);
      EXPECT_LT(dr, 1e-9);
      EXPECT_EQ(back[j].gripper, t[anchor + 1 + j].gripper);
      EXPECT_NEAR(back[j].timestamp, t[anchor].timestamp + 0.02 * static_cast<double>(j + 1), 1e-12);
    }
  }
}

TEST(ActionCodecTest, IdentityChunkCopiesAnchor) {
  testing::Gen gen(24);
  KeypointFrame anchor;
  for (auto& p : anchor.poses) p = gen.RigidTransform();
  const RelativeChunk c(10);
  for (const auto& f : AbsoluteFromChunk(c, anchor)) {
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      EXPECT_EQ(f.poses[k].translation, anchor.poses[k].translation);
    }
  }
}

TEST(ActionCodecTest, WorldFrameInvariance) {
  testing::Gen gen(25);
  const Trajectory t = gen.SmoothTrajectory(80);
  const Pose g = gen.RigidTransform(5.0);
  Trajectory moved = t;
  for (auto& f : moved) {
    for (auto& p : f.poses) p = g * p;
  }
  const RelativeChunk a = RelativeChunkAt(t, 10, 48);
  const RelativeChunk b = RelativeChunkAt(moved, 10, 48);
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      EXPECT_LT((a[j].poses[k].translation - b[j].poses[k].translation).norm(), 1e-12);
      EXPECT_LT(RotationAngle(a[j].poses[k].rotation, b[j].poses[k].rotation), 1e-12);
    }
  }
}

TEST(ActionCodecTest, KeypointsAreDecoupled) {
  testing::Gen gen(26);
  const Trajectory t = gen.SmoothTrajectory(60);
  Trajectory changed = t;
  for (auto& f : changed) f.poses[Index(Keypoint::kRightFoot)] = gen.RigidTransform();
  const RelativeChunk a = RelativeChunkAt(t, 2, 48);
  const RelativeChunk b = RelativeChunkAt(changed, 2, 48);
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (Keypoint k : {Keypoint::kPelvis, Keypoint::kLeftTcp, Keypoint::kRightTcp,
                       Keypoint::kLeftFoot}) {
      EXPECT_EQ(a[j].poses[Index(k)].translation, b[j].poses[Index(k)].translation);
    }
  }
}

TEST(ActionCodecTest, EncodeEndpointsAndMidpoint) {
  NormalizationStats s = UnitStats();
  s.min[0] = 2.0;
  s.max[0] = 4.0;
  RelativeChunk c(3);
  c[0].poses[0].translation.x() = 2.0;
  c[1].poses[0].translation.x() = 4.0;
  c[2].poses[0].translation.x() = 3.0;
  const ActionChunk a = Encode(c, s);
  EXPECT_EQ(a.values(0, 0), -1.0);
  EXPECT_EQ(a.values(1, 0), 1.0);
  EXPECT_EQ(a.values(2, 0), 0.0);
  EXPECT_EQ(a.values.cols(), 47);
}

TEST(ActionCodecTest, LayoutColumns) {
  EXPECT_EQ(ScalarColumn(0), 0);
  EXPECT_EQ(ScalarColumn(3), 9);
  EXPECT_EQ(ScalarColumn(14), 38);
  EXPECT_EQ(ScalarColumn(15), 45);
  EXPECT_EQ(ScalarColumn(16), 46);
  const auto& names = ActionColumnNames();
  EXPECT_EQ(names[0], "pelvis.tx");
  EXPECT_EQ(names[9 + 6], "left_tcp.r01");
  EXPECT_EQ(names[46], "gripper.right");
}

TEST(ActionCodecTest, DegenerateDimensionEncodesToZero) {
  NormalizationStats s = UnitStats();
  s.min[4] = s.max[4] = 0.7;
  RelativeChunk c(2);
  c[0].poses[1].translation.y() = 0.7;
  c[1].poses[1].translation.y() = 123.0;
  const ActionChunk a = Encode(c, s);
  EXPECT_EQ(a.values(0, ScalarColumn(4)), 0.0);
  EXPECT_EQ(a.values(1, ScalarColumn(4)), 0.0);
  const RelativeChunk d = Decode(a, s);
  EXPECT_EQ(d[1].poses[1].translation.y(), 0.7);
}

TEST(ActionCodecTest, OutOfRangeClampsAndCounts) {
  const NormalizationStats s = UnitStats();
  RelativeChunk c(2);
  c[0].poses[2].translation.z() = 5.0;
  c[1].gripper[1] = -3.0;
  std::size_t clamped = 0;
  const ActionChunk a = Encode(c, s, &clamped);
  EXPECT_EQ(clamped, 2u);
  EXPECT_EQ(a.values(0, ScalarColumn(8)), 1.0);
  EXPECT_EQ(a.values(1, 46), -1.0);
}

TEST(ActionCodecTest, EncodeDecodeRoundTrip) {
  testing::Gen gen(27);
  std::vector<Trajectory> data = {gen.SmoothTrajectory(100), gen.SmoothTrajectory(70)};
  const NormalizationStats s = ComputeStats(data, 48);
  const RelativeChunk c = RelativeChunkAt(data[0], 20, 48);
  std::size_t clamped = 0;
  const ActionChunk a = Encode(c, s, &clamped);
  EXPECT_EQ(clamped, 0u);
  EXPECT_LE(a.values.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
  const RelativeChunk d = Decode(a, s);
  for (std::size_t j = 0; j < c.size(); ++j) {
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      EXPECT_LT((c[j].poses[k].translation - d[j].poses[k].translation).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((QuatToMatrix(c[j].poses[k].rotation) - QuatToMatrix(d[j].poses[k].rotation))
                    .cwiseAbs().maxCoeff(), 1e-9);
    }
    EXPECT_NEAR(c[j].gripper[0], d[j].gripper[0], 1e-12);
    EXPECT_NEAR(c[j].gripper[1], d[j].gripper[1], 1e-12);
  }
}

TEST(ActionCodecTest, DecodeZeroRowsGivesMidRange) {
  NormalizationStats s = UnitStats();
  s.min[0] = 1.0;
  s.max[0] = 3.0;
  ActionChunk a;
  a.values = ActionRows::Zero(4, 47);
  for (int k = 0; k < 5; ++k) {
    a.values.col(9 * k + 3).setOnes();
    a.values.col(9 * k + 7).setOnes();
  }
  const RelativeChunk d = Decode(a, s);
  EXPECT_EQ(d[2].poses[0].translation.x(), 2.0);
  EXPECT_EQ(d[2].poses[0].rotation.w, 1.0);
}

TEST(ActionCodecTest, NoisyRotationBlocksDecodeOrthonormal) {
  testing::Gen gen(28);
  const Trajectory t = gen.SmoothTrajectory(60);
  std::vector<Trajectory> data = {t};
  const NormalizationStats s = ComputeStats(data, 8);
  ActionChunk a = Encode(RelativeChunkAt(t, 0, 8), s);
  for (int r = 0; r < a.values.rows(); ++r) {
    for (int k = 0; k < 5; ++k) {
      for (int i = 0; i < 6; ++i) a.values(r, 9 * k + 3 + i) += gen.Uniform(-0.05, 0.05);
    }
  }
  for (const auto& step : Decode(a, s)) {
    for (const auto& p : step.poses) {
      const Mat3 r = QuatToMatrix(p.rotation);
      EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_GT(r.determinant(), 0.0);
    }
  }
}

TEST(ActionCodecTest, DegenerateRotationBlockNamesStepAndKeypoint) {
  ActionChunk a;
  a.values = ActionRows::Zero(3, 47);
  for (int k = 0; k < 5; ++k) {
    a.values.col(9 * k + 3).setOnes();
    a.values.col(9 * k + 7).setOnes();
  }
  a.values.row(2).segment<6>(9 * 3 + 3).setZero();
  try {
    Decode(a, UnitStats());
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("step 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("left_foot"), std::string::npos) << msg;
  }
}

TEST(ActionCodecTest, StatsOfStaticAndRamp) {
  testing::Gen gen(29);
  KeypointFrame f;
  for (auto& p : f.poses) p = gen.RigidTransform();
  std::vector<Trajectory> still = {StaticTrajectory(10, f)};
  const NormalizationStats s = ComputeStats(still, 4);
  for (int d = 0; d < 15; ++d) {
    EXPECT_EQ(s.min[static_cast<std::size_t>(d)], 0.0);
    EXPECT_EQ(s.max[static_cast<std::size_t>(d)], 0.0);
  }
  std::vector<Trajectory> ramp = {LeftTcpRamp(12, 0.01)};
  const NormalizationStats r = ComputeStats(ramp, 4);
  EXPECT_NEAR(r.max[3], 0.04, 1e-14);
  EXPECT_NEAR(r.min[3], 0.01, 1e-14);
}

TEST(ActionCodecTest, StatsPermutationInvariantAndErrors) {
  testing::Gen gen(30);
  std::vector<Trajectory> data = {gen.SmoothTrajectory(60), gen.SmoothTrajectory(55),
                                  gen.SmoothTrajectory(70)};
  const NormalizationStats a = ComputeStats(data, 48);
  std::reverse(data.begin(), data.end());
  const NormalizationStats b = ComputeStats(data, 48);
  EXPECT_EQ(a.min, b.min);
  EXPECT_EQ(a.max, b.max);
  EXPECT_THROW(ComputeStats(std::vector<Trajectory>{}, 48), Error);
  data.push_back(gen.SmoothTrajectory(20));
  EXPECT_THROW(ComputeStats(data, 48), Error);
}

TEST(ActionCodecTest, StatsJsonRoundTrip) {
  testing::Gen gen(31);
  NormalizationStats s;
  for (int d = 0; d < 17; ++d) {
    s.min[static_cast<std::size_t>(d)] = gen.Uniform(-1, 0);
    s.max[static_cast<std::size_t>(d)] = gen.Uniform(0, 1);
  }
  int horizon = 0;
  const NormalizationStats back = ParseStats(SerializeStats(s, 32), &horizon);
  EXPECT_EQ(horizon, 32);
  EXPECT_EQ(back.min, s.min);
  EXPECT_EQ(back.max, s.max);
  EXPECT_THROW(ParseStats(R"({"layout_version": "other", "dims": []})"), Error);
  EXPECT_THROW(ParseStats("not json"), Error);
}

}  // namespace
}  // namespace keyret
