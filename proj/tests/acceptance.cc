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

// Acceptance checks. Prints one [PASS] / [FAIL] line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "keyret/action_codec.h"
#include "keyret/controller.h"
#include "keyret/geometry.h"
#include "keyret/kinematics.h"
#include "keyret/motion_ref.h"
#include "keyret/skr.h"
#include "test_util.h"

namespace keyret {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Relative chunks reproduce the source frames through the inverse map.
Outcome RoundTrip() {
  const auto start = Clock::now();
  testing::Gen gen(1001);
  double max_t = 0.0, max_r = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Trajectory traj = gen.SmoothTrajectory(96);
    for (std::size_t t = 0; t + 48 < traj.size(); ++t) {
      const Trajectory back = AbsoluteFromChunk(RelativeChunkAt(traj, t, 48), traj[t]);
      for (std::size_t j = 0; j < back.size(); ++j) {
        const auto [dt, dr] = testing::FrameError(back[j], traj[t + 1 + j]);
        max_t = std::max(max_t, dt);
        max_r = std::max(max_r, dr);
      }
    }
  }
  const double secs = Seconds(start);
  return {max_t < 1e-9 && max_r < 1e-9 && secs < 5.0,
          Fmt("max translation err %.3g m (< 1e-9), rotation err %.3g rad (< 1e-9), %.2f s (< 5 s)",
              max_t, max_r, secs)};
}

Outcome WorldFrameInvariance() {
  testing::Gen gen(1002);
  double max_diff = 0.0;
  bool bitwise = true;
  for (int n = 0; n < 20; ++n) {
    const Trajectory traj = gen.SmoothTrajectory(60);
    const Pose g = gen.RigidTransform(10.0);
    Trajectory moved = traj;
    for (auto& f : moved) {
      for (auto& p : f.poses) p = g * p;
    }
    for (std::size_t t : {0u, 5u, 11u}) {
      const RelativeChunk a = RelativeChunkAt(traj, t, 48);
      const RelativeChunk b = RelativeChunkAt(moved, t, 48);
      for (std::size_t j = 0; j < a.size(); ++j) {
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
          const double d = (a[j].poses[k].translation - b[j].poses[k].translation).cwiseAbs().maxCoeff();
          bitwise = bitwise && d == 0.0;
          max_diff = std::max({max_diff, d,
                               RotationAngle(a[j].poses[k].rotation, b[j].poses[k].rotation)});
        }
      }
    }
  }
  return {max_diff < 1e-12,
          Fmt("max chunk difference %.3g (< 1e-12), bitwise identical: %s", max_diff,
              bitwise ? "yes" : "no")};
}

Outcome Rot6dContract() {
  testing::Gen gen(1003);
  double max_frob = 0.0, max_orth = 0.0, min_det = 1.0;
  for (int n = 0; n < 10000; ++n) {
    const Mat3 r = QuatToMatrix(gen.Rotation());
    const Rot6D v = Rot6dEncode(r);
    const Mat3 d = Rot6dDecode(v);
    max_frob = std::max(max_frob, (d - r).norm());
    Rot6D noisy = v;
    for (int i = 0; i < 6; ++i) noisy[i] += gen.Uniform(-0.05, 0.05);
    for (const Mat3& m : {d, Rot6dDecode(noisy)}) {
      max_orth = std::max(max_orth, (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff());
      min_det = std::min(min_det, m.determinant());
    }
  }
  return {max_frob < 1e-9 && max_orth < 1e-10 && min_det > 0.0,
          Fmt("Frobenius err %.3g (< 1e-9), orthonormality err %.3g (< 1e-10), min det %.12f (> 0)",
              max_frob, max_orth, min_det)};
}

// Human-like frame: pelvis 0.6-1.2 m up, feet near the ground.
KeypointFrame StandingFrame(testing::Gen& gen) {
  KeypointFrame f;
  for (auto& p : f.poses) p = gen.RigidTransform(2.0);
  f[Keypoint::kPelvis].translation.z() = gen.Uniform(0.6, 1.2);
  f[Keypoint::kLeftFoot].translation.z() = gen.Uniform(-0.1, 0.3);
  f[Keypoint::kRightFoot].translation.z() = gen.Uniform(-0.1, 0.3);
  f.gripper = {gen.Uniform(0, 0.1), gen.Uniform(0, 0.1)};
  return f;
}

struct ScaleCheck {
  bool exact = true;
  double max_rel = 0.0;
};

ScaleCheck CheckScaling(testing::Gen& gen, bool standing) {
  ScaleCheck out;
  for (int n = 0; n < 10000; ++n) {
    KeypointFrame f;
    if (standing) {
      f = StandingFrame(gen);
    } else {
      for (auto& p : f.poses) p = gen.RigidTransform(2.0);
      f.gripper = {gen.Uniform(0, 0.1), gen.Uniform(0, 0.1)};
    }
    const double s = gen.Uniform(0.2, 3.0);
    const KeypointFrame o = ScaleKeypoints(f, s);
    for (Keypoint k : kAllKeypoints) {
      out.exact = out.exact && o[k].translation.x() == f[k].translation.x() &&
                  o[k].translation.y() == f[k].translation.y() &&
                  o[k].rotation.ToWxyz() == f[k].rotation.ToWxyz();
    }
    for (Keypoint k : {Keypoint::kPelvis, Keypoint::kLeftTcp, Keypoint::kRightTcp}) {
      out.exact = out.exact && o[k].translation == f[k].translation;
    }
    out.exact = out.exact && o.gripper == f.gripper;
    const double pz = f[Keypoint::kPelvis].translation.z();
    for (Keypoint k : {Keypoint::kLeftFoot, Keypoint::kRightFoot}) {
      const double want = s * (f[k].translation.z() - pz);
      const double got = o[k].translation.z() - pz;
      if (want != 0.0) out.max_rel = std::max(out.max_rel, std::abs(got - want) / std::abs(want));
    }
  }
  return out;
}

Outcome MetricPreservation() {
  testing::Gen gen(1004);
  const ScaleCheck c = CheckScaling(gen, true);
  return {c.exact && c.max_rel < 1e-12,
          Fmt("unchanged components exact: %s, pelvis-foot z scale rel err %.3g (< 1e-12)",
              c.exact ? "yes" : "no", c.max_rel)};
}

// Success rate of Retarget on FK-generated targets with joints drawn from
// `fraction` of the range around the default posture.
struct IkTrial {
  int converged = 0;
  bool in_limits = true;
  double seconds = 0.0;
};

IkTrial IkTrials(const KinematicModel& model, double fraction, std::uint64_t seed) {
  const auto start = Clock::now();
  testing::Gen gen(seed);
  const SkrConfig cfg;
  IkTrial out;
  for (int n = 0; n < 100; ++n) {
    RobotMotionFrame truth = DefaultFrame(model);
    truth.joints = gen.Config(model, fraction);
    truth.root_position += gen.Vector(0.2);
    truth.root_orientation = Quat::FromRotationVector(gen.Vector(0.3));
    const RetargetResult r = Retarget(model, KeypointsOf(model, truth), DefaultFrame(model), cfg);
    out.in_limits = out.in_limits && model.WithinLimits(r.frame.joints);
    if (r.report.iterations <= 200 && r.report.max_position_error() < 1e-3 &&
        r.report.max_orientation_error() < 1e-2) {
      ++out.converged;
    }
  }
  out.seconds = Seconds(start);
  return out;
}

Outcome IkOracle(const KinematicModel& model) {
  const IkTrial t = IkTrials(model, 0.5, 1005);
  return {t.converged >= 90 && t.in_limits && t.seconds < 60.0,
          Fmt("%d/100 converged (>= 90), joints within limits: %s, %.2f s (< 60 s)",
              t.converged, t.in_limits ? "yes" : "no", t.seconds)};
}

Outcome JacobianCheck() {
  testing::Gen gen(1006);
  std::string detail;
  bool pass = true;
  for (const std::string name : {"planar3", "biped29"}) {
    const KinematicModel model = LoadModel(testing::ModelPath(name));
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
      const JointVector q = gen.Config(model);
      const Pose root = gen.RigidTransform();
      const FkResult fk = ForwardKinematics(model, q, root);
      for (Keypoint k : kAllKeypoints) {
        const Jacobian a = KeypointJacobian(model, fk, k);
        for (int i = 0; i < model.dof(); ++i) {
          JointVector qp = q, qm = q;
          qp[i] += 1e-6;
          qm[i] -= 1e-6;
          const Pose p = ForwardKinematics(model, qp, root).keypoints[Index(k)];
          const Pose m = ForwardKinematics(model, qm, root).keypoints[Index(k)];
          Eigen::Matrix<double, 6, 1> col;
          col.head<3>() = (p.translation - m.translation) / 2e-6;
          col.tail<3>() = LogMap(QuatToMatrix(p.rotation) * QuatToMatrix(m.rotation).transpose()) / 2e-6;
          worst = std::max(worst, (a.col(i) - col).cwiseAbs().maxCoeff());
        }
      }
    }
    pass = pass && worst < 1e-6;
    detail += Fmt("%s max-abs %.3g; ", name.c_str(), worst);
  }
  return {pass, detail + "(< 1e-6)"};
}

Outcome ResamplingContract() {
  RobotMotionFrame a, b;
  a.joints = JointVector::Zero(29);
  b.joints = JointVector::Constant(29, 0.5);
  b.root_position = Vec3(0.2, -0.1, 0.05);
  b.root_orientation = Quat::FromAxisAngle(Vec3(0.3, -0.2, 1.0), std::numbers::pi / 2);
  const std::vector<RobotMotionFrame> out = Resample(MotionChunk{{a, b}, 10.0}, 50.0);
  double endpoint = std::max((out.front().Flatten() - a.Flatten()).cwiseAbs().maxCoeff(),
                             (out.back().Flatten() - b.Flatten()).cwiseAbs().maxCoeff());
  double ramp = 0.0, unit = 0.0, spacing = 0.0;
  const double total = RotationAngle(a.root_orientation, b.root_orientation);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = static_cast<double>(i) / 5.0;
    ramp = std::max(ramp, (out[i].joints - JointVector::Constant(29, 0.5 * u)).cwiseAbs().maxCoeff());
    unit = std::max(unit, std::abs(out[i].root_orientation.Norm() - 1.0));
    spacing = std::max(spacing, std::abs(RotationAngle(a.root_orientation, out[i].root_orientation) - u * total));
  }
  const bool pass = out.size() == 6 && endpoint <= 1e-12 && ramp <= 1e-12 && unit <= 1e-12 &&
                    spacing < 1e-9;
  return {pass, Fmt("%zu frames (6), endpoint err %.3g, ramp err %.3g, |q|-1 %.3g (all <= 1e-12), "
                    "angle spacing err %.3g (< 1e-9)",
                    out.size(), endpoint, ramp, unit, spacing)};
}

Outcome ObservationDims(const KinematicModel& model) {
  ReferenceBuffer buf;
  buf.Append(DefaultFrame(model));
  RobotState s;
  s.root_position = DefaultFrame(model).root_position;
  s.joints = s.joint_velocities = s.previous_action = JointVector::Zero(model.dof());
  const long cmd = AssembleCommand(buf, s).size();
  ProprioHistory h(4);
  h.Push(s);
  const long prop = AssembleProprio(h).size();
  const auto idx = HighLevelJointIndices(model);
  const Eigen::VectorXd hl = SelectHighLevelJoints(idx, s.joints);
  const std::vector<Eigen::VectorXd> frames(3, hl);
  const long high = HighLevelProprio(frames).size();
  const long want_cmd = 11 * (11 + model.dof());
  const long want_prop = 4 + 4 * (3 + 3 * model.dof());
  return {cmd == 440 && cmd == want_cmd && prop == 364 && prop == want_prop && high == 45,
          Fmt("command %ld (440), proprio %ld (364), high-level %ld (45)", cmd, prop, high)};
}

EpisodeLog Episode(const KinematicModel& model, const Trajectory& traj, double kp,
                   double duration) {
  const PolicySource src(traj, 50.0);
  EpisodeOptions opt;
  opt.duration = duration;
  opt.rate_hl = 10.0;
  return RunEpisode(src, model, SkrConfig{}, ControllerConfig::Uniform(model, kp),
                    PlantParams::Uniform(model.dof()), opt);
}

// Tracking error amplitude after the first second.
double Amplitude(const EpisodeLog& log) {
  double a = 0.0;
  for (const auto& r : log.ticks) {
    if (r.time >= 1.0) a = std::max(a, r.tracking_error);
  }
  return a;
}

Outcome ClosedLoop(const KinematicModel& model) {
  const auto start = Clock::now();
  const RobotMotionFrame home = DefaultFrame(model);
  const EpisodeLog still = Episode(model, SyntheticStatic(model, home, 50.0, 10.0), 100.0, 10.0);
  const double static_secs = Seconds(start);

  const int joint = model.DofIndex("left_hip_pitch_joint");
  const Trajectory sine = SyntheticSine(model, home, joint, 0.2, 0.5, 50.0, 10.0);
  std::vector<double> amps;
  for (double kp : {100.0, 200.0, 400.0, 800.0}) amps.push_back(Amplitude(Episode(model, sine, kp, 10.0)));
  bool decreasing = true;
  for (std::size_t i = 1; i < amps.size(); ++i) decreasing = decreasing && amps[i] < amps[i - 1];

  Trajectory noisy_a = sine, noisy_b = sine;
  AddTranslationNoise(noisy_a, 1e-4, 7);
  AddTranslationNoise(noisy_b, 1e-4, 7);
  const EpisodeLog la = Episode(model, noisy_a, 100.0, 10.0);
  const EpisodeLog lb = Episode(model, noisy_b, 100.0, 10.0);
  const bool same = EpisodeCsv(la, model) == EpisodeCsv(lb, model) &&
                    SummaryJson(la.summary) == SummaryJson(lb.summary);

  const bool pass = still.summary.max_tracking_error < 1e-3 && decreasing && same &&
                    static_secs < 30.0 && still.summary.ticks == 500;
  return {pass, Fmt("static max err %.3g rad (< 1e-3), sine amplitude Kp 100/200/400/800: "
                    "%.4g/%.4g/%.4g/%.4g (strictly decreasing: %s), same seed identical: %s, "
                    "10 s episode %.2f s (< 30 s)",
                    still.summary.max_tracking_error, amps[0], amps[1], amps[2], amps[3],
                    decreasing ? "yes" : "no", same ? "yes" : "no", static_secs)};
}

Outcome SeamContinuity(const KinematicModel& model) {
  testing::Gen gen(1010);
  const Trajectory demo = gen.FkMotion(model, 10.0, 50.0);
  const EpisodeLog log = Episode(model, demo, 100.0, 10.0);
  const EpisodeSummary& s = log.summary;
  return {s.max_seam_dq_des <= s.max_intra_chunk_dq_des && s.chunks == 100,
          Fmt("%d handovers, max seam |dq_des| %.6g %s max intra-chunk |dq_des| %.6g, "
              "IK convergence %.3f",
              s.chunks - 1, s.max_seam_dq_des,
              s.max_seam_dq_des <= s.max_intra_chunk_dq_des ? "<=" : ">",
              s.max_intra_chunk_dq_des, s.ik_convergence_rate)};
}

// Same episode: distance between the chunked reference and one warm-started
// pass over the whole demo, and where |dq_des| peaks.
std::string SeamDiagnostic(const KinematicModel& model) {
  testing::Gen gen(1010);
  const Trajectory demo = gen.FkMotion(model, 10.0, 50.0);
  const EpisodeLog log = Episode(model, demo, 100.0, 10.0);
  const std::vector<RobotMotionFrame> whole =
      RetargetStream(model, demo, DefaultFrame(model), SkrConfig{});
  double diff = 0.0, peak = 0.0;
  std::size_t at = 0;
  for (std::size_t t = 0; t < log.ticks.size(); ++t) {
    diff = std::max(diff, (log.ticks[t].q_ref - whole[t].joints).cwiseAbs().maxCoeff());
    if (t == 0) continue;
    const double d = (log.ticks[t].q_des - log.ticks[t - 1].q_des).cwiseAbs().maxCoeff();
    if (d > peak) {
      peak = d;
      at = t;
    }
  }
  return Fmt("chunked vs unchunked reference max diff %.3g rad; peak |dq_des| %.6g at tick %zu "
             "(seam tick: %s)",
             diff, peak, at, at % 5 == 0 ? "yes" : "no");
}

}  // namespace
}  // namespace keyret

int main() {
  using namespace keyret;
  const KinematicModel biped = LoadModel(testing::ModelPath("biped29"));
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "relative/absolute chunk round trip", RoundTrip},
      {"AC2", "world-frame invariance", WorldFrameInvariance},
      {"AC3", "6D rotation contract", Rot6dContract},
      {"AC4", "SKR metric preservation", MetricPreservation},
      {"AC5", "IK oracle on biped29", [&] { return IkOracle(biped); }},
      {"AC6", "analytic vs finite-difference Jacobians", JacobianCheck},
      {"AC7", "resampling contract", ResamplingContract},
      {"AC8", "observation dimensions", [&] { return ObservationDims(biped); }},
      {"AC9", "closed-loop episode", [&] { return ClosedLoop(biped); }},
      {"AC10", "receding-horizon seam continuity", [&] { return SeamContinuity(biped); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %-4s %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  // Informational: joints drawn from the full range instead of half of it.
  const IkTrial full = IkTrials(biped, 1.0, 1005);
  std::printf("[INFO] AC5  full-range sampling: %d/100 converged\n", full.converged);
  testing::Gen gen(1004);
  std::printf("[INFO] AC4  uniform random geometry: rel err %.3g\n",
              CheckScaling(gen, false).max_rel);
  std::printf("[INFO] AC10 %s\n", SeamDiagnostic(biped).c_str());
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
