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

// Joint-space tracking: residual action decoding, PD torques, a decoupled
// second-order joint plant and the receding-horizon episode loop that ties
// chunk decoding, retargeting, resampling and tracking together.

#ifndef KEYRET_CONTROLLER_H_
#define KEYRET_CONTROLLER_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "keyret/action_codec.h"
#include "keyret/kinematics.h"
#include "keyret/motion_ref.h"
#include "keyret/skr.h"

namespace keyret {

struct ControllerConfig {
  JointVector q0;
  JointVector scale;
  JointVector kp;
  JointVector kd;
  double a_max = 10.0;
  double control_rate = kControlRate;

  // Same gains and scale on every joint, q0 = model default posture.
  static ControllerConfig Uniform(const KinematicModel& model, double kp = 100.0,
                                  double kd = 10.0, double scale = 0.5,
                                  double a_max = 10.0);
  // Throws on length mismatch or out-of-range values.
  void Validate(int dof) const;
};

// q0 + scale .* clip(a, -a_max, a_max).
JointVector DecodeAction(const JointVector& a, const ControllerConfig& cfg);
// Saturated inverse of DecodeAction: clip((q_ref - q0) ./ scale).
JointVector ResidualFor(const JointVector& q_ref, const ControllerConfig& cfg);
// kp .* (q_des - q) - kd .* qd.
JointVector PdTorque(const JointVector& q_des, const JointVector& q,
                     const JointVector& qd, const ControllerConfig& cfg);

struct PlantParams {
  JointVector inertia;
  JointVector damping;
  double min_rate = 500.0;

  static PlantParams Uniform(int dof, double inertia = 1.0, double damping = 0.5);
  void Validate(int dof) const;
};

struct PlantState {
  JointVector q;
  JointVector qd;
};

// Semi-implicit Euler with constant torque, split into substeps so the
// integration rate is at least params.min_rate.
PlantState PlantStep(const PlantState& state, const PlantParams& params,
                     const JointVector& tau, double dt);

// One control period: q_des is held while the PD law is re-evaluated at every
// plant substep. Returns the torque of the first substep.
JointVector TrackStep(PlantState& state, const JointVector& q_des,
                      const ControllerConfig& cfg, const PlantParams& params,
                      double dt);

// Controller and plant settings as one JSON document (format controller-v1).
// Every per-joint field takes a number (same on all joints) or a dof-long
// array; missing fields keep the ControllerConfig::Uniform and
// PlantParams::Uniform defaults. q0 defaults to the model default posture.
struct TrackingConfig {
  ControllerConfig controller;
  PlantParams plant;
};

TrackingConfig DefaultTrackingConfig(const KinematicModel& model);
TrackingConfig ParseTrackingConfig(std::string_view json_text,
                                   const KinematicModel& model);
std::string SerializeTrackingConfig(const TrackingConfig& cfg);

// Keypoint chunk handed to the tracking stack: the anchor frame plus a
// normalized action chunk whose steps are 1 / rate apart.
struct SourceChunk {
  KeypointFrame anchor;
  ActionChunk action;
};

// Serves chunks from a keypoint trajectory sampled at `rate`. Frames past the
// end repeat the last one.
class PolicySource {
 public:
  PolicySource(Trajectory trajectory, double rate,
               int horizon = kDefaultHorizon);

  double rate() const { return rate_; }
  int horizon() const { return horizon_; }
  const Trajectory& trajectory() const { return trajectory_; }
  const NormalizationStats& stats() const { return stats_; }

  // Chunk anchored at the frame nearest to `time`.
  SourceChunk ChunkAt(double time) const;

 private:
  Trajectory trajectory_;
  double rate_;
  int horizon_;
  NormalizationStats stats_;
};

// Keypoints of `frame` repeated at `rate` for `duration` seconds.
Trajectory SyntheticStatic(const KinematicModel& model,
                           const RobotMotionFrame& frame, double rate,
                           double duration);
// Keypoints of `frame` with one joint moving as amplitude * sin(2 pi f t).
Trajectory SyntheticSine(const KinematicModel& model,
                         const RobotMotionFrame& frame, int joint,
                         double amplitude, double frequency, double rate,
                         double duration);
// Adds zero-mean Gaussian noise to every keypoint translation.
void AddTranslationNoise(Trajectory& trajectory, double stddev,
                         std::uint64_t seed);

struct EpisodeOptions {
  double duration = 10.0;
  double rate_hl = 10.0;
  double rate_ll = kControlRate;
  int history_length = 4;
  OffsetSet offsets;
  // Run chunk production on its own thread against the reference buffer.
  bool threaded = false;
  bool record_observations = false;
};

struct TickRecord {
  double time = 0.0;
  int chunk = 0;
  JointVector q_ref;
  JointVector action;
  JointVector q_des;
  // Plant state at the start of the tick.
  JointVector q;
  JointVector qd;
  JointVector tau;
  double tracking_error = 0.0;
};

struct EpisodeSummary {
  int ticks = 0;
  int chunks = 0;
  double max_tracking_error = 0.0;
  double mean_tracking_error = 0.0;
  double max_seam_dq_des = 0.0;
  double max_intra_chunk_dq_des = 0.0;
  int ik_solves = 0;
  int ik_converged = 0;
  double ik_convergence_rate = 0.0;
};

struct EpisodeLog {
  std::vector<TickRecord> ticks;
  // [command, proprio] per tick when requested.
  std::vector<Eigen::VectorXd> observations;
  EpisodeSummary summary;
};

EpisodeLog RunEpisode(const PolicySource& source, const KinematicModel& model,
                      const SkrConfig& skr, const ControllerConfig& controller,
                      const PlantParams& plant, const EpisodeOptions& options);

std::string EpisodeCsv(const EpisodeLog& log, const KinematicModel& model);
std::string ObservationCsv(const EpisodeLog& log, const KinematicModel& model,
                           const EpisodeOptions& options);
std::string SummaryJson(const EpisodeSummary& summary);

}  // namespace keyret

#endif  // KEYRET_CONTROLLER_H_
