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

#include "keyret/controller.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <random>
#include <thread>

#include "json_util.h"

#include "keyret/error.h"

namespace keyret {

namespace {

void CheckLength(const JointVector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw Error(std::string(what) + " has length " + std::to_string(v.size()) +
                ", expected " + std::to_string(n));
  }
}

// Number of whole periods of `rate` in `seconds`, tolerant to rounding.
int PeriodCount(double seconds, double rate) {
  return static_cast<int>(std::floor(seconds * rate + 1e-9));
}

int RatioOrThrow(double num, double den, const char* what) {
  const double r = num / den;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9) {
    throw Error(std::string(what) + " must be a positive integer ratio, got " +
                std::to_string(r));
  }
  return static_cast<int>(n);
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ControllerConfig ControllerConfig::Uniform(const KinematicModel& model,
                                           double kp, double kd, double scale,
                                           double a_max) {
  const int n = model.dof();
  ControllerConfig cfg;
  cfg.q0 = model.default_posture();
  cfg.scale = JointVector::Constant(n, scale);
  cfg.kp = JointVector::Constant(n, kp);
  cfg.kd = JointVector::Constant(n, kd);
  cfg.a_max = a_max;
  return cfg;
}

void ControllerConfig::Validate(int dof) const {
  CheckLength(q0, dof, "q0");
  CheckLength(scale, dof, "action scale");
  CheckLength(kp, dof, "kp");
  CheckLength(kd, dof, "kd");
  if ((kp.array() < 0.0).any() || (kd.array() < 0.0).any()) {
    throw Error("gains must be non-negative");
  }
  if (!(scale.array() > 0.0).all()) throw Error("action scale must be positive");
  if (!(a_max > 0.0)) throw Error("a_max must be positive");
  if (!(control_rate > 0.0)) throw Error("control rate must be positive");
}

JointVector DecodeAction(const JointVector& a, const ControllerConfig& cfg) {
  CheckLength(a, cfg.q0.size(), "action");
  CheckLength(cfg.scale, cfg.q0.size(), "action scale");
  return cfg.q0 + cfg.scale.cwiseProduct(a.cwiseMax(-cfg.a_max).cwiseMin(cfg.a_max));
}

JointVector ResidualFor(const JointVector& q_ref, const ControllerConfig& cfg) {
  CheckLength(q_ref, cfg.q0.size(), "reference");
  CheckLength(cfg.scale, cfg.q0.size(), "action scale");
  return (q_ref - cfg.q0).cwiseQuotient(cfg.scale).cwiseMax(-cfg.a_max).cwiseMin(cfg.a_max);
}

JointVector PdTorque(const JointVector& q_des, const JointVector& q,
                     const JointVector& qd, const ControllerConfig& cfg) {
  const Eigen::Index n = q_des.size();
  CheckLength(q, n, "q");
  CheckLength(qd, n, "qd");
  CheckLength(cfg.kp, n, "kp");
  CheckLength(cfg.kd, n, "kd");
  return cfg.kp.cwiseProduct(q_des - q) - cfg.kd.cwiseProduct(qd);
}

PlantParams PlantParams::Uniform(int dof, double inertia, double damping) {
  return {JointVector::Constant(dof, inertia), JointVector::Constant(dof, damping)};
}

void PlantParams::Validate(int dof) const {
  CheckLength(inertia, dof, "inertia");
  CheckLength(damping, dof, "damping");
  if (!(inertia.array() > 0.0).all()) throw Error("inertia must be positive");
  if ((damping.array() < 0.0).any()) throw Error("damping must be non-negative");
  if (!(min_rate > 0.0)) throw Error("plant rate must be positive");
}

namespace {

JointVector ReadPerJoint(const internal::json& doc, const char* key,
                         const JointVector& fallback) {
  if (!doc.contains(key)) return fallback;
  const internal::json& v = doc.at(key);
  if (v.is_number()) return JointVector::Constant(fallback.size(), v.get<double>());
  JointVector out = internal::ReadVector(v, key);
  if (out.size() != fallback.size()) {
    throw Error(std::string(key) + " has " + std::to_string(out.size()) +
                " entries, model has " + std::to_string(fallback.size()) + " joints");
  }
  return out;
}

}  // namespace

TrackingConfig DefaultTrackingConfig(const KinematicModel& model) {
  return {ControllerConfig::Uniform(model), PlantParams::Uniform(model.dof())};
}

TrackingConfig ParseTrackingConfig(std::string_view json_text,
                                   const KinematicModel& model) {
  internal::json doc;
  try {
    doc = internal::json::parse(json_text);
  } catch (const internal::json::exception& e) {
    throw Error(std::string("tracking config: ") + e.what());
  }
  if (!doc.is_object()) throw Error("tracking config: expected a JSON object");
  if (doc.value("format_version", "") != "controller-v1") {
    throw Error("tracking config: format_version must be controller-v1");
  }
  TrackingConfig cfg = DefaultTrackingConfig(model);
  try {
    ControllerConfig& c = cfg.controller;
    c.q0 = ReadPerJoint(doc, "q0", c.q0);
    c.scale = ReadPerJoint(doc, "scale", c.scale);
    c.kp = ReadPerJoint(doc, "kp", c.kp);
    c.kd = ReadPerJoint(doc, "kd", c.kd);
    c.a_max = doc.value("a_max", c.a_max);
    c.control_rate = doc.value("control_rate", c.control_rate);
    if (doc.contains("plant")) {
      const internal::json& p = doc.at("plant");
      cfg.plant.inertia = ReadPerJoint(p, "inertia", cfg.plant.inertia);
      cfg.plant.damping = ReadPerJoint(p, "damping", cfg.plant.damping);
      cfg.plant.min_rate = p.value("min_rate", cfg.plant.min_rate);
    }
  } catch (const internal::json::exception& e) {
    throw Error(std::string("tracking config: ") + e.what());
  }
  cfg.controller.Validate(model.dof());
  cfg.plant.Validate(model.dof());
  return cfg;
}

std::string SerializeTrackingConfig(const TrackingConfig& cfg) {
  using internal::WriteVector;
  nlohmann::ordered_json doc = {
      {"format_version", "controller-v1"},
      {"q0", WriteVector(cfg.controller.q0)},
      {"scale", WriteVector(cfg.controller.scale)},
      {"kp", WriteVector(cfg.controller.kp)},
      {"kd", WriteVector(cfg.controller.kd)},
      {"a_max", cfg.controller.a_max},
      {"control_rate", cfg.controller.control_rate},
      {"plant",
       {{"inertia", WriteVector(cfg.plant.inertia)},
        {"damping", WriteVector(cfg.plant.damping)},
        {"min_rate", cfg.plant.min_rate}}},
  };
  return doc.dump(2) + "\n";
}

PlantState PlantStep(const PlantState& state, const PlantParams& params,
                     const JointVector& tau, double dt) {
  if (!(dt > 0.0)) throw Error("plant step needs dt > 0");
  const Eigen::Index n = state.q.size();
  CheckLength(state.qd, n, "qd");
  CheckLength(tau, n, "torque");
  CheckLength(params.inertia, n, "inertia");
  CheckLength(params.damping, n, "damping");
  if (!tau.allFinite()) throw Error("non-finite torque");
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt * params.min_rate - 1e-9)));
  const double h = dt / substeps;
  PlantState s = state;
  for (int i = 0; i < substeps; ++i) {
    s.qd += h * (tau - params.damping.cwiseProduct(s.qd)).cwiseQuotient(params.inertia);
    s.q += h * s.qd;
  }
  return s;
}

JointVector TrackStep(PlantState& state, const JointVector& q_des,
                      const ControllerConfig& cfg, const PlantParams& params,
                      double dt) {
  if (!(dt > 0.0)) throw Error("control step needs dt > 0");
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt * params.min_rate - 1e-9)));
  const double h = dt / substeps;
  JointVector first;
  for (int i = 0; i < substeps; ++i) {
    const JointVector tau = PdTorque(q_des, state.q, state.qd, cfg);
    if (i == 0) first = tau;
    state = PlantStep(state, params, tau, h);
  }
  return first;
}

PolicySource::PolicySource(Trajectory trajectory, double rate, int horizon)
    : trajectory_(std::move(trajectory)), rate_(rate), horizon_(horizon) {
  if (trajectory_.empty()) throw Error("policy source needs at least one frame");
  if (!(rate_ > 0.0)) throw Error("policy source rate must be positive");
  if (horizon_ < 1) throw Error("horizon must be positive");
  // Hold the last frame so every anchor has a full horizon.
  const KeypointFrame last = trajectory_.back();
  for (int i = 1; i <= horizon_; ++i) {
    KeypointFrame f = last;
    f.timestamp = last.timestamp + i / rate_;
    trajectory_.push_back(f);
  }
  stats_ = ComputeStats(std::span<const Trajectory>(&trajectory_, 1), horizon_);
}

SourceChunk PolicySource::ChunkAt(double time) const {
  const std::size_t last_anchor = trajectory_.size() - 1 - static_cast<std::size_t>(horizon_);
  const auto idx = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(time * rate_), 0, static_cast<long long>(last_anchor)));
  SourceChunk out;
  out.anchor = trajectory_[idx];
  out.action = Encode(RelativeChunkAt(trajectory_, idx, horizon_), stats_);
  return out;
}

Trajectory SyntheticStatic(const KinematicModel& model,
                           const RobotMotionFrame& frame, double rate,
                           double duration) {
  const int n = PeriodCount(duration, rate) + 1;
  const KeypointFrame kf = KeypointsOf(model, frame);
  Trajectory traj(static_cast<std::size_t>(n), kf);
  for (int i = 0; i < n; ++i) traj[static_cast<std::size_t>(i)].timestamp = i / rate;
  return traj;
}

Trajectory SyntheticSine(const KinematicModel& model,
                         const RobotMotionFrame& frame, int joint,
                         double amplitude, double frequency, double rate,
                         double duration) {
  if (joint < 0 || joint >= model.dof()) throw Error("sine joint index out of range");
  const int n = PeriodCount(duration, rate) + 1;
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(n));
  RobotMotionFrame f = frame;
  for (int i = 0; i < n; ++i) {
    const double t = i / rate;
    f.joints[joint] = frame.joints[joint] +
                      amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
    traj.push_back(KeypointsOf(model, f, t));
  }
  return traj;
}

void AddTranslationNoise(Trajectory& trajectory, double stddev,
                         std::uint64_t seed) {
  if (stddev < 0.0) throw Error("noise stddev must be non-negative");
  if (stddev == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, stddev);
  for (auto& frame : trajectory) {
    for (auto& pose : frame.poses) {
      for (int i = 0; i < 3; ++i) pose.translation[i] += noise(rng);
    }
  }
}

namespace {

// Produces the committed reference frames of each chunk in order.
class ChunkProducer {
 public:
  ChunkProducer(const PolicySource& source, const KinematicModel& model,
                const SkrConfig& skr, const EpisodeOptions& options,
                int ticks_per_chunk)
      : source_(source),
        model_(model),
        skr_(skr),
        options_(options),
        ticks_per_chunk_(ticks_per_chunk) {
    // Chunk frames needed to cover the committed window.
    const double span = (ticks_per_chunk_ - 1) / options_.rate_ll;
    needed_ = static_cast<int>(std::ceil(span * source_.rate() - 1e-9));
    if (needed_ > source_.horizon()) {
      throw Error("chunk horizon is shorter than one high-level period");
    }
  }

  // Reference frames for ticks [c * ticks_per_chunk, (c + 1) * ticks_per_chunk).
  std::vector<RobotMotionFrame> Produce(int c) {
    const double t_c = c / options_.rate_hl;
    const SourceChunk sc = source_.ChunkAt(t_c);
    const RelativeChunk rel = Decode(sc.action, source_.stats());
    const Trajectory abs = AbsoluteFromChunk(rel, sc.anchor, 1.0 / source_.rate());

    std::vector<KeypointFrame> targets;
    targets.reserve(static_cast<std::size_t>(needed_) + 1);
    targets.push_back(ScaleKeypoints(sc.anchor, skr_.height_scale));
    for (int j = 0; j < needed_; ++j) {
      targets.push_back(ScaleKeypoints(abs[static_cast<std::size_t>(j)], skr_.height_scale));
    }
    if (c == 0) seed_ = PelvisAlignedSeed(model_, targets.front());

    std::vector<IkReport> reports;
    MotionChunk motion;
    motion.frames = RetargetStream(model_, targets, seed_, skr_, &reports);
    motion.source_rate = source_.rate();
    for (const auto& r : reports) {
      ++solves_;
      if (r.converged) ++converged_;
    }
    std::vector<RobotMotionFrame> frames = Resample(motion, options_.rate_ll);
    frames.resize(std::min<std::size_t>(frames.size(), static_cast<std::size_t>(ticks_per_chunk_)));
    if (frames.size() < static_cast<std::size_t>(ticks_per_chunk_)) {
      throw Error("resampled chunk does not cover a high-level period");
    }
    seed_ = frames.back();
    return frames;
  }

  int solves() const { return solves_; }
  int converged() const { return converged_; }

 private:
  const PolicySource& source_;
  const KinematicModel& model_;
  const SkrConfig& skr_;
  const EpisodeOptions& options_;
  int ticks_per_chunk_;
  int needed_ = 0;
  RobotMotionFrame seed_;
  int solves_ = 0;
  int converged_ = 0;
};

}  // namespace

EpisodeLog RunEpisode(const PolicySource& source, const KinematicModel& model,
                      const SkrConfig& skr, const ControllerConfig& controller,
                      const PlantParams& plant, const EpisodeOptions& options) {
  const int dof = model.dof();
  skr.Validate();
  controller.Validate(dof);
  plant.Validate(dof);
  options.offsets.Validate();
  if (!(options.duration > 0.0)) throw Error("episode duration must be positive");
  const int ticks_per_chunk = RatioOrThrow(options.rate_ll, options.rate_hl,
                                           "low-level / high-level rate");
  const int ticks = PeriodCount(options.duration, options.rate_ll);
  if (ticks < 1) throw Error("episode shorter than one control period");
  const int chunks = (ticks + ticks_per_chunk - 1) / ticks_per_chunk;
  const double dt = 1.0 / options.rate_ll;
  const std::size_t lookahead = static_cast<std::size_t>(std::max(0, options.offsets.max()));

  ChunkProducer producer(source, model, skr, options, ticks_per_chunk);
  ReferenceBuffer buffer;
  int produced = 0;
  auto produce_next = [&] {
    try {
      buffer.Append(producer.Produce(produced));
    } catch (const Error& e) {
      throw Error("tick " + std::to_string(produced * ticks_per_chunk) +
                  " (chunk " + std::to_string(produced) + "): " + e.what());
    }
    if (++produced == chunks) buffer.Close();
  };

  std::exception_ptr producer_error;
  std::atomic<bool> producer_failed{false};
  std::jthread worker;
  if (options.threaded) {
    worker = std::jthread([&](std::stop_token stop) {
      try {
        while (produced < chunks && !stop.stop_requested()) produce_next();
      } catch (...) {
        producer_error = std::current_exception();
        producer_failed = true;
        buffer.Close();
      }
    });
  }

  EpisodeLog log;
  log.ticks.reserve(static_cast<std::size_t>(ticks));
  ProprioHistory history(options.history_length);
  PlantState state;
  JointVector prev_action = JointVector::Zero(dof);
  RobotMotionFrame prev_ref;

  try {
    for (int t = 0; t < ticks; ++t) {
      const std::size_t need = static_cast<std::size_t>(t) + lookahead;
      if (options.threaded) {
        buffer.WaitAvailable(need);
        if (producer_failed) break;
      } else {
        while (produced < chunks && buffer.watermark() <= need) produce_next();
      }
      buffer.set_cursor(static_cast<std::size_t>(t));
      const RobotMotionFrame ref = buffer.At(t);
      if (t == 0) {
        state.q = ref.joints;
        state.qd = JointVector::Zero(dof);
        prev_ref = ref;
      }

      TickRecord rec;
      rec.time = t * dt;
      rec.chunk = t / ticks_per_chunk;
      rec.q_ref = ref.joints;
      rec.q = state.q;
      rec.qd = state.qd;
      rec.tracking_error = (ref.joints - state.q).cwiseAbs().maxCoeff();

      RobotState obs_state;
      obs_state.root_position = ref.root_position;
      obs_state.root_orientation = ref.root_orientation;
      obs_state.angular_velocity =
          (prev_ref.root_orientation.Conjugate() * ref.root_orientation)
              .ToRotationVector() / dt;
      obs_state.joints = state.q;
      obs_state.joint_velocities = state.qd;
      obs_state.previous_action = prev_action;
      obs_state.timestamp = rec.time;
      history.Push(obs_state);
      if (options.record_observations) {
        const Eigen::VectorXd cmd = AssembleCommand(buffer, obs_state, options.offsets);
        const Eigen::VectorXd prop = AssembleProprio(history);
        Eigen::VectorXd row(cmd.size() + prop.size());
        row << cmd, prop;
        log.observations.push_back(std::move(row));
      }

      try {
        rec.action = ResidualFor(ref.joints, controller);
        rec.q_des = DecodeAction(rec.action, controller);
        rec.tau = TrackStep(state, rec.q_des, controller, plant, dt);
      } catch (const Error& e) {
        throw Error("tick " + std::to_string(t) + ": " + e.what());
      }
      prev_action = rec.action;
      prev_ref = ref;
      log.ticks.push_back(std::move(rec));
    }
  } catch (...) {
    if (worker.joinable()) {
      worker.request_stop();
      worker.join();
    }
    throw;
  }
  if (worker.joinable()) worker.join();
  if (producer_error) std::rethrow_exception(producer_error);

  EpisodeSummary& s = log.summary;
  s.ticks = static_cast<int>(log.ticks.size());
  s.chunks = chunks;
  double sum = 0.0;
  for (std::size_t i = 0; i < log.ticks.size(); ++i) {
    const TickRecord& r = log.ticks[i];
    s.max_tracking_error = std::max(s.max_tracking_error, r.tracking_error);
    sum += r.tracking_error;
    if (i == 0) continue;
    const double d = (r.q_des - log.ticks[i - 1].q_des).cwiseAbs().maxCoeff();
    if (i % static_cast<std::size_t>(ticks_per_chunk) == 0) {
      s.max_seam_dq_des = std::max(s.max_seam_dq_des, d);
    } else {
      s.max_intra_chunk_dq_des = std::max(s.max_intra_chunk_dq_des, d);
    }
  }
  s.mean_tracking_error = sum / std::max(1, s.ticks);
  s.ik_solves = producer.solves();
  s.ik_converged = producer.converged();
  s.ik_convergence_rate =
      s.ik_solves > 0 ? static_cast<double>(s.ik_converged) / s.ik_solves : 1.0;
  return log;
}

std::string EpisodeCsv(const EpisodeLog& log, const KinematicModel& model) {
  std::string out = "t,chunk,tracking_error";
  for (const char* block : {"q_ref", "a", "q_des", "q", "qd", "tau"}) {
    for (int j = 0; j < model.dof(); ++j) {
      out += ",";
      out += block;
      out += ".";
      out += model.dof_name(j);
    }
  }
  out += "\n";
  for (const TickRecord& r : log.ticks) {
    out += Num(r.time) + "," + std::to_string(r.chunk) + "," + Num(r.tracking_error);
    for (const JointVector* v : {&r.q_ref, &r.action, &r.q_des, &r.q, &r.qd, &r.tau}) {
      for (Eigen::Index j = 0; j < v->size(); ++j) out += "," + Num((*v)[j]);
    }
    out += "\n";
  }
  return out;
}

std::string ObservationCsv(const EpisodeLog& log, const KinematicModel& model,
                           const EpisodeOptions& options) {
  std::vector<std::string> names = CommandColumnNames(model, options.offsets);
  const auto prop = ProprioColumnNames(model, options.history_length);
  names.insert(names.end(), prop.begin(), prop.end());
  std::string out = "t";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < log.observations.size(); ++i) {
    out += Num(log.ticks[i].time);
    const Eigen::VectorXd& row = log.observations[i];
    for (Eigen::Index j = 0; j < row.size(); ++j) out += "," + Num(row[j]);
    out += "\n";
  }
  return out;
}

std::string SummaryJson(const EpisodeSummary& s) {
  nlohmann::ordered_json doc = {
      {"format_version", "episode-summary-v1"},
      {"ticks", s.ticks},
      {"chunks", s.chunks},
      {"max_tracking_error", s.max_tracking_error},
      {"mean_tracking_error", s.mean_tracking_error},
      {"max_seam_dq_des", s.max_seam_dq_des},
      {"max_intra_chunk_dq_des", s.max_intra_chunk_dq_des},
      {"ik_solves", s.ik_solves},
      {"ik_converged", s.ik_converged},
      {"ik_convergence_rate", s.ik_convergence_rate},
  };
  return doc.dump(2) + "\n";
}

}  // namespace keyret
