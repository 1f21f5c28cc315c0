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

// keyret command-line tool. Exit codes: 0 success, 1 domain failure,
// 2 usage error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "keyret/action_codec.h"
#include "keyret/controller.h"
#include "keyret/error.h"
#include "keyret/formats.h"
#include "keyret/geometry.h"
#include "keyret/keypoints.h"
#include "keyret/kinematics.h"
#include "keyret/motion_ref.h"
#include "keyret/skr.h"

namespace keyret {
namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Bad command-line input detected after CLI11 parsing.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Comma- or whitespace-separated numbers.
std::vector<double> ParseNumbers(const std::string& text, const std::string& what) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(what + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

// "zero", "default" or dof numbers.
JointVector ParseJoints(const KinematicModel& model, const std::string& text,
                        const std::string& what) {
  if (text == "zero") return JointVector::Zero(model.dof());
  if (text == "default") return model.default_posture();
  const std::vector<double> v = ParseNumbers(text, what);
  if (static_cast<int>(v.size()) != model.dof()) {
    throw UsageError(what + ": expected " + std::to_string(model.dof()) +
                     " joint values, got " + std::to_string(v.size()));
  }
  return Eigen::Map<const JointVector>(v.data(), model.dof());
}

// x,y,z or x,y,z,qw,qx,qy,qz.
Pose ParsePose(const std::string& text, const std::string& what) {
  const std::vector<double> v = ParseNumbers(text, what);
  if (v.size() != 3 && v.size() != 7) {
    throw UsageError(what + ": expected 3 or 7 numbers, got " + std::to_string(v.size()));
  }
  Pose p;
  p.translation = Vec3(v[0], v[1], v[2]);
  if (v.size() == 7) {
    const Quat q(v[3], v[4], v[5], v[6]);
    if (!(q.Norm() > 0.0)) throw UsageError(what + ": zero quaternion");
    p.rotation = q.Normalized();
  }
  return p;
}

Keypoint KeypointOrUsage(const std::string& name) {
  const std::optional<Keypoint> k = KeypointFromName(name);
  if (!k) {
    std::string known;
    for (Keypoint kp : kAllKeypoints) {
      known += (known.empty() ? "" : ", ") + std::string(KeypointName(kp));
    }
    throw UsageError("unknown keypoint '" + name + "' (known: " + known + ")");
  }
  return *k;
}

// "-" writes to stdout.
void Emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
  } else {
    WriteFile(path, text);
  }
}

SkrConfig LoadSkr(const std::string& path) {
  return path.empty() ? SkrConfig{} : ParseSkrConfig(ReadFile(path));
}

double CalibratedScale(const KinematicModel& model, const DemoHeader& header,
                       std::optional<double> scale, std::optional<double> calib) {
  if (scale) return *scale;
  return HeightScaleFromCalibration(model.default_root_height(),
                                    calib ? *calib : header.calibration_pelvis_height);
}

ordered_json PoseJson(const Pose& p) {
  return {{"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
          {"rotation", {p.rotation.w, p.rotation.x, p.rotation.y, p.rotation.z}}};
}

std::string PoseText(const Pose& p) {
  return Num(p.translation.x()) + " " + Num(p.translation.y()) + " " +
         Num(p.translation.z()) + "  " + Num(p.rotation.w) + " " + Num(p.rotation.x) +
         " " + Num(p.rotation.y) + " " + Num(p.rotation.z);
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string demo;
  bool strict = false;
};

int RunValidate(const ValidateArgs& a) {
  const DemoParse parse = ParseDemonstration(ReadFile(a.demo));
  int errors = 0, warnings = 0;
  for (const Finding& f : parse.findings) {
    std::printf("%s\n", f.ToString().c_str());
    (f.severity == Finding::Severity::kError ? errors : warnings)++;
  }
  std::printf("%s: %zu frames, %d errors, %d warnings\n", a.demo.c_str(),
              parse.demo.frames.size(), errors, warnings);
  return errors > 0 || (a.strict && warnings > 0) ? kExitFailure : kExitOk;
}

// ---------------------------------------------------------------- retarget

struct RetargetArgs {
  std::string demo;
  std::string model;
  std::string skr_config;
  std::optional<double> height_scale;
  std::optional<double> height_calib;
  std::string out;
  std::string ik_csv;
  double max_failure_rate = 0.1;
};

int RunRetarget(const RetargetArgs& a) {
  const KinematicModel model = LoadModel(a.model);
  const Demonstration demo = LoadDemonstration(a.demo);
  if (demo.frames.empty()) throw Error(a.demo + ": no frames");
  SkrConfig cfg = LoadSkr(a.skr_config);
  cfg.height_scale = CalibratedScale(model, demo.header, a.height_scale, a.height_calib);

  Trajectory targets;
  targets.reserve(demo.frames.size());
  for (const auto& f : demo.frames) targets.push_back(ScaleKeypoints(f, cfg.height_scale));
  std::vector<IkReport> reports;
  MotionTrajectory traj;
  traj.model = model.name();
  traj.rate = demo.header.rate;
  traj.frames = RetargetStream(model, targets, PelvisAlignedSeed(model, targets.front()),
                               cfg, &reports);
  for (const auto& f : demo.frames) traj.timestamps.push_back(f.timestamp);

  Emit(a.out, SerializeTrajectory(traj));
  const std::string csv_path = a.ik_csv.empty() ? a.out + ".ik.csv" : a.ik_csv;
  if (a.out != "-" || !a.ik_csv.empty()) Emit(csv_path, IkReportCsv(reports, traj.timestamps));

  std::size_t failed = 0;
  double max_pos = 0.0, max_rot = 0.0;
  for (const IkReport& r : reports) {
    if (!r.converged) ++failed;
    max_pos = std::max(max_pos, r.max_position_error());
    max_rot = std::max(max_rot, r.max_orientation_error());
  }
  const double rate = static_cast<double>(failed) / static_cast<double>(reports.size());
  std::fprintf(stderr,
               "retargeted %zu frames (height_scale %s): %zu not converged (%.1f%%), "
               "max position error %s m, max orientation error %s rad\n",
               reports.size(), Num(cfg.height_scale).c_str(), failed, 100.0 * rate,
               Num(max_pos).c_str(), Num(max_rot).c_str());
  if (rate > a.max_failure_rate) {
    std::fprintf(stderr, "error: IK non-convergence rate %.1f%% exceeds %.1f%%\n",
                 100.0 * rate, 100.0 * a.max_failure_rate);
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- stats / chunk

struct StatsArgs {
  std::vector<std::string> demos;
  int horizon = kDefaultHorizon;
  std::string out = "-";
};

// Demos long enough for one chunk; warns about the others.
std::vector<Trajectory> UsableDemos(const std::vector<std::string>& paths, int horizon) {
  std::vector<Trajectory> out;
  for (const auto& path : paths) {
    Demonstration d = LoadDemonstration(path);
    if (d.frames.size() < static_cast<std::size_t>(horizon) + 1) {
      std::fprintf(stderr, "warning: %s: %zu frames, need %d for one chunk; skipped\n",
                   path.c_str(), d.frames.size(), horizon + 1);
      continue;
    }
    out.push_back(std::move(d.frames));
  }
  return out;
}

int RunStats(const StatsArgs& a) {
  const std::vector<Trajectory> demos = UsableDemos(a.demos, a.horizon);
  if (demos.empty()) throw Error("no demonstration is long enough for one chunk");
  Emit(a.out, SerializeStats(ComputeStats(demos, a.horizon), a.horizon));
  return kExitOk;
}

NormalizationStats LoadStats(const std::string& path, int horizon) {
  int file_horizon = 0;
  NormalizationStats stats = ParseStats(ReadFile(path), &file_horizon);
  if (file_horizon != horizon) {
    throw Error(path + ": stats were computed for horizon " + std::to_string(file_horizon) +
                ", requested " + std::to_string(horizon));
  }
  return stats;
}

struct EncodeArgs {
  std::string demo;
  std::string stats;
  std::string stats_out;
  int horizon = kDefaultHorizon;
  std::string out = "-";
};

int RunEncode(const EncodeArgs& a) {
  const Demonstration demo = LoadDemonstration(a.demo);
  ChunkFile file;
  file.horizon = a.horizon;
  file.rate = demo.header.rate;
  const std::size_t h = static_cast<std::size_t>(a.horizon);
  if (demo.frames.size() < h + 1) {
    std::fprintf(stderr, "warning: %s: %zu frames, need %zu for one chunk; no chunks written\n",
                 a.demo.c_str(), demo.frames.size(), h + 1);
    Emit(a.out, SerializeChunkFile(file));
    return kExitOk;
  }
  NormalizationStats stats;
  if (!a.stats.empty()) {
    stats = LoadStats(a.stats, a.horizon);
  } else {
    stats = ComputeStats(std::span<const Trajectory>(&demo.frames, 1), a.horizon);
    if (!a.stats_out.empty()) WriteFile(a.stats_out, SerializeStats(stats, a.horizon));
  }
  std::size_t clamped = 0;
  for (std::size_t t = 0; t + h < demo.frames.size(); ++t) {
    ChunkRecord rec;
    rec.index = t;
    rec.anchor = demo.frames[t];
    rec.chunk = Encode(RelativeChunkAt(demo.frames, t, a.horizon), stats, &clamped);
    file.records.push_back(std::move(rec));
  }
  Emit(a.out, SerializeChunkFile(file));
  std::fprintf(stderr, "encoded %zu chunks of %d steps, %zu values clamped\n",
               file.records.size(), a.horizon, clamped);
  return kExitOk;
}

struct DecodeArgs {
  std::string chunks;
  std::string stats;
  std::string out = "-";
  std::string check;
  double tolerance = 1e-9;
};

int RunDecode(const DecodeArgs& a) {
  const ChunkFile file = ParseChunkFile(ReadFile(a.chunks));
  const NormalizationStats stats = LoadStats(a.stats, file.horizon);
  std::vector<Trajectory> decoded;
  decoded.reserve(file.records.size());
  for (const ChunkRecord& rec : file.records) {
    try {
      decoded.push_back(
          AbsoluteFromChunk(Decode(rec.chunk, stats), rec.anchor, 1.0 / file.rate));
    } catch (const Error& e) {
      throw Error("chunk " + std::to_string(rec.index) + ": " + e.what());
    }
  }
  Emit(a.out, SerializeDecodedChunks(file.records, decoded));
  if (a.check.empty()) return kExitOk;

  const Demonstration demo = LoadDemonstration(a.check);
  double dt = 0.0, dr = 0.0, dg = 0.0;
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    const std::size_t t = file.records[i].index;
    for (std::size_t j = 0; j < decoded[i].size(); ++j) {
      if (t + 1 + j >= demo.frames.size()) {
        throw Error("chunk " + std::to_string(t) + " runs past the end of " + a.check);
      }
      const KeypointFrame& want = demo.frames[t + 1 + j];
      const KeypointFrame& got = decoded[i][j];
      for (Keypoint k : kAllKeypoints) {
        dt = std::max(dt, (got[k].translation - want[k].translation).norm());
        dr = std::max(dr, RotationAngle(got[k].rotation, want[k].rotation));
      }
      for (int g = 0; g < 2; ++g) dg = std::max(dg, std::abs(got.gripper[g] - want.gripper[g]));
    }
  }
  const bool ok = dt <= a.tolerance && dr <= a.tolerance && dg <= a.tolerance;
  std::fprintf(stderr,
               "round trip over %zu chunks: max translation error %s m, rotation error %s "
               "rad, gripper error %s m (tolerance %s): %s\n",
               file.records.size(), Num(dt).c_str(), Num(dr).c_str(), Num(dg).c_str(),
               Num(a.tolerance).c_str(), ok ? "ok" : "FAILED");
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string model;
  std::string source = "synthetic:static";
  std::string skr_config;
  std::string tracking_config;
  std::optional<double> height_scale;
  double duration = 10.0;
  std::uint64_t seed = 0;
  double noise = 0.0;
  double rate_hl = 10.0;
  double rate_ll = kControlRate;
  double source_rate = 50.0;
  int horizon = kDefaultHorizon;
  std::string sine_joint;
  double sine_amplitude = 0.2;
  double sine_frequency = 0.5;
  bool threaded = false;
  std::string out;
  std::string summary = "-";
  std::string obs_csv;
};

int SineJoint(const KinematicModel& model, const std::string& name) {
  if (name.empty()) {
    const int j = model.DofIndex("left_hip_pitch_joint");
    return j >= 0 ? j : 0;
  }
  const int j = model.DofIndex(name);
  if (j < 0) throw UsageError("model " + model.name() + " has no joint '" + name + "'");
  return j;
}

int RunSimulate(const SimulateArgs& a) {
  const KinematicModel model = LoadModel(a.model);
  SkrConfig skr = LoadSkr(a.skr_config);
  const TrackingConfig tracking = a.tracking_config.empty()
                                      ? DefaultTrackingConfig(model)
                                      : ParseTrackingConfig(ReadFile(a.tracking_config), model);
  Trajectory traj;
  double rate = a.source_rate;
  const RobotMotionFrame stand = DefaultFrame(model);
  if (a.source.rfind("replay:", 0) == 0) {
    const Demonstration demo = LoadDemonstration(a.source.substr(7));
    traj = demo.frames;
    rate = demo.header.rate;
    skr.height_scale = CalibratedScale(model, demo.header, a.height_scale, std::nullopt);
  } else if (a.source == "synthetic:static") {
    traj = SyntheticStatic(model, stand, rate, a.duration);
  } else if (a.source == "synthetic:sine") {
    traj = SyntheticSine(model, stand, SineJoint(model, a.sine_joint), a.sine_amplitude,
                         a.sine_frequency, rate, a.duration);
  } else {
    throw UsageError("--source must be replay:<demo>, synthetic:static or synthetic:sine");
  }
  if (a.source.rfind("replay:", 0) != 0 && a.height_scale) skr.height_scale = *a.height_scale;
  AddTranslationNoise(traj, a.noise, a.seed);

  const PolicySource source(std::move(traj), rate, a.horizon);
  EpisodeOptions opt;
  opt.duration = a.duration;
  opt.rate_hl = a.rate_hl;
  opt.rate_ll = a.rate_ll;
  opt.threaded = a.threaded;
  opt.record_observations = !a.obs_csv.empty();
  ControllerConfig ctrl = tracking.controller;
  ctrl.control_rate = a.rate_ll;
  const EpisodeLog log = RunEpisode(source, model, skr, ctrl, tracking.plant, opt);

  Emit(a.out, EpisodeCsv(log, model));
  if (!a.obs_csv.empty()) Emit(a.obs_csv, ObservationCsv(log, model, opt));
  Emit(a.summary, SummaryJson(log.summary));
  return kExitOk;
}

// ---------------------------------------------------------------- fk / ik

struct FkArgs {
  std::string model;
  std::string q = "zero";
  std::string root;
  std::vector<std::string> keypoints;
  std::vector<std::string> links;
  bool json = false;
};

int RunFk(const FkArgs& a) {
  const KinematicModel model = LoadModel(a.model);
  std::vector<Keypoint> kps;
  for (const auto& name : a.keypoints) kps.push_back(KeypointOrUsage(name));
  for (const auto& name : a.links) {
    if (model.LinkIndex(name) < 0) throw UsageError("unknown link '" + name + "'");
  }
  if (kps.empty() && a.links.empty()) kps.assign(kAllKeypoints.begin(), kAllKeypoints.end());
  const JointVector q = ParseJoints(model, a.q, "--q");
  const Pose root = a.root.empty() ? Pose::Identity() : ParsePose(a.root, "--root");
  const FkResult fk = ForwardKinematics(model, q, root);

  if (a.json) {
    ordered_json doc = {{"model", model.name()}};
    ordered_json kj = ordered_json::object();
    for (Keypoint k : kps) kj[std::string(KeypointName(k))] = PoseJson(fk.keypoint(k));
    ordered_json lj = ordered_json::object();
    for (const auto& name : a.links) lj[name] = PoseJson(LinkPose(model, fk, name));
    if (!kps.empty()) doc["keypoints"] = kj;
    if (!a.links.empty()) doc["links"] = lj;
    std::printf("%s\n", doc.dump(2).c_str());
    return kExitOk;
  }
  for (Keypoint k : kps) {
    std::printf("%-10s %s\n", std::string(KeypointName(k)).c_str(),
                PoseText(fk.keypoint(k)).c_str());
  }
  for (const auto& name : a.links) {
    std::printf("%-10s %s\n", name.c_str(), PoseText(LinkPose(model, fk, name)).c_str());
  }
  return kExitOk;
}

struct IkArgs {
  std::string model;
  std::string skr_config;
  std::vector<std::string> targets;
  std::string from_q = "default";
  std::string seed_q = "default";
  bool json = false;
};

int RunIk(const IkArgs& a) {
  const KinematicModel model = LoadModel(a.model);
  RobotMotionFrame ref = DefaultFrame(model);
  ref.joints = ParseJoints(model, a.from_q, "--from-q");
  KeypointFrame targets = KeypointsOf(model, ref);
  for (const auto& spec : a.targets) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--target expects name=x,y,z[,qw,qx,qy,qz], got '" + spec + "'");
    }
    const Keypoint k = KeypointOrUsage(spec.substr(0, eq));
    const std::string what = "--target " + spec.substr(0, eq);
    const Pose p = ParsePose(spec.substr(eq + 1), what);
    targets[k].translation = p.translation;
    // Orientation only when given; otherwise it keeps the --from-q value.
    if (ParseNumbers(spec.substr(eq + 1), what).size() == 7) targets[k].rotation = p.rotation;
  }
  RobotMotionFrame seed = DefaultFrame(model);
  seed.joints = ParseJoints(model, a.seed_q, "--seed-q");
  const SkrConfig cfg = LoadSkr(a.skr_config);
  const RetargetResult res = Retarget(model, targets, seed, cfg);
  const IkReport& r = res.report;

  if (a.json) {
    ordered_json joints = ordered_json::object();
    for (int j = 0; j < model.dof(); ++j) joints[model.dof_name(j)] = res.frame.joints[j];
    ordered_json err = ordered_json::object();
    for (Keypoint k : kAllKeypoints) {
      err[std::string(KeypointName(k))] = {{"position", r.position_error[Index(k)]},
                                           {"orientation", r.orientation_error[Index(k)]}};
    }
    const ordered_json doc = {
        {"model", model.name()},
        {"converged", r.converged},
        {"iterations", r.iterations},
        {"residual", r.residual},
        {"root", PoseJson(res.frame.root())},
        {"joints", joints},
        {"keypoint_errors", err},
    };
    std::printf("%s\n", doc.dump(2).c_str());
  } else {
    std::printf("converged %s, %d iterations, residual %s\n", r.converged ? "yes" : "no",
                r.iterations, Num(r.residual).c_str());
    std::printf("root %s\n", PoseText(res.frame.root()).c_str());
    for (int j = 0; j < model.dof(); ++j) {
      std::printf("%-28s %s\n", model.dof_name(j).c_str(), Num(res.frame.joints[j]).c_str());
    }
    for (Keypoint k : kAllKeypoints) {
      std::printf("error %-10s position %s m, orientation %s rad\n",
                  std::string(KeypointName(k)).c_str(), Num(r.position_error[Index(k)]).c_str(),
                  Num(r.orientation_error[Index(k)]).c_str());
    }
  }
  return r.converged ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string model;
  double duration = 10.0;
  double rate = 50.0;
  std::uint64_t seed = 0;
  double amplitude = 0.25;
  std::optional<double> calibration;
  std::string out = "-";
  std::string joints_out;
};

// Demonstration played back through forward kinematics: every joint swings
// around the default posture at a random frequency, the root walks forward.
int RunSynth(const SynthArgs& a) {
  const KinematicModel model = LoadModel(a.model);
  if (!(a.rate > 0.0) || !(a.duration >= 0.0)) throw UsageError("rate and duration must be positive");
  if (a.amplitude < 0.0 || a.amplitude > 1.0) throw UsageError("--amplitude must be in [0, 1]");
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dof = model.dof();
  const JointVector& lo = model.lower_limits();
  const JointVector& hi = model.upper_limits();
  const JointVector& c = model.default_posture();
  JointVector amp(dof), freq(dof), phase(dof);
  for (int j = 0; j < dof; ++j) {
    amp[j] = a.amplitude * std::min(hi[j] - c[j], c[j] - lo[j]) * (0.2 + 0.8 * unit(rng));
    freq[j] = 0.1 + 0.5 * unit(rng);
    phase[j] = std::numbers::pi * (2.0 * unit(rng) - 1.0);
  }
  Demonstration demo;
  demo.header.rate = a.rate;
  demo.header.calibration_pelvis_height =
      a.calibration ? *a.calibration : model.default_root_height();
  demo.header.gripper_range = {0.0, 0.1};
  MotionTrajectory truth;
  truth.model = model.name();
  truth.rate = a.rate;
  const int n = static_cast<int>(std::floor(a.duration * a.rate + 1e-9)) + 1;
  RobotMotionFrame f = DefaultFrame(model);
  for (int i = 0; i < n; ++i) {
    const double t = i / a.rate;
    for (int j = 0; j < dof; ++j) {
      f.joints[j] = c[j] + amp[j] * std::sin(2.0 * std::numbers::pi * freq[j] * t + phase[j]);
    }
    f.root_position = Vec3(0.1 * t, 0.03 * std::sin(1.3 * t), model.default_root_height());
    f.root_orientation = Quat::FromAxisAngle(Vec3::UnitZ(), 0.1 * std::sin(0.7 * t));
    KeypointFrame kf = KeypointsOf(model, f, t);
    kf.gripper = {0.05 + 0.03 * std::sin(0.9 * t), 0.05 - 0.03 * std::sin(0.6 * t)};
    demo.frames.push_back(kf);
    truth.timestamps.push_back(t);
    truth.frames.push_back(f);
  }
  Emit(a.out, SerializeDemonstration(demo));
  if (!a.joints_out.empty()) Emit(a.joints_out, SerializeTrajectory(truth));
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"keyret: keypoint action chunks, retargeting and tracking"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a demonstration file");
  validate->add_option("demo", va.demo, "Demonstration (JSON Lines)")->required()
      ->check(CLI::ExistingFile);
  validate->add_flag("--strict", va.strict, "Treat warnings as failures");

  RetargetArgs ra;
  auto* retarget = app.add_subcommand("retarget", "Retarget a demonstration to robot motion");
  retarget->add_option("demo", ra.demo, "Demonstration")->required()->check(CLI::ExistingFile);
  retarget->add_option("--model", ra.model, "Model JSON")->required()->check(CLI::ExistingFile);
  retarget->add_option("--skr-config", ra.skr_config, "SKR config JSON")
      ->check(CLI::ExistingFile);
  auto* hs = retarget->add_option("--height-scale", ra.height_scale,
                                  "Override the calibrated height scale");
  retarget->add_option("--height-calib", ra.height_calib,
                       "Demonstrator standing pelvis height in m (default: from header)")
      ->excludes(hs);
  retarget->add_option("-o,--out", ra.out, "Trajectory output")->required();
  retarget->add_option("--ik-csv", ra.ik_csv, "IK report CSV (default: <out>.ik.csv)");
  retarget->add_option("--max-failure-rate", ra.max_failure_rate,
                       "Allowed fraction of non-converged frames")
      ->check(CLI::Range(0.0, 1.0));

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Normalization statistics over demonstrations");
  stats->add_option("demos", sa.demos, "Demonstrations")->required()->check(CLI::ExistingFile);
  stats->add_option("--horizon", sa.horizon, "Chunk length")->check(CLI::PositiveNumber);
  stats->add_option("-o,--out", sa.out, "Stats output");

  auto* chunk = app.add_subcommand("chunk", "Encode or decode action chunks");
  chunk->require_subcommand(1);
  EncodeArgs ea;
  auto* encode = chunk->add_subcommand("encode", "Demonstration -> normalized chunks");
  encode->add_option("demo", ea.demo, "Demonstration")->required()->check(CLI::ExistingFile);
  auto* st = encode->add_option("--stats", ea.stats, "Stats file (default: from this demo)")
                 ->check(CLI::ExistingFile);
  encode->add_option("--stats-out", ea.stats_out, "Write the computed stats here")
      ->excludes(st);
  encode->add_option("--horizon", ea.horizon, "Chunk length")->check(CLI::PositiveNumber);
  encode->add_option("-o,--out", ea.out, "Chunk output");
  DecodeArgs da;
  auto* decode = chunk->add_subcommand("decode", "Normalized chunks -> absolute frames");
  decode->add_option("chunks", da.chunks, "Chunk file")->required()->check(CLI::ExistingFile);
  decode->add_option("--stats", da.stats, "Stats file")->required()->check(CLI::ExistingFile);
  decode->add_option("-o,--out", da.out, "Decoded output");
  decode->add_option("--check", da.check, "Compare against the source demonstration")
      ->check(CLI::ExistingFile);
  decode->add_option("--tolerance", da.tolerance, "Round-trip tolerance for --check");

  SimulateArgs ma;
  auto* simulate = app.add_subcommand("simulate", "Closed-loop tracking episode");
  simulate->add_option("--model", ma.model, "Model JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--source", ma.source,
                       "replay:<demo>, synthetic:static or synthetic:sine");
  simulate->add_option("--skr-config", ma.skr_config, "SKR config JSON")
      ->check(CLI::ExistingFile);
  simulate->add_option("--tracking-config", ma.tracking_config, "Controller/plant JSON")
      ->check(CLI::ExistingFile);
  simulate->add_option("--height-scale", ma.height_scale, "Override the height scale");
  simulate->add_option("--duration", ma.duration, "Episode length in s")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", ma.seed, "Seed for --noise");
  simulate->add_option("--noise", ma.noise, "Keypoint translation noise stddev in m")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--rate-hl", ma.rate_hl, "Chunk rate in Hz")->check(CLI::PositiveNumber);
  simulate->add_option("--rate-ll", ma.rate_ll, "Control rate in Hz")->check(CLI::PositiveNumber);
  simulate->add_option("--source-rate", ma.source_rate, "Synthetic source frame rate in Hz")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--horizon", ma.horizon, "Chunk length")->check(CLI::PositiveNumber);
  simulate->add_option("--sine-joint", ma.sine_joint, "Joint moved by synthetic:sine");
  simulate->add_option("--sine-amplitude", ma.sine_amplitude, "rad");
  simulate->add_option("--sine-frequency", ma.sine_frequency, "Hz");
  simulate->add_flag("--threaded", ma.threaded, "Produce chunks on a separate thread");
  simulate->add_option("-o,--out", ma.out, "Episode log CSV")->required();
  simulate->add_option("--summary", ma.summary, "Summary JSON (default: stdout)");
  simulate->add_option("--obs-csv", ma.obs_csv, "Observation CSV");

  FkArgs fa;
  auto* fk = app.add_subcommand("fk", "Forward kinematics");
  fk->add_option("--model", fa.model, "Model JSON")->required()->check(CLI::ExistingFile);
  fk->add_option("--q", fa.q, "zero, default or comma-separated joint values");
  fk->add_option("--root", fa.root, "Root pose x,y,z[,qw,qx,qy,qz]");
  fk->add_option("--keypoint", fa.keypoints, "Keypoint to print (repeatable)");
  fk->add_option("--link", fa.links, "Link to print (repeatable)");
  fk->add_flag("--json", fa.json, "JSON output");

  IkArgs ia;
  auto* ik = app.add_subcommand("ik", "Solve keypoint inverse kinematics");
  ik->add_option("--model", ia.model, "Model JSON")->required()->check(CLI::ExistingFile);
  ik->add_option("--skr-config", ia.skr_config, "SKR config JSON")->check(CLI::ExistingFile);
  ik->add_option("--target", ia.targets, "name=x,y,z[,qw,qx,qy,qz] (repeatable)");
  ik->add_option("--from-q", ia.from_q,
                 "Configuration whose FK supplies targets not given by --target");
  ik->add_option("--seed-q", ia.seed_q, "Initial joint configuration");
  ik->add_flag("--json", ia.json, "JSON output");

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "Generate a demonstration by FK playback");
  synth->add_option("--model", ya.model, "Model JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--duration", ya.duration, "s")->check(CLI::NonNegativeNumber);
  synth->add_option("--rate", ya.rate, "Hz")->check(CLI::PositiveNumber);
  synth->add_option("--seed", ya.seed, "Random seed");
  synth->add_option("--amplitude", ya.amplitude, "Joint swing as a fraction of half range");
  synth->add_option("--calibration-height", ya.calibration,
                    "Header pelvis height (default: model standing height)");
  synth->add_option("-o,--out", ya.out, "Demonstration output");
  synth->add_option("--joints-out", ya.joints_out, "Ground-truth robot trajectory output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return RunValidate(va);
    if (*retarget) return RunRetarget(ra);
    if (*stats) return RunStats(sa);
    if (*encode) return RunEncode(ea);
    if (*decode) return RunDecode(da);
    if (*simulate) return RunSimulate(ma);
    if (*fk) return RunFk(fa);
    if (*ik) return RunIk(ia);
    if (*synth) return RunSynth(ya);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace keyret

int main(int argc, char** argv) { return keyret::Main(argc, argv); }
