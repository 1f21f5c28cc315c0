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

// Python bindings. Keypoint frames travel as numpy arrays: poses (T, 5, 7)
// with rows [x, y, z, qw, qx, qy, qz] in keypoint order, gripper widths
// (T, 2) and timestamps (T,). Robot motion frames are (T, 7 + dof) rows of
// [root xyz, root quaternion wxyz, joints].

#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "keyret/action_codec.h"
#include "keyret/controller.h"
#include "keyret/error.h"
#include "keyret/formats.h"
#include "keyret/geometry.h"
#include "keyret/keypoints.h"
#include "keyret/kinematics.h"
#include "keyret/motion_ref.h"
#include "keyret/skr.h"

namespace py = pybind11;

namespace keyret {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Pose PoseFrom(const double* p) {
  return {Vec3(p[0], p[1], p[2]), Quat(p[3], p[4], p[5], p[6])};
}

void PoseTo(const Pose& pose, double* out) {
  out[0] = pose.translation.x();
  out[1] = pose.translation.y();
  out[2] = pose.translation.z();
  out[3] = pose.rotation.w;
  out[4] = pose.rotation.x;
  out[5] = pose.rotation.y;
  out[6] = pose.rotation.z;
}

void CheckShape(const Array& a, std::vector<py::ssize_t> shape, const char* what) {
  bool ok = a.ndim() == static_cast<py::ssize_t>(shape.size());
  for (std::size_t i = 0; ok && i < shape.size(); ++i) {
    ok = shape[i] < 0 || a.shape(static_cast<py::ssize_t>(i)) == shape[i];
  }
  if (!ok) {
    std::string want;
    for (auto s : shape) want += (want.empty() ? "" : ", ") + (s < 0 ? "n" : std::to_string(s));
    throw Error(std::string(what) + ": expected shape (" + want + ")");
  }
}

KeypointFrame FrameFromArrays(const Array& poses, const std::optional<Array>& gripper) {
  CheckShape(poses, {5, 7}, "poses");
  KeypointFrame f;
  for (std::size_t k = 0; k < kNumKeypoints; ++k) f.poses[k] = PoseFrom(poses.data() + 7 * k);
  if (gripper) {
    CheckShape(*gripper, {2}, "gripper");
    f.gripper = {gripper->data()[0], gripper->data()[1]};
  }
  return f;
}

Array FrameToArray(const KeypointFrame& f) {
  Array out({5, 7});
  for (std::size_t k = 0; k < kNumKeypoints; ++k) PoseTo(f.poses[k], out.mutable_data() + 7 * k);
  return out;
}

Trajectory TrajectoryFromArrays(const Array& poses, const std::optional<Array>& gripper,
                                const std::optional<Array>& timestamps, double rate) {
  CheckShape(poses, {-1, 5, 7}, "poses");
  const py::ssize_t n = poses.shape(0);
  if (gripper) CheckShape(*gripper, {n, 2}, "gripper");
  if (timestamps) CheckShape(*timestamps, {n}, "timestamps");
  Trajectory traj(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    KeypointFrame& f = traj[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      f.poses[k] = PoseFrom(poses.data() + 35 * i + 7 * static_cast<py::ssize_t>(k));
    }
    if (gripper) f.gripper = {gripper->data()[2 * i], gripper->data()[2 * i + 1]};
    f.timestamp = timestamps ? timestamps->data()[i] : (rate > 0.0 ? i / rate : 0.0);
  }
  return traj;
}

py::tuple TrajectoryToArrays(const Trajectory& traj) {
  const auto n = static_cast<py::ssize_t>(traj.size());
  Array poses({n, py::ssize_t{5}, py::ssize_t{7}});
  Array gripper({n, py::ssize_t{2}});
  Array stamps({n});
  for (py::ssize_t i = 0; i < n; ++i) {
    const KeypointFrame& f = traj[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      PoseTo(f.poses[k], poses.mutable_data() + 35 * i + 7 * static_cast<py::ssize_t>(k));
    }
    gripper.mutable_data()[2 * i] = f.gripper[0];
    gripper.mutable_data()[2 * i + 1] = f.gripper[1];
    stamps.mutable_data()[i] = f.timestamp;
  }
  return py::make_tuple(poses, gripper, stamps);
}

RowMatrix MotionToMatrix(const std::vector<RobotMotionFrame>& frames) {
  if (frames.empty()) return RowMatrix(0, 0);
  RowMatrix out(static_cast<Eigen::Index>(frames.size()), frames.front().width());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = frames[i].Flatten().transpose();
  }
  return out;
}

std::vector<RobotMotionFrame> MotionFromMatrix(const RowMatrix& m) {
  std::vector<RobotMotionFrame> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.push_back(RobotMotionFrame::Unflatten(m.row(i).transpose()));
  }
  return out;
}

RobotMotionFrame FrameFromVector(const KinematicModel& model, const Eigen::VectorXd& v) {
  if (v.size() != 7 + model.dof()) {
    throw Error("robot frame: expected " + std::to_string(7 + model.dof()) + " values");
  }
  return RobotMotionFrame::Unflatten(v);
}

py::dict ReportDict(const IkReport& r) {
  py::dict d;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["residual"] = r.residual;
  d["position_error"] = std::vector<double>(r.position_error.begin(), r.position_error.end());
  d["orientation_error"] =
      std::vector<double>(r.orientation_error.begin(), r.orientation_error.end());
  return d;
}

py::dict SummaryDict(const EpisodeSummary& s) {
  py::dict d;
  d["ticks"] = s.ticks;
  d["chunks"] = s.chunks;
  d["max_tracking_error"] = s.max_tracking_error;
  d["mean_tracking_error"] = s.mean_tracking_error;
  d["max_seam_dq_des"] = s.max_seam_dq_des;
  d["max_intra_chunk_dq_des"] = s.max_intra_chunk_dq_des;
  d["ik_solves"] = s.ik_solves;
  d["ik_converged"] = s.ik_converged;
  d["ik_convergence_rate"] = s.ik_convergence_rate;
  return d;
}

Keypoint KeypointByName(const std::string& name) {
  const auto k = KeypointFromName(name);
  if (!k) throw Error("unknown keypoint '" + name + "'");
  return *k;
}

}  // namespace
}  // namespace keyret

PYBIND11_MODULE(_keyret, m) {
  using namespace keyret;
  m.doc() = "Keypoint action chunks, retargeting and joint tracking";
  py::register_exception<Error>(m, "KeyretError", PyExc_ValueError);

  m.attr("ACTION_WIDTH") = kActionWidth;
  m.attr("DEFAULT_HORIZON") = kDefaultHorizon;
  m.attr("CONTROL_RATE") = kControlRate;
  m.attr("KEYPOINTS") = [] {
    std::vector<std::string> names;
    for (Keypoint k : kAllKeypoints) names.emplace_back(KeypointName(k));
    return names;
  }();
  m.def("action_column_names", [] {
    const auto& n = ActionColumnNames();
    return std::vector<std::string>(n.begin(), n.end());
  });

  py::class_<KinematicModel>(m, "Model")
      .def_static("load", [](const std::string& path) { return LoadModel(path); })
      .def_static("parse", [](const std::string& text) { return ParseModel(text); })
      .def("to_json", [](const KinematicModel& model) { return SerializeModel(model); })
      .def_property_readonly("name", &KinematicModel::name)
      .def_property_readonly("dof", &KinematicModel::dof)
      .def_property_readonly("joint_names",
                             [](const KinematicModel& model) {
                               std::vector<std::string> names;
                               for (int j = 0; j < model.dof(); ++j) {
                                 names.push_back(model.dof_name(j));
                               }
                               return names;
                             })
      .def_property_readonly("lower_limits", &KinematicModel::lower_limits)
      .def_property_readonly("upper_limits", &KinematicModel::upper_limits)
      .def_property_readonly("default_posture", &KinematicModel::default_posture)
      .def_property_readonly("default_root_height", &KinematicModel::default_root_height)
      .def("default_frame",
           [](const KinematicModel& model) { return DefaultFrame(model).Flatten(); });

  m.def(
      "forward_kinematics",
      [](const KinematicModel& model, const JointVector& q,
         const std::optional<Array>& root) {
        Pose r;
        if (root) {
          CheckShape(*root, {7}, "root");
          r = PoseFrom(root->data());
        }
        return FrameToArray(KeypointsOf(model, {r.translation, r.rotation, q}));
      },
      py::arg("model"), py::arg("q"), py::arg("root") = py::none(),
      "Keypoint poses (5, 7) for joints q and an optional root pose [xyz, wxyz].");
  m.def(
      "keypoint_jacobian",
      [](const KinematicModel& model, const JointVector& q, const std::string& keypoint) {
        return Eigen::MatrixXd(KeypointJacobian(model, q, keypoint));
      },
      py::arg("model"), py::arg("q"), py::arg("keypoint"));

  m.def("rot6d_encode", [](const Mat3& r) { return Eigen::VectorXd(Rot6dEncode(r)); });
  m.def("rot6d_decode", [](const Eigen::VectorXd& v) {
    if (v.size() != 6) throw Error("rot6d_decode: expected 6 values");
    return Rot6dDecode(Rot6D(v));
  });

  py::class_<NormalizationStats>(m, "NormalizationStats")
      .def_property_readonly(
          "min", [](const NormalizationStats& s) { return std::vector<double>(s.min.begin(), s.min.end()); })
      .def_property_readonly(
          "max", [](const NormalizationStats& s) { return std::vector<double>(s.max.begin(), s.max.end()); })
      .def("to_json", [](const NormalizationStats& s, int horizon) { return SerializeStats(s, horizon); },
           py::arg("horizon") = kDefaultHorizon)
      .def_static("from_json", [](const std::string& text) {
        int horizon = 0;
        NormalizationStats s = ParseStats(text, &horizon);
        return py::make_tuple(s, horizon);
      });

  m.def(
      "compute_stats",
      [](const std::vector<std::pair<Array, Array>>& dataset, int horizon) {
        std::vector<Trajectory> trajs;
        for (const auto& [poses, gripper] : dataset) {
          trajs.push_back(TrajectoryFromArrays(poses, gripper, std::nullopt, 0.0));
        }
        return ComputeStats(trajs, horizon);
      },
      py::arg("dataset"), py::arg("horizon") = kDefaultHorizon,
      "Stats over a list of (poses, gripper) trajectories.");
  m.def(
      "encode_chunk",
      [](const Array& poses, const Array& gripper, std::size_t t,
         const NormalizationStats& stats, int horizon) {
        const Trajectory traj = TrajectoryFromArrays(poses, gripper, std::nullopt, 0.0);
        std::size_t clamped = 0;
        const ActionChunk chunk = Encode(RelativeChunkAt(traj, t, horizon), stats, &clamped);
        return py::make_tuple(RowMatrix(chunk.values), clamped);
      },
      py::arg("poses"), py::arg("gripper"), py::arg("t"), py::arg("stats"),
      py::arg("horizon") = kDefaultHorizon,
      "Normalized (H, 47) chunk of frames t+1..t+H relative to frame t, and the clamp count.");
  m.def(
      "decode_chunk",
      [](const RowMatrix& values, const NormalizationStats& stats, const Array& anchor_poses,
         const Array& anchor_gripper, double anchor_time, double dt) {
        if (values.cols() != kActionWidth) throw Error("decode_chunk: rows must be 47 wide");
        ActionChunk chunk;
        chunk.values = values;
        KeypointFrame anchor = FrameFromArrays(anchor_poses, anchor_gripper);
        anchor.timestamp = anchor_time;
        return TrajectoryToArrays(AbsoluteFromChunk(Decode(chunk, stats), anchor, dt));
      },
      py::arg("values"), py::arg("stats"), py::arg("anchor_poses"), py::arg("anchor_gripper"),
      py::arg("anchor_time") = 0.0, py::arg("dt") = 0.0,
      "Absolute (poses, gripper, timestamps) of a normalized chunk.");

  py::class_<SkrConfig>(m, "SkrConfig")
      .def(py::init<>())
      .def_readwrite("height_scale", &SkrConfig::height_scale)
      .def_property(
          "max_iterations", [](const SkrConfig& c) { return c.ik.max_iterations; },
          [](SkrConfig& c, int v) { c.ik.max_iterations = v; })
      .def_property(
          "damping", [](const SkrConfig& c) { return c.ik.damping; },
          [](SkrConfig& c, double v) { c.ik.damping = v; })
      .def("to_json", [](const SkrConfig& c) { return SerializeSkrConfig(c); })
      .def_static("from_json", [](const std::string& text) { return ParseSkrConfig(text); });

  m.def("height_scale_from_calibration", &HeightScaleFromCalibration,
        py::arg("robot_pelvis_height"), py::arg("demonstrator_pelvis_height"));
  m.def(
      "scale_keypoints",
      [](const Array& poses, double scale) {
        return FrameToArray(ScaleKeypoints(FrameFromArrays(poses, std::nullopt), scale));
      },
      py::arg("poses"), py::arg("height_scale"));
  m.def(
      "retarget",
      [](const KinematicModel& model, const Array& targets,
         const std::optional<Eigen::VectorXd>& seed, const SkrConfig& cfg) {
        const KeypointFrame t = FrameFromArrays(targets, std::nullopt);
        const RobotMotionFrame s =
            seed ? FrameFromVector(model, *seed) : PelvisAlignedSeed(model, t);
        const RetargetResult r = Retarget(model, t, s, cfg);
        return py::make_tuple(r.frame.Flatten(), ReportDict(r.report));
      },
      py::arg("model"), py::arg("targets"), py::arg("seed") = py::none(),
      py::arg("config") = SkrConfig{},
      "Solve one frame: returns (frame [7 + dof], report dict).");
  m.def(
      "retarget_stream",
      [](const KinematicModel& model, const Array& poses,
         const std::optional<Eigen::VectorXd>& initial, const SkrConfig& cfg) {
        const Trajectory traj = TrajectoryFromArrays(poses, std::nullopt, std::nullopt, 0.0);
        if (traj.empty()) throw Error("retarget_stream: no frames");
        const RobotMotionFrame seed =
            initial ? FrameFromVector(model, *initial) : PelvisAlignedSeed(model, traj.front());
        std::vector<IkReport> reports;
        const auto frames = RetargetStream(model, traj, seed, cfg, &reports);
        py::list rep;
        for (const auto& r : reports) rep.append(ReportDict(r));
        return py::make_tuple(MotionToMatrix(frames), rep);
      },
      py::arg("model"), py::arg("poses"), py::arg("initial") = py::none(),
      py::arg("config") = SkrConfig{},
      "Warm-started retargeting of (T, 5, 7) targets; returns ((T, 7 + dof), reports).");
  m.def(
      "resample",
      [](const RowMatrix& frames, double source_rate, double target_rate) {
        MotionChunk chunk{MotionFromMatrix(frames), source_rate};
        return MotionToMatrix(Resample(chunk, target_rate));
      },
      py::arg("frames"), py::arg("source_rate"), py::arg("target_rate") = kControlRate);

  m.def(
      "load_demonstration",
      [](const std::string& path) {
        const Demonstration d = LoadDemonstration(path);
        py::dict out;
        out["rate"] = d.header.rate;
        out["calibration_pelvis_height"] = d.header.calibration_pelvis_height;
        out["gripper_range"] = d.header.gripper_range;
        const py::tuple arrays = TrajectoryToArrays(d.frames);
        out["poses"] = arrays[0];
        out["gripper"] = arrays[1];
        out["timestamps"] = arrays[2];
        return out;
      },
      py::arg("path"));
  m.def(
      "validate_demonstration",
      [](const std::string& text) {
        py::list out;
        for (const Finding& f : ParseDemonstration(text).findings) {
          out.append(py::make_tuple(
              f.line, f.severity == Finding::Severity::kError ? "error" : "warning", f.message));
        }
        return out;
      },
      py::arg("text"), "Findings as (line, severity, message) tuples.");

  m.def(
      "synthetic_static",
      [](const KinematicModel& model, double rate, double duration) {
        return TrajectoryToArrays(SyntheticStatic(model, DefaultFrame(model), rate, duration));
      },
      py::arg("model"), py::arg("rate") = 50.0, py::arg("duration") = 10.0);
  m.def(
      "synthetic_sine",
      [](const KinematicModel& model, const std::string& joint, double amplitude,
         double frequency, double rate, double duration) {
        const int j = model.DofIndex(joint);
        if (j < 0) throw Error("unknown joint '" + joint + "'");
        return TrajectoryToArrays(
            SyntheticSine(model, DefaultFrame(model), j, amplitude, frequency, rate, duration));
      },
      py::arg("model"), py::arg("joint"), py::arg("amplitude") = 0.2,
      py::arg("frequency") = 0.5, py::arg("rate") = 50.0, py::arg("duration") = 10.0);

  m.def(
      "simulate",
      [](const KinematicModel& model, const Array& poses, const Array& gripper, double rate,
         double duration, double rate_hl, double rate_ll, double kp, double kd,
         double height_scale, int horizon, bool threaded, bool record_observations) {
        const Trajectory traj = TrajectoryFromArrays(poses, gripper, std::nullopt, rate);
        const PolicySource source(traj, rate, horizon);
        SkrConfig skr;
        skr.height_scale = height_scale;
        TrackingConfig tracking = DefaultTrackingConfig(model);
        tracking.controller.kp.setConstant(kp);
        tracking.controller.kd.setConstant(kd);
        tracking.controller.control_rate = rate_ll;
        EpisodeOptions opt;
        opt.duration = duration;
        opt.rate_hl = rate_hl;
        opt.rate_ll = rate_ll;
        opt.threaded = threaded;
        opt.record_observations = record_observations;
        EpisodeLog log;
        {
          py::gil_scoped_release release;
          log = RunEpisode(source, model, skr, tracking.controller, tracking.plant, opt);
        }
        const auto n = static_cast<Eigen::Index>(log.ticks.size());
        const Eigen::Index dof = model.dof();
        RowMatrix q_ref(n, dof), q_des(n, dof), q(n, dof);
        Eigen::VectorXd time(n), err(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const TickRecord& r = log.ticks[static_cast<std::size_t>(i)];
          q_ref.row(i) = r.q_ref.transpose();
          q_des.row(i) = r.q_des.transpose();
          q.row(i) = r.q.transpose();
          time[i] = r.time;
          err[i] = r.tracking_error;
        }
        py::dict out;
        out["summary"] = SummaryDict(log.summary);
        out["time"] = time;
        out["q_ref"] = q_ref;
        out["q_des"] = q_des;
        out["q"] = q;
        out["tracking_error"] = err;
        if (record_observations) {
          RowMatrix obs(n, n > 0 ? log.observations.front().size() : 0);
          for (Eigen::Index i = 0; i < n; ++i) {
            obs.row(i) = log.observations[static_cast<std::size_t>(i)].transpose();
          }
          out["observations"] = obs;
        }
        return out;
      },
      py::arg("model"), py::arg("poses"), py::arg("gripper"), py::arg("rate") = 50.0,
      py::arg("duration") = 10.0, py::arg("rate_hl") = 10.0,
      py::arg("rate_ll") = kControlRate, py::arg("kp") = 100.0, py::arg("kd") = 10.0,
      py::arg("height_scale") = 1.0, py::arg("horizon") = kDefaultHorizon,
      py::arg("threaded") = false, py::arg("record_observations") = false,
      "Closed-loop episode replaying a keypoint trajectory; returns summary and per-tick arrays.");
}
