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

#include "keyret/formats.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_util.h"
#include "keyret/error.h"

namespace keyret {

namespace {

using internal::json;

json PoseArray(const Pose& p) {
  return json::array({p.translation.x(), p.translation.y(), p.translation.z(),
                      p.rotation.w, p.rotation.x, p.rotation.y, p.rotation.z});
}

Pose PoseFromArray(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 7) {
    throw Error(what + ": expected [tx, ty, tz, qw, qx, qy, qz]");
  }
  std::array<double, 7> v{};
  for (std::size_t i = 0; i < 7; ++i) {
    if (!j[i].is_number()) throw Error(what + ": non-numeric entry");
    v[i] = j[i].get<double>();
    if (!std::isfinite(v[i])) throw Error(what + ": non-finite entry");
  }
  return {Vec3(v[0], v[1], v[2]), Quat(v[3], v[4], v[5], v[6])};
}

json FrameToJson(const KeypointFrame& f) {
  json j = json::object();
  j["t"] = f.timestamp;
  for (Keypoint k : kAllKeypoints) j[std::string(KeypointName(k))] = PoseArray(f[k]);
  j["gripper"] = json::array({f.gripper[0], f.gripper[1]});
  return j;
}

// Quaternions are returned as stored; the caller checks norms.
KeypointFrame FrameFromJson(const json& j) {
  if (!j.is_object()) throw Error("expected a JSON object");
  KeypointFrame f;
  if (!j.contains("t") || !j.at("t").is_number()) throw Error("missing numeric 't'");
  f.timestamp = j.at("t").get<double>();
  if (!std::isfinite(f.timestamp)) throw Error("non-finite timestamp");
  for (Keypoint k : kAllKeypoints) {
    const std::string name(KeypointName(k));
    if (!j.contains(name)) throw Error("missing keypoint '" + name + "'");
    f.poses[Index(k)] = PoseFromArray(j.at(name), name);
  }
  if (!j.contains("gripper")) throw Error("missing 'gripper'");
  const json& g = j.at("gripper");
  if (!g.is_array() || g.size() != 2 || !g[0].is_number() || !g[1].is_number()) {
    throw Error("gripper: expected [left_width, right_width]");
  }
  f.gripper = {g[0].get<double>(), g[1].get<double>()};
  return f;
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) {
    lines.pop_back();
  }
  return lines;
}

bool Blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json ParseLine(const std::string& line, std::size_t number) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error("line " + std::to_string(number) + ": " + e.what());
  }
}

}  // namespace

std::string Finding::ToString() const {
  std::string s = severity == Severity::kError ? "error" : "warning";
  if (line > 0) s += ": line " + std::to_string(line);
  return s + ": " + message;
}

bool DemoParse::ok() const {
  for (const auto& f : findings) {
    if (f.severity == Finding::Severity::kError) return false;
  }
  return true;
}

DemoParse ParseDemonstration(std::string_view text) {
  DemoParse out;
  auto error = [&](int line, std::string msg) {
    out.findings.push_back({line, Finding::Severity::kError, std::move(msg)});
  };
  auto warn = [&](int line, std::string msg) {
    out.findings.push_back({line, Finding::Severity::kWarning, std::move(msg)});
  };

  const std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) {
    error(0, "empty file");
    return out;
  }

  DemoHeader& h = out.demo.header;
  try {
    const json head = json::parse(lines[0]);
    if (head.value("format_version", std::string()) != kDemoFormat) {
      error(1, "header format_version must be \"" + std::string(kDemoFormat) + "\"");
    }
    h.rate = head.at("rate").get<double>();
    h.calibration_pelvis_height = head.at("calibration_pelvis_height").get<double>();
    if (head.contains("gripper_range")) {
      const json& r = head.at("gripper_range");
      if (!r.is_array() || r.size() != 2) throw Error("gripper_range: expected [min, max]");
      h.gripper_range = {r[0].get<double>(), r[1].get<double>()};
    }
    if (!(h.rate > 0.0)) error(1, "rate must be positive");
    if (!(h.calibration_pelvis_height > 0.0)) {
      error(1, "calibration_pelvis_height must be positive");
    }
    if (!(h.gripper_range[0] >= 0.0 && h.gripper_range[0] <= h.gripper_range[1])) {
      error(1, "gripper_range must satisfy 0 <= min <= max");
    }
  } catch (const std::exception& e) {
    error(1, std::string("malformed header: ") + e.what());
    return out;
  }

  bool have_prev = false;
  double prev_t = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line = static_cast<int>(i + 1);
    if (Blank(lines[i])) continue;
    KeypointFrame f;
    try {
      f = FrameFromJson(json::parse(lines[i]));
    } catch (const std::exception& e) {
      error(line, e.what());
      continue;
    }
    bool bad = false;
    for (Keypoint k : kAllKeypoints) {
      Quat& q = f.poses[Index(k)].rotation;
      const double dev = std::abs(q.Norm() - 1.0);
      if (dev > 1e-6) {
        error(line, std::string(KeypointName(k)) + " quaternion norm " +
                        Num(q.Norm()) + " is not unit");
        bad = true;
      } else if (dev > 1e-9) {
        warn(line, std::string(KeypointName(k)) + " quaternion renormalized");
        q = q.Normalized();
      }
    }
    for (int s = 0; s < 2; ++s) {
      const double w = f.gripper[static_cast<std::size_t>(s)];
      if (!(w >= h.gripper_range[0] && w <= h.gripper_range[1])) {
        error(line, std::string(s == 0 ? "left" : "right") + " gripper width " +
                        Num(w) + " outside gripper_range");
        bad = true;
      }
    }
    if (have_prev && !(f.timestamp > prev_t)) {
      error(line, "timestamp " + Num(f.timestamp) + " does not increase (previous " +
                      Num(prev_t) + ")");
      bad = true;
    }
    have_prev = true;
    prev_t = f.timestamp;
    if (!bad) out.demo.frames.push_back(f);
  }
  if (out.demo.frames.empty() && out.ok()) error(0, "no frames");
  return out;
}

Demonstration LoadDemonstration(const std::string& path) {
  DemoParse p = ParseDemonstration(ReadFile(path));
  for (const auto& f : p.findings) {
    if (f.severity == Finding::Severity::kError) throw Error(path + ": " + f.ToString());
  }
  return std::move(p.demo);
}

std::string SerializeDemonstration(const Demonstration& demo) {
  json head = {{"format_version", std::string(kDemoFormat)},
               {"rate", demo.header.rate},
               {"calibration_pelvis_height", demo.header.calibration_pelvis_height},
               {"gripper_range", demo.header.gripper_range}};
  std::string out = head.dump() + "\n";
  for (const auto& f : demo.frames) out += FrameToJson(f).dump() + "\n";
  return out;
}

std::string SerializeTrajectory(const MotionTrajectory& traj) {
  if (traj.timestamps.size() != traj.frames.size()) {
    throw Error("trajectory timestamps and frames differ in length");
  }
  const long dof = traj.frames.empty() ? 0 : static_cast<long>(traj.frames[0].joints.size());
  json head = {{"format_version", std::string(kTrajectoryFormat)},
               {"model", traj.model},
               {"rate", traj.rate},
               {"dof", dof}};
  std::string out = head.dump() + "\n";
  for (std::size_t i = 0; i < traj.frames.size(); ++i) {
    if (traj.frames[i].joints.size() != dof) throw Error("trajectory frames differ in dof");
    json line = {{"t", traj.timestamps[i]},
                 {"frame", internal::WriteVector(traj.frames[i].Flatten())}};
    out += line.dump() + "\n";
  }
  return out;
}

MotionTrajectory ParseTrajectory(std::string_view text) {
  const std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) throw Error("empty trajectory file");
  MotionTrajectory traj;
  long dof = 0;
  try {
    const json head = ParseLine(lines[0], 1);
    if (head.value("format_version", std::string()) != kTrajectoryFormat) {
      throw Error("header format_version must be \"" + std::string(kTrajectoryFormat) + "\"");
    }
    traj.model = head.at("model").get<std::string>();
    traj.rate = head.at("rate").get<double>();
    dof = head.at("dof").get<long>();
  } catch (const json::exception& e) {
    throw Error(std::string("line 1: malformed header: ") + e.what());
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Blank(lines[i])) continue;
    const json j = ParseLine(lines[i], i + 1);
    try {
      const Eigen::VectorXd v = internal::ReadVector(j.at("frame"), "frame");
      if (v.size() != 7 + dof) {
        throw Error("frame has " + std::to_string(v.size()) + " values, header dof " +
                    std::to_string(dof) + " needs " + std::to_string(7 + dof));
      }
      traj.timestamps.push_back(j.at("t").get<double>());
      traj.frames.push_back(RobotMotionFrame::Unflatten(v));
    } catch (const std::exception& e) {
      throw Error("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return traj;
}

std::string SerializeChunkFile(const ChunkFile& file) {
  json head = {{"format_version", std::string(kChunkFormat)},
               {"layout_version", std::string(kActionLayoutVersion)},
               {"horizon", file.horizon},
               {"rate", file.rate}};
  std::string out = head.dump() + "\n";
  for (const ChunkRecord& r : file.records) {
    if (r.chunk.horizon() != file.horizon) throw Error("chunk horizon mismatch");
    json rows = json::array();
    for (Eigen::Index i = 0; i < r.chunk.values.rows(); ++i) {
      json row = json::array();
      for (int c = 0; c < kActionWidth; ++c) row.push_back(r.chunk.values(i, c));
      rows.push_back(std::move(row));
    }
    json line = {{"index", r.index}, {"anchor", FrameToJson(r.anchor)}, {"rows", rows}};
    out += line.dump() + "\n";
  }
  return out;
}

ChunkFile ParseChunkFile(std::string_view text) {
  const std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) throw Error("empty chunk file");
  ChunkFile file;
  try {
    const json head = ParseLine(lines[0], 1);
    if (head.value("format_version", std::string()) != kChunkFormat) {
      throw Error("header format_version must be \"" + std::string(kChunkFormat) + "\"");
    }
    if (head.value("layout_version", std::string()) != kActionLayoutVersion) {
      throw Error("unsupported layout_version");
    }
    file.horizon = head.at("horizon").get<int>();
    file.rate = head.at("rate").get<double>();
  } catch (const json::exception& e) {
    throw Error(std::string("line 1: malformed header: ") + e.what());
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Blank(lines[i])) continue;
    const json j = ParseLine(lines[i], i + 1);
    try {
      ChunkRecord r;
      r.index = j.at("index").get<std::size_t>();
      r.anchor = FrameFromJson(j.at("anchor"));
      const json& rows = j.at("rows");
      if (!rows.is_array() || static_cast<int>(rows.size()) != file.horizon) {
        throw Error("expected " + std::to_string(file.horizon) + " rows");
      }
      r.chunk.values.resize(file.horizon, kActionWidth);
      r.chunk.normalized = true;
      for (std::size_t s = 0; s < rows.size(); ++s) {
        if (!rows[s].is_array() || rows[s].size() != kActionWidth) {
          throw Error("row " + std::to_string(s) + " is not 47 wide");
        }
        for (int c = 0; c < kActionWidth; ++c) {
          r.chunk.values(static_cast<Eigen::Index>(s), c) =
              rows[s][static_cast<std::size_t>(c)].get<double>();
        }
      }
      file.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return file;
}

std::string SerializeDecodedChunks(const std::vector<ChunkRecord>& records,
                                   const std::vector<Trajectory>& frames) {
  if (records.size() != frames.size()) throw Error("decoded chunk count mismatch");
  json head = {{"format_version", "decoded-v1"}};
  std::string out = head.dump() + "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    json list = json::array();
    for (const auto& f : frames[i]) list.push_back(FrameToJson(f));
    json line = {{"index", records[i].index}, {"frames", list}};
    out += line.dump() + "\n";
  }
  return out;
}

std::string IkReportCsv(const std::vector<IkReport>& reports,
                        const std::vector<double>& timestamps) {
  std::string out =
      "frame,t,iterations,converged,residual,max_position_error,max_orientation_error\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const IkReport& r = reports[i];
    const double t = i < timestamps.size() ? timestamps[i] : 0.0;
    out += std::to_string(i) + "," + Num(t) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "1" : "0") + "," + Num(r.residual) + "," +
           Num(r.max_position_error()) + "," + Num(r.max_orientation_error()) + "\n";
  }
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path);
}

}  // namespace keyret
