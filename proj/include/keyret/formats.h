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

// On-disk formats: demonstrations, robot trajectories, action chunk files and
// IK reports. All JSON Lines files start with a header object carrying
// format_version. Layouts are documented in docs/formats.md.

#ifndef KEYRET_FORMATS_H_
#define KEYRET_FORMATS_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "keyret/action_codec.h"
#include "keyret/skr.h"

namespace keyret {

inline constexpr std::string_view kDemoFormat = "demo-v1";
inline constexpr std::string_view kTrajectoryFormat = "traj-v1";
inline constexpr std::string_view kChunkFormat = "chunk-v1";

struct DemoHeader {
  double rate = 50.0;
  // Standing pelvis height of the demonstrator.
  double calibration_pelvis_height = 1.0;
  std::array<double, 2> gripper_range = {0.0, 0.1};
};

struct Demonstration {
  DemoHeader header;
  Trajectory frames;
};

struct Finding {
  enum class Severity { kWarning, kError };
  // 1-based line number, 0 for whole-file findings.
  int line = 0;
  Severity severity = Severity::kError;
  std::string message;

  std::string ToString() const;
};

struct DemoParse {
  Demonstration demo;
  std::vector<Finding> findings;

  bool ok() const;
};

// Parses and checks every line. Quaternions off unit norm by more than 1e-6
// are errors; smaller deviations above 1e-9 are renormalized with a warning.
DemoParse ParseDemonstration(std::string_view text);
// Throws on the first error finding.
Demonstration LoadDemonstration(const std::string& path);
std::string SerializeDemonstration(const Demonstration& demo);

struct MotionTrajectory {
  std::string model;
  double rate = 50.0;
  std::vector<double> timestamps;
  std::vector<RobotMotionFrame> frames;
};

std::string SerializeTrajectory(const MotionTrajectory& traj);
MotionTrajectory ParseTrajectory(std::string_view text);

struct ChunkRecord {
  std::size_t index = 0;
  KeypointFrame anchor;
  ActionChunk chunk;
};

struct ChunkFile {
  int horizon = kDefaultHorizon;
  double rate = 50.0;
  std::vector<ChunkRecord> records;
};

std::string SerializeChunkFile(const ChunkFile& file);
ChunkFile ParseChunkFile(std::string_view text);

// Decoded absolute frames of each chunk, one JSON line per chunk.
std::string SerializeDecodedChunks(const std::vector<ChunkRecord>& records,
                                   const std::vector<Trajectory>& frames);

// frame,t,iterations,converged,residual,max_position_error,max_orientation_error
std::string IkReportCsv(const std::vector<IkReport>& reports,
                        const std::vector<double>& timestamps);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace keyret

#endif  // KEYRET_FORMATS_H_
