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

// JSON helpers shared by the file-format code. Not installed.

#ifndef KEYRET_SRC_JSON_UTIL_H_
#define KEYRET_SRC_JSON_UTIL_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "keyret/error.h"
#include "keyret/geometry.h"

namespace keyret::internal {

using nlohmann::json;

inline Vec3 ReadVec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(what + ": expected an array of 3 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json WriteVec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// wxyz
inline Quat ReadQuat(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(what + ": expected a wxyz array of 4 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

inline json WriteQuat(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

// {"translation": [x, y, z], "rotation": [w, x, y, z]}; both optional.
inline Pose ReadPose(const json& j, const std::string& what) {
  Pose p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error(what + ": expected a pose object");
  if (j.contains("translation")) {
    p.translation = ReadVec3(j.at("translation"), what + ".translation");
  }
  if (j.contains("rotation")) {
    p.rotation = ReadQuat(j.at("rotation"), what + ".rotation");
  }
  return p;
}

inline json WritePose(const Pose& p) {
  return {{"translation", WriteVec3(p.translation)},
          {"rotation", WriteQuat(p.rotation)}};
}

inline Eigen::VectorXd ReadVector(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline json WriteVector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace keyret::internal

#endif  // KEYRET_SRC_JSON_UTIL_H_
