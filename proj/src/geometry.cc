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

#include "keyret/geometry.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "keyret/error.h"

namespace keyret {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kDegenerate6d = 1e-8;
constexpr double kSlerpLinearAngle = 1e-6;

}  // namespace

Quat Quat::FromAxisAngle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) return Identity();
  const Vec3 u = axis / n;
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
}

Quat Quat::FromRotationVector(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-12) {
    // second-order expansion keeps the result unit to rounding
    return Quat(1.0, 0.5 * v.x(), 0.5 * v.y(), 0.5 * v.z()).Normalized();
  }
  return FromAxisAngle(v, angle);
}

Quat Quat::FromMatrix(const Mat3& r) {
  // Shepperd: branch on the largest of (trace, diagonal) for stability
  const double trace = r.trace();
  Quat q;
  if (trace >= r(0, 0) && trace >= r(1, 1) && trace >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + trace);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
         (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s,
         (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s,
         (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s,
         (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  return q.Normalized();
}

double Quat::Norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quat Quat::Normalized() const {
  const double n = Norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error("cannot normalize a zero or non-finite quaternion");
  }
  return {w / n, x / n, y / n, z / n};
}

Quat Quat::Canonical() const { return w < 0.0 ? -*this : *this; }

Vec3 Quat::Rotate(const Vec3& v) const {
  const Vec3 u(x, y, z);
  const Vec3 t = 2.0 * u.cross(v);
  return v + w * t + u.cross(t);
}

Vec3 Quat::ToRotationVector() const {
  const Quat q = Canonical();
  const Vec3 u(q.x, q.y, q.z);
  const double n = u.norm();
  if (n < 1e-12) return (2.0 / q.w) * u;
  return (2.0 * std::atan2(n, q.w) / n) * u;
}

bool Quat::IsFinite() const {
  return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) &&
         std::isfinite(z);
}

Quat operator*(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Mat3 QuatToMatrix(const Quat& q) {
  const double n = q.Norm();
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    std::ostringstream msg;
    msg << "quaternion is not unit norm (|q| = " << n << ")";
    throw Error(msg.str());
  }
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Quat MatrixToQuat(const Mat3& rotation) { return Quat::FromMatrix(rotation); }

Rot6D Rot6dEncode(const Mat3& rotation) {
  Rot6D v;
  v.head<3>() = rotation.col(0);
  v.tail<3>() = rotation.col(1);
  return v;
}

Mat3 Rot6dDecode(const Rot6D& v) {
  const Vec3 c1 = v.head<3>();
  const Vec3 c2 = v.tail<3>();
  const double n1 = c1.norm();
  if (!(n1 >= kDegenerate6d)) {
    throw Error("degenerate 6D rotation: first column vanishes");
  }
  const Vec3 a1 = c1 / n1;
  const Vec3 r2 = c2 - a1.dot(c2) * a1;
  const double n2 = r2.norm();
  if (!(n2 >= kDegenerate6d)) {
    throw Error("degenerate 6D rotation: columns are parallel");
  }
  const Vec3 a2 = r2 / n2;
  Mat3 r;
  r.col(0) = a1;
  r.col(1) = a2;
  r.col(2) = a1.cross(a2);
  return r;
}

Quat Slerp(const Quat& q0, const Quat& q1, double t) {
  Quat b = q1;
  double d = q0.Dot(q1);
  if (d < 0.0) {
    b = -q1;
    d = -d;
  }
  d = std::min(d, 1.0);
  const double theta = std::acos(d);
  if (theta < kSlerpLinearAngle) {
    return Quat(q0.w + t * (b.w - q0.w), q0.x + t * (b.x - q0.x),
                q0.y + t * (b.y - q0.y), q0.z + t * (b.z - q0.z))
        .Normalized();
  }
  const double s = std::sin(theta);
  const double wa = std::sin((1.0 - t) * theta) / s;
  const double wb = std::sin(t * theta) / s;
  return Quat(wa * q0.w + wb * b.w, wa * q0.x + wb * b.x, wa * q0.y + wb * b.y,
              wa * q0.z + wb * b.z)
      .Normalized();
}

double RotationAngle(const Quat& a, const Quat& b) {
  const Quat d = a.Conjugate() * b;
  const double n = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
  return 2.0 * std::atan2(n, std::abs(d.w));
}

Vec3 ProjectedGravity(const Quat& root) {
  return QuatToMatrix(root).transpose() * Vec3(0.0, 0.0, -1.0);
}

Quat HeadingQuat(const Quat& q) {
  const double yaw = std::atan2(2.0 * (q.w * q.z + q.x * q.y),
                                1.0 - 2.0 * (q.y * q.y + q.z * q.z));
  return Quat::FromAxisAngle(Vec3::UnitZ(), yaw);
}

Vec3 LogMap(const Mat3& rotation) {
  return Quat::FromMatrix(rotation).ToRotationVector();
}

Mat3 ExpMap(const Vec3& rotation_vector) {
  return QuatToMatrix(Quat::FromRotationVector(rotation_vector));
}

Mat3 Skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

Pose Pose::FromMatrix(const Mat4& m) {
  return {m.block<3, 1>(0, 3), Quat::FromMatrix(m.block<3, 3>(0, 0))};
}

Mat4 Pose::ToMatrix() const {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = QuatToMatrix(rotation);
  m.block<3, 1>(0, 3) = translation;
  return m;
}

bool Pose::IsFinite() const {
  return translation.allFinite() && rotation.IsFinite();
}

Pose Compose(const Pose& a, const Pose& b) {
  return {a.rotation.Rotate(b.translation) + a.translation,
          a.rotation * b.rotation};
}

Pose Inverse(const Pose& a) {
  const Quat inv = a.rotation.Conjugate();
  return {-inv.Rotate(a.translation), inv};
}

Pose operator*(const Pose& a, const Pose& b) { return Compose(a, b); }

}  // namespace keyret
