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

#ifndef KEYRET_GEOMETRY_H_
#define KEYRET_GEOMETRY_H_

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace keyret {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Rot6D = Eigen::Matrix<double, 6, 1>;

// Unit quaternion stored in w, x, y, z order.
//
// The constructor does not normalize; use FromVector / Normalized when the
// input is not known to be unit norm. Products of unit quaternions stay unit
// to rounding. The double cover is never folded implicitly: Canonical()
// returns the representative with w >= 0 on request.
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Quat() = default;
  constexpr Quat(double w_, double x_, double y_, double z_)
      : w(w_), x(x_), y(y_), z(z_) {}

  static Quat Identity() { return {}; }
  // rotation of `angle` radians about `axis` (need not be unit)
  static Quat FromAxisAngle(const Vec3& axis, double angle);
  // exponential map of a rotation vector
  static Quat FromRotationVector(const Vec3& v);
  static Quat FromMatrix(const Mat3& rotation);

  double Norm() const;
  Quat Normalized() const;
  Quat Conjugate() const { return {w, -x, -y, -z}; }
  Quat Canonical() const;
  double Dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  Quat operator-() const { return {-w, -x, -y, -z}; }

  Vec3 Rotate(const Vec3& v) const;
  // rotation vector (axis * angle) with angle in [0, pi]
  Vec3 ToRotationVector() const;
  Eigen::Vector4d ToWxyz() const { return {w, x, y, z}; }
  bool IsFinite() const;
};

Quat operator*(const Quat& a, const Quat& b);

// Returns the rotation matrix of a unit quaternion. Throws if the norm is
// off by more than 1e-6.
Mat3 QuatToMatrix(const Quat& q);
Quat MatrixToQuat(const Mat3& rotation);

// First two columns of R, packed column-major.
Rot6D Rot6dEncode(const Mat3& rotation);
// Gram-Schmidt back to SO(3). Throws on a vanishing first column or on
// (near) parallel columns.
Mat3 Rot6dDecode(const Rot6D& v);

// Shorter-arc spherical interpolation.
Quat Slerp(const Quat& q0, const Quat& q1, double t);
// Geodesic angle in [0, pi] between the rotations represented by a and b.
double RotationAngle(const Quat& a, const Quat& b);

// World gravity direction (0, 0, -1) expressed in the frame of `root`.
Vec3 ProjectedGravity(const Quat& root);

// Yaw-only part of q: rotation about world z with the same heading.
Quat HeadingQuat(const Quat& q);

// so(3) log / exp on matrices. Log returns axis * angle, angle in [0, pi].
Vec3 LogMap(const Mat3& rotation);
Mat3 ExpMap(const Vec3& rotation_vector);
Mat3 Skew(const Vec3& v);

// Rigid transform: x_parent = rotation * x_child + translation.
struct Pose {
  Vec3 translation = Vec3::Zero();
  Quat rotation;

  Pose() = default;
  Pose(const Vec3& t, const Quat& q) : translation(t), rotation(q) {}

  static Pose Identity() { return {}; }
  static Pose FromMatrix(const Mat4& m);

  Mat4 ToMatrix() const;
  Vec3 Apply(const Vec3& p) const { return rotation.Rotate(p) + translation; }
  bool IsFinite() const;
};

// a * b : first apply b, then a.
Pose Compose(const Pose& a, const Pose& b);
Pose Inverse(const Pose& a);
Pose operator*(const Pose& a, const Pose& b);

}  // namespace keyret

#endif  // KEYRET_GEOMETRY_H_
