/*
Copyright 2026 The MTPCR Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
you may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "core/error.hpp"

namespace mtpcr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Six-value genome [rx, ry, rz, tx, ty, tz]. Angles in radians, translations
/// in the cloud's length units.
struct Pose6 {
  static constexpr std::size_t kDims = 6;
  std::array<double, kDims> values{};

  Pose6() = default;
  Pose6(double rx, double ry, double rz, double tx, double ty, double tz)
      : values{rx, ry, rz, tx, ty, tz} {}

  double rx() const { return values[0]; }
  double ry() const { return values[1]; }
  double rz() const { return values[2]; }
  double tx() const { return values[3]; }
  double ty() const { return values[4]; }
  double tz() const { return values[5]; }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool operator==(const Pose6&) const = default;
};

/// SE(3) element stored as a 4x4 homogeneous matrix. The bottom row is kept
/// exactly [0 0 0 1]; the rotation block is orthonormal with det = +1.
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() : m_(Mat4::Identity()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  /// Validates the SO(3) block and bottom row; throws InvalidArgument otherwise.
  static RigidTransform from_matrix(const Mat4& m);
  static RigidTransform translation(const Vec3& t);

  const Mat4& matrix() const { return m_; }
  Mat3 rotation() const { return m_.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return m_.topRightCorner<3, 1>(); }

  Vec3 apply(const Vec3& p) const {
    return m_.topLeftCorner<3, 3>() * p + m_.topRightCorner<3, 1>();
  }

  // Raw 4x4 product, used for the loop residual where the result need not be
  // re-validated.
  Mat4 operator*(const RigidTransform& rhs) const { return m_ * rhs.m_; }

 private:
  explicit RigidTransform(const Mat4& m) : m_(m) {}
  Mat4 m_;
};

/// True if R is orthonormal with det +1 within `tol` (Frobenius on R R^T - I).
bool is_rotation(const Mat3& r, double tol = RigidTransform::kTolerance);

/// Rz(rz) * Ry(ry) * Rx(rx). Throws InvalidArgument on non-finite input.
Mat3 euler_to_rotation(double rx, double ry, double rz);

RigidTransform pose_to_transform(const Pose6& p);

/// Thrown by transform_to_pose at gimbal lock (|cos ry| < 1e-9). The carried
/// pose is valid but not unique: rx is forced to 0 and rz absorbs the coupled
/// rotation.
class DegeneratePoseError : public Error {
 public:
  explicit DegeneratePoseError(const Pose6& pose);
  const Pose6& pose() const noexcept { return pose_; }

 private:
  Pose6 pose_;
};

Pose6 transform_to_pose(const RigidTransform& t);

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// Closed form [R^T, -R^T t; 0 1].
RigidTransform invert(const RigidTransform& t);

/// ||T31 * T23 * T12 - I||_F
double loop_residual(const RigidTransform& t12, const RigidTransform& t23,
                     const RigidTransform& t31);

/// Transform of task `task` (1, 2 or 3) implied by the best transforms of the
/// other two original tasks. `best_a` belongs to the next task in cyclic order
/// and `best_b` to the one after, e.g. for task 1: best_a = T23, best_b = T31,
/// result = (T31 * T23)^-1.
RigidTransform combine_for_task(int task, const RigidTransform& best_a,
                                const RigidTransform& best_b);

/// Mean Frobenius distance between rotation blocks.
double rotation_error(std::span<const RigidTransform> est,
                      std::span<const RigidTransform> gt);
/// Mean Euclidean distance between translations.
double translation_error(std::span<const RigidTransform> est,
                         std::span<const RigidTransform> gt);

}  // namespace mtpcr
