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

#include "core/geometry.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace mtpcr {

namespace {

constexpr double kGimbalEpsilon = 1e-9;

}  // namespace

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r * r.transpose() - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : m_(Mat4::Identity()) {
  m_.topLeftCorner<3, 3>() = rotation;
  m_.topRightCorner<3, 1>() = translation;
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  if (!m.allFinite())
    throw Error(ErrorCode::InvalidArgument, "transform has non-finite entries");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0)
    throw Error(ErrorCode::InvalidArgument, "transform bottom row is not [0 0 0 1]");
  if (!is_rotation(m.topLeftCorner<3, 3>()))
    throw Error(ErrorCode::InvalidArgument, "transform rotation block is not in SO(3)");
  return RigidTransform(m);
}

RigidTransform RigidTransform::translation(const Vec3& t) {
  return RigidTransform(Mat3::Identity(), t);
}

Mat3 euler_to_rotation(double rx, double ry, double rz) {
  if (!std::isfinite(rx) || !std::isfinite(ry) || !std::isfinite(rz))
    throw Error(ErrorCode::InvalidArgument, "euler angles must be finite");
  const double cx = std::cos(rx), sx = std::sin(rx);
  const double cy = std::cos(ry), sy = std::sin(ry);
  const double cz = std::cos(rz), sz = std::sin(rz);
  Mat3 rot_x, rot_y, rot_z;
  rot_x << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  rot_y << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rot_z << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  return rot_z * rot_y * rot_x;
}

RigidTransform pose_to_transform(const Pose6& p) {
  return RigidTransform(euler_to_rotation(p.rx(), p.ry(), p.rz()),
                        Vec3(p.tx(), p.ty(), p.tz()));
}

DegeneratePoseError::DegeneratePoseError(const Pose6& pose)
    : Error(ErrorCode::DegeneratePose, "gimbal lock: rotation about y is +-pi/2"),
      pose_(pose) {}

Pose6 transform_to_pose(const RigidTransform& t) {
  const Mat4& m = t.matrix();
  const double cos_ry = std::sqrt(m(2, 1) * m(2, 1) + m(2, 2) * m(2, 2));
  const double ry = std::atan2(-m(2, 0), cos_ry);
  if (cos_ry < kGimbalEpsilon) {
    // With rx = 0 the second column of Rz*Ry(+-pi/2) is (-sin rz, cos rz, 0).
    const double rz = std::atan2(-m(0, 1), m(1, 1));
    throw DegeneratePoseError(Pose6(0.0, ry, rz, m(0, 3), m(1, 3), m(2, 3)));
  }
  const double rx = std::atan2(m(2, 1), m(2, 2));
  const double rz = std::atan2(m(1, 0), m(0, 0));
  return Pose6(rx, ry, rz, m(0, 3), m(1, 3), m(2, 3));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation() * b.rotation(),
                        a.rotation() * b.translation() + a.translation());
}

RigidTransform invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation().transpose();
  return RigidTransform(rt, -rt * t.translation());
}

double loop_residual(const RigidTransform& t12, const RigidTransform& t23,
                     const RigidTransform& t31) {
  const Mat4 chain = t31.matrix() * t23.matrix() * t12.matrix();
  return (chain - Mat4::Identity()).norm();
}

RigidTransform combine_for_task(int task, const RigidTransform& best_a,
                                const RigidTransform& best_b) {
  if (task < 1 || task > 3)
    throw Error(ErrorCode::InvalidArgument, "task index must be 1, 2 or 3");
  return invert(compose(best_b, best_a));
}

namespace {

void check_triplets(std::span<const RigidTransform> est,
                    std::span<const RigidTransform> gt) {
  if (est.size() != gt.size() || est.empty())
    throw Error(ErrorCode::InvalidArgument,
                "error metrics need equally sized, non-empty transform lists");
}

}  // namespace

double rotation_error(std::span<const RigidTransform> est,
                      std::span<const RigidTransform> gt) {
  check_triplets(est, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i)
    sum += (est[i].rotation() - gt[i].rotation()).norm();
  return sum / static_cast<double>(est.size());
}

double translation_error(std::span<const RigidTransform> est,
                         std::span<const RigidTransform> gt) {
  check_triplets(est, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i)
    sum += (est[i].translation() - gt[i].translation()).norm();
  return sum / static_cast<double>(est.size());
}

}  // namespace mtpcr
