#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace bodyflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Cross-product matrix: skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

/// Rodrigues' formula. Uses a second-order series below 1e-8 rad.
Mat3 axis_angle_to_matrix(const Vec3& axis_angle);

/// Inverse of axis_angle_to_matrix on the principal branch (|result| <= pi).
Vec3 matrix_to_axis_angle(const Mat3& rotation);

/// Left Jacobian of SO(3): exp(theta + d) ~= exp(J_l(theta) d) exp(theta).
/// Consequently d/dtheta [R(theta) q] = -skew(R(theta) q) * J_l(theta).
Mat3 so3_left_jacobian(const Vec3& axis_angle);

/// Maps an axis-angle vector of magnitude >= pi onto the equivalent rotation
/// with magnitude < pi. Vectors already on the branch are returned unchanged.
Vec3 canonicalize_axis_angle(const Vec3& axis_angle);

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
};

}  // namespace bodyflow
