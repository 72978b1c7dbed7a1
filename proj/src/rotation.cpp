#include "bodyflow/rotation.hpp"

#include <cmath>
#include <numbers>

namespace bodyflow {

Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

Mat3 axis_angle_to_matrix(const Vec3& axis_angle) {
  const double angle2 = axis_angle.squaredNorm();
  const Mat3 k = skew(axis_angle);
  if (angle2 < 1e-16) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double angle = std::sqrt(angle2);
  const double a = std::sin(angle) / angle;
  const double b = (1.0 - std::cos(angle)) / angle2;
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 matrix_to_axis_angle(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  Vec3 v = aa.angle() * aa.axis();
  return canonicalize_axis_angle(v);
}

Mat3 so3_left_jacobian(const Vec3& axis_angle) {
  const double angle2 = axis_angle.squaredNorm();
  const Mat3 k = skew(axis_angle);
  double a;
  double b;
  if (angle2 < 1e-10) {
    // Taylor: (1-cos x)/x^2 = 1/2 - x^2/24, (x - sin x)/x^3 = 1/6 - x^2/120
    a = 0.5 - angle2 / 24.0;
    b = 1.0 / 6.0 - angle2 / 120.0;
  } else {
    const double angle = std::sqrt(angle2);
    a = (1.0 - std::cos(angle)) / angle2;
    b = (angle - std::sin(angle)) / (angle2 * angle);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 canonicalize_axis_angle(const Vec3& axis_angle) {
  constexpr double pi = std::numbers::pi;
  const double angle = axis_angle.norm();
  if (angle < pi) return axis_angle;
  // remainder() lands in [-pi, pi]; a negative angle flips the axis.
  return axis_angle * (std::remainder(angle, 2.0 * pi) / angle);
}

}  // namespace bodyflow
