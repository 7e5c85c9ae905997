#include "polarnav/geom.hpp"

#include <cmath>
#include <numbers>

namespace polarnav {

namespace {

constexpr double kSmallAngle = 1e-8;

Eigen::Quaterniond canonical(Eigen::Quaterniond q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Rotation3 Rotation3::from_quaternion(const Eigen::Quaterniond& q) {
  Rotation3 r;
  r.q_ = canonical(q);
  return r;
}

Rotation3 Rotation3::from_matrix(const Mat3& m) {
  return from_quaternion(Eigen::Quaterniond(m));
}

Rotation3 Rotation3::inverse() const {
  Rotation3 r;
  r.q_ = q_.conjugate();
  return r;
}

Rotation3 Rotation3::operator*(const Rotation3& other) const {
  return from_quaternion(q_ * other.q_);
}

Pose3 Pose3::inverse() const {
  const Rotation3 inv = rotation.inverse();
  return {inv, -(inv * translation)};
}

Pose3 Pose3::operator*(const Pose3& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Rotation3 so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  Eigen::Quaterniond q;
  if (theta < kSmallAngle) {
    q.w() = 1.0;
    q.vec() = 0.5 * omega;
  } else {
    const double half = 0.5 * theta;
    q.w() = std::cos(half);
    q.vec() = (std::sin(half) / theta) * omega;
  }
  return Rotation3::from_quaternion(q);
}

Vec3 so3_log(const Rotation3& rotation) {
  const Eigen::Quaterniond& q = rotation.quaternion();
  const double n = q.vec().norm();
  if (n < kSmallAngle) {
    // 2 * atan(n / w) / n ~ (2 / w) * (1 - n^2 / (3 w^2))
    const double w = q.w();
    return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * q.vec();
  }
  const double theta = 2.0 * std::atan2(n, q.w());
  return (theta / n) * q.vec();
}

Mat3 right_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = hat(omega);
  if (theta < 1e-5) {
    return Mat3::Identity() - 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() - ((1.0 - std::cos(theta)) / t2) * w +
         ((theta - std::sin(theta)) / (t2 * theta)) * w * w;
}

Mat3 right_jacobian_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = hat(omega);
  if (theta < 1e-5) {
    return Mat3::Identity() + 0.5 * w + (1.0 / 12.0) * w * w;
  }
  const double coeff =
      1.0 / (theta * theta) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * w + coeff * w * w;
}

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

double yaw_of(const Rotation3& rotation) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  const Mat3 r = rotation.matrix();
  const double pitch = std::atan2(-r(2, 0), std::hypot(r(2, 1), r(2, 2)));
  if (kHalfPi - std::abs(pitch) < 1e-6) {
    throw DegenerateAttitudeError("heading unobservable: pitch at +-pi/2");
  }
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return yaw == -std::numbers::pi ? std::numbers::pi : yaw;
}

Rotation3 from_yaw_pitch_roll(double yaw, double pitch, double roll) {
  return so3_exp(Vec3(0.0, 0.0, yaw)) * so3_exp(Vec3(0.0, pitch, 0.0)) *
         so3_exp(Vec3(roll, 0.0, 0.0));
}

NavState retract(const NavState& state, const Vec15& delta) {
  using namespace tangent;
  NavState out;
  const Vec3 d_rot = delta.segment<3>(kRot);
  out.pose.rotation =
      d_rot.isZero(0.0) ? state.pose.rotation : state.pose.rotation * so3_exp(d_rot);
  out.pose.translation = state.pose.translation + delta.segment<3>(kPos);
  out.velocity = state.velocity + delta.segment<3>(kVel);
  out.accel_bias = state.accel_bias + delta.segment<3>(kAccelBias);
  out.gyro_bias = state.gyro_bias + delta.segment<3>(kGyroBias);
  return out;
}

Vec15 local(const NavState& state, const NavState& base) {
  using namespace tangent;
  Vec15 d;
  d.segment<3>(kRot) = so3_log(base.pose.rotation.inverse() * state.pose.rotation);
  d.segment<3>(kPos) = state.pose.translation - base.pose.translation;
  d.segment<3>(kVel) = state.velocity - base.velocity;
  d.segment<3>(kAccelBias) = state.accel_bias - base.accel_bias;
  d.segment<3>(kGyroBias) = state.gyro_bias - base.gyro_bias;
  return d;
}

}  // namespace polarnav
