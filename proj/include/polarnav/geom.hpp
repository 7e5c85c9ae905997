#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>

namespace polarnav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;

/// Thrown when heading cannot be extracted because pitch is at +-pi/2.
class DegenerateAttitudeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Unit quaternion rotation. Stored with w >= 0; every constructor and
/// composition renormalizes.
class Rotation3 {
 public:
  Rotation3() = default;

  static Rotation3 from_quaternion(const Eigen::Quaterniond& q);
  static Rotation3 from_matrix(const Mat3& m);
  static Rotation3 identity() { return {}; }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  Rotation3 inverse() const;
  Rotation3 operator*(const Rotation3& other) const;
  Vec3 operator*(const Vec3& v) const { return q_ * v; }

 private:
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

struct Pose3 {
  Rotation3 rotation;
  Vec3 translation = Vec3::Zero();

  static Pose3 identity() { return {}; }

  Pose3 inverse() const;
  Pose3 operator*(const Pose3& other) const;
  Vec3 operator*(const Vec3& point) const { return rotation * point + translation; }
};

/// Tangent layout of NavState: rotation, translation, velocity, accel bias,
/// gyro bias (3 each). Every Jacobian in the project uses these offsets.
namespace tangent {
inline constexpr int kRot = 0;
inline constexpr int kPos = 3;
inline constexpr int kVel = 6;
inline constexpr int kAccelBias = 9;
inline constexpr int kGyroBias = 12;
inline constexpr int kDim = 15;
}  // namespace tangent

struct NavState {
  Pose3 pose;
  Vec3 velocity = Vec3::Zero();
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();

  const Rotation3& rotation() const { return pose.rotation; }
  const Vec3& position() const { return pose.translation; }
};

Mat3 hat(const Vec3& w);

Rotation3 so3_exp(const Vec3& omega);
Vec3 so3_log(const Rotation3& rotation);

/// Right Jacobian of SO(3) and its inverse.
Mat3 right_jacobian(const Vec3& omega);
Mat3 right_jacobian_inverse(const Vec3& omega);

/// Yaw of the Z-Y-X (yaw, pitch, roll) factorization, in (-pi, pi].
/// Throws DegenerateAttitudeError when |pitch| is within 1e-6 of pi/2.
double yaw_of(const Rotation3& rotation);

/// Rotation from Z-Y-X Euler angles: Rz(yaw) * Ry(pitch) * Rx(roll).
Rotation3 from_yaw_pitch_roll(double yaw, double pitch, double roll);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Right-perturbation retraction: R <- R * Exp(d_rot), vectors added.
NavState retract(const NavState& state, const Vec15& delta);

/// Inverse of retract: retract(base, local(state, base)) == state.
Vec15 local(const NavState& state, const NavState& base);

}  // namespace polarnav
