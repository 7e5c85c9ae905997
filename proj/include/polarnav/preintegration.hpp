#pragma once

#include "polarnav/geom.hpp"

#include <span>

namespace polarnav {

struct ImuSample {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();   // rad/s, body frame
  Vec3 accel = Vec3::Zero();  // specific force, m/s^2, body frame
};

struct ImuBias {
  Vec3 accel = Vec3::Zero();
  Vec3 gyro = Vec3::Zero();
};

/// White-noise densities (per sqrt(Hz)) and bias random walks (per sqrt(s)).
struct ImuNoise {
  double gyro_density = 1e-3;
  double accel_density = 1e-2;
  double gyro_bias_walk = 1e-5;
  double accel_bias_walk = 1e-4;
};

inline const Vec3 kDefaultGravity{0.0, 0.0, -9.81};

using Mat9 = Eigen::Matrix<double, 9, 9>;

/// Relative motion between two keyframes accumulated from IMU samples.
/// Covariance ordering is (rotation, velocity, position).
struct PreintegratedDelta {
  double dt = 0.0;
  Rotation3 delta_rot;
  Vec3 delta_vel = Vec3::Zero();
  Vec3 delta_pos = Vec3::Zero();
  Mat9 covariance = Mat9::Zero();
  ImuBias linearization_bias;

  Mat3 d_rot_d_bg = Mat3::Zero();
  Mat3 d_vel_d_ba = Mat3::Zero();
  Mat3 d_vel_d_bg = Mat3::Zero();
  Mat3 d_pos_d_ba = Mat3::Zero();
  Mat3 d_pos_d_bg = Mat3::Zero();
};

/// Midpoint integration of bias-corrected samples. The first and last
/// samples bound the interval. Throws std::invalid_argument for fewer than
/// two samples or timestamps that are not strictly increasing with steps
/// of at most 0.1 s.
PreintegratedDelta integrate(std::span<const ImuSample> samples, const ImuBias& bias,
                             const ImuNoise& noise);

struct CorrectedDelta {
  Rotation3 delta_rot;
  Vec3 delta_vel = Vec3::Zero();
  Vec3 delta_pos = Vec3::Zero();
  /// Set when the bias moved more than 0.5 from the linearization point, where
  /// the first-order correction is no longer trustworthy.
  bool beyond_linear_range = false;
};

/// First-order re-linearization of a delta to a new bias estimate.
CorrectedDelta bias_correct(const PreintegratedDelta& delta, const ImuBias& new_bias);

/// Propagates state_i through the delta (bias-corrected to state_i's biases).
NavState predict(const NavState& state_i, const PreintegratedDelta& delta,
                 const Vec3& gravity = kDefaultGravity);

}  // namespace polarnav
