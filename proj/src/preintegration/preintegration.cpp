#include "polarnav/preintegration.hpp"

#include <stdexcept>
#include <string>

namespace polarnav {

namespace {

constexpr double kMaxStep = 0.1;
constexpr double kLinearRange = 0.5;

void check_stream(std::span<const ImuSample> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("preintegration needs at least two IMU samples");
  }
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double dt = samples[k].t - samples[k - 1].t;
    if (!(dt > 0.0)) {
      throw std::invalid_argument("IMU timestamps not strictly increasing at t=" +
                                  std::to_string(samples[k].t));
    }
    if (dt > kMaxStep) {
      throw std::invalid_argument("IMU gap larger than 0.1 s at t=" +
                                  std::to_string(samples[k].t));
    }
  }
}

}  // namespace

PreintegratedDelta integrate(std::span<const ImuSample> samples, const ImuBias& bias,
                             const ImuNoise& noise) {
  check_stream(samples);

  PreintegratedDelta d;
  d.linearization_bias = bias;

  Mat3 rot = Mat3::Identity();
  const double gyro_var = noise.gyro_density * noise.gyro_density;
  const double accel_var = noise.accel_density * noise.accel_density;

  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const ImuSample& s0 = samples[k];
    const ImuSample& s1 = samples[k + 1];
    const double dt = s1.t - s0.t;
    const double dt2 = dt * dt;

    const Vec3 omega = 0.5 * (s0.gyro + s1.gyro) - bias.gyro;
    const Vec3 a0 = s0.accel - bias.accel;
    const Vec3 a1 = s1.accel - bias.accel;

    const Rotation3 step = so3_exp(omega * dt);
    const Mat3 step_m = step.matrix();
    const Rotation3 rot_next_q = d.delta_rot * step;
    const Mat3 rot_next = rot_next_q.matrix();
    const Mat3 jr = right_jacobian(omega * dt);

    const Vec3 acc_mid = 0.5 * (rot * a0 + rot_next * a1);

    // Bias Jacobians: exact linearization of this discrete scheme.
    const Mat3 d_rot_d_bg_next = step_m.transpose() * d.d_rot_d_bg - jr * dt;
    const Mat3 d_acc_d_bg =
        -0.5 * (rot * hat(a0) * d.d_rot_d_bg + rot_next * hat(a1) * d_rot_d_bg_next);
    const Mat3 d_acc_d_ba = -0.5 * (rot + rot_next);

    d.d_pos_d_ba += d.d_vel_d_ba * dt + 0.5 * dt2 * d_acc_d_ba;
    d.d_pos_d_bg += d.d_vel_d_bg * dt + 0.5 * dt2 * d_acc_d_bg;
    d.d_vel_d_ba += dt * d_acc_d_ba;
    d.d_vel_d_bg += dt * d_acc_d_bg;
    d.d_rot_d_bg = d_rot_d_bg_next;

    // Error-state transition, ordering (rot, vel, pos).
    const Mat3 acc_d_rot = -0.5 * (rot * hat(a0) + rot_next * hat(a1) * step_m.transpose());
    Mat9 f = Mat9::Identity();
    f.block<3, 3>(0, 0) = step_m.transpose();
    f.block<3, 3>(3, 0) = acc_d_rot * dt;
    f.block<3, 3>(6, 0) = 0.5 * dt2 * acc_d_rot;
    f.block<3, 3>(6, 3) = Mat3::Identity() * dt;

    Eigen::Matrix<double, 9, 6> g = Eigen::Matrix<double, 9, 6>::Zero();
    const Mat3 acc_d_ng = 0.5 * rot_next * hat(a1) * jr * dt;
    g.block<3, 3>(0, 0) = -jr * dt;
    g.block<3, 3>(3, 0) = dt * acc_d_ng;
    g.block<3, 3>(6, 0) = 0.5 * dt2 * acc_d_ng;
    g.block<3, 3>(3, 3) = -dt * d_acc_d_ba;
    g.block<3, 3>(6, 3) = -0.5 * dt2 * d_acc_d_ba;

    Eigen::Matrix<double, 6, 1> q;
    q << Vec3::Constant(gyro_var / dt), Vec3::Constant(accel_var / dt);
    d.covariance = f * d.covariance * f.transpose() + g * q.asDiagonal() * g.transpose();

    d.delta_pos += d.delta_vel * dt + 0.5 * dt2 * acc_mid;
    d.delta_vel += acc_mid * dt;
    d.delta_rot = rot_next_q;
    rot = rot_next;
    d.dt += dt;
  }
  d.covariance = 0.5 * (d.covariance + d.covariance.transpose()).eval();
  return d;
}

CorrectedDelta bias_correct(const PreintegratedDelta& delta, const ImuBias& new_bias) {
  const Vec3 dba = new_bias.accel - delta.linearization_bias.accel;
  const Vec3 dbg = new_bias.gyro - delta.linearization_bias.gyro;
  CorrectedDelta c;
  c.delta_rot = dbg.isZero(0.0) ? delta.delta_rot : delta.delta_rot * so3_exp(delta.d_rot_d_bg * dbg);
  c.delta_vel = delta.delta_vel + delta.d_vel_d_ba * dba + delta.d_vel_d_bg * dbg;
  c.delta_pos = delta.delta_pos + delta.d_pos_d_ba * dba + delta.d_pos_d_bg * dbg;
  c.beyond_linear_range = dba.norm() > kLinearRange || dbg.norm() > kLinearRange;
  return c;
}

NavState predict(const NavState& state_i, const PreintegratedDelta& delta, const Vec3& gravity) {
  const CorrectedDelta c =
      bias_correct(delta, ImuBias{state_i.accel_bias, state_i.gyro_bias});
  const double dt = delta.dt;
  const Rotation3& ri = state_i.pose.rotation;
  NavState out = state_i;
  out.pose.rotation = ri * c.delta_rot;
  out.velocity = state_i.velocity + gravity * dt + ri * c.delta_vel;
  out.pose.translation = state_i.pose.translation + state_i.velocity * dt +
                         0.5 * gravity * dt * dt + ri * c.delta_pos;
  return out;
}

}  // namespace polarnav
