#include "polarnav/factors.hpp"

#include <cmath>
#include <string>

namespace polarnav {

using namespace tangent;

const char* to_string(OdomSource s) {
  switch (s) {
    case OdomSource::lidar: return "lidar";
    case OdomSource::vio: return "vio";
    case OdomSource::loop: return "loop";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kVarianceFloor = 1e-12;

const NavState& lookup(const StateMap& states, Key key) {
  const auto it = states.find(key);
  if (it == states.end()) throw MissingKeyError("factor references missing key " + std::to_string(key));
  return it->second;
}

// Unwhitened residual plus Jacobians and the whitening transform.
struct Raw {
  VectorXd r;
  std::vector<Key> keys;
  std::vector<MatrixXd> jac;
  MatrixXd sqrt_info;  // upper triangular, whitened r = sqrt_info * r (+ offset)
  VectorXd offset;     // only used by MarginalPrior
  double huber_k = 0.0;
};

MatrixXd upper_sqrt(const MatrixXd& information) {
  Eigen::LLT<MatrixXd> llt(information);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("factor information matrix is not positive definite");
  }
  return llt.matrixU();
}

// d local(x [+] delta, base) / d delta at delta = 0.
Mat15 local_jacobian(const Vec15& local_value) {
  Mat15 d = Mat15::Identity();
  d.block<3, 3>(kRot, kRot) = right_jacobian_inverse(local_value.segment<3>(kRot));
  return d;
}

void eval(const PriorFactor& f, const StateMap& states, Raw& out, bool jac) {
  const Vec15 r = local(lookup(states, f.key), f.mean);
  out.r = r;
  out.keys = {f.key};
  if (jac) out.jac = {local_jacobian(r)};
  out.sqrt_info = upper_sqrt(f.information);
}

void eval(const ImuFactor& f, const StateMap& states, Raw& out, bool jac) {
  const NavState& si = lookup(states, f.i);
  const NavState& sj = lookup(states, f.j);
  const PreintegratedDelta& d = f.delta;
  const double dt = d.dt;

  const Vec3 dba = si.accel_bias - d.linearization_bias.accel;
  const Vec3 dbg = si.gyro_bias - d.linearization_bias.gyro;
  const Vec3 phi = d.d_rot_d_bg * dbg;
  const Rotation3 rot_corr = d.delta_rot * so3_exp(phi);
  const Vec3 vel_corr = d.delta_vel + d.d_vel_d_ba * dba + d.d_vel_d_bg * dbg;
  const Vec3 pos_corr = d.delta_pos + d.d_pos_d_ba * dba + d.d_pos_d_bg * dbg;

  const Mat3 ri_t = si.pose.rotation.matrix().transpose();
  const Mat3 rj = sj.pose.rotation.matrix();
  const Vec3 u_v = sj.velocity - si.velocity - f.gravity * dt;
  const Vec3 u_p = sj.pose.translation - si.pose.translation - si.velocity * dt -
                   0.5 * f.gravity * dt * dt;

  const Rotation3 err_rot = rot_corr.inverse() * si.pose.rotation.inverse() * sj.pose.rotation;
  const Vec3 r_rot = so3_log(err_rot);
  const Vec3 wv = ri_t * u_v;
  const Vec3 wp = ri_t * u_p;

  VectorXd r(15);
  r.segment<3>(0) = r_rot;
  r.segment<3>(3) = wv - vel_corr;
  r.segment<3>(6) = wp - pos_corr;
  r.segment<3>(9) = sj.accel_bias - si.accel_bias;
  r.segment<3>(12) = sj.gyro_bias - si.gyro_bias;
  out.r = r;
  out.keys = {f.i, f.j};
  out.sqrt_info = f.sqrt_information;
  if (!jac) return;

  const Mat3 jr_inv = right_jacobian_inverse(r_rot);
  MatrixXd ji = MatrixXd::Zero(15, 15);
  MatrixXd jj = MatrixXd::Zero(15, 15);

  ji.block<3, 3>(0, kRot) = -jr_inv * rj.transpose() * ri_t.transpose();
  ji.block<3, 3>(0, kGyroBias) =
      -jr_inv * err_rot.matrix().transpose() * right_jacobian(phi) * d.d_rot_d_bg;

  ji.block<3, 3>(3, kRot) = hat(wv);
  ji.block<3, 3>(3, kVel) = -ri_t;
  ji.block<3, 3>(3, kAccelBias) = -d.d_vel_d_ba;
  ji.block<3, 3>(3, kGyroBias) = -d.d_vel_d_bg;

  ji.block<3, 3>(6, kRot) = hat(wp);
  ji.block<3, 3>(6, kPos) = -ri_t;
  ji.block<3, 3>(6, kVel) = -ri_t * dt;
  ji.block<3, 3>(6, kAccelBias) = -d.d_pos_d_ba;
  ji.block<3, 3>(6, kGyroBias) = -d.d_pos_d_bg;

  ji.block<3, 3>(9, kAccelBias) = -Mat3::Identity();
  ji.block<3, 3>(12, kGyroBias) = -Mat3::Identity();

  jj.block<3, 3>(0, kRot) = jr_inv;
  jj.block<3, 3>(3, kVel) = ri_t;
  jj.block<3, 3>(6, kPos) = ri_t;
  jj.block<3, 3>(9, kAccelBias) = Mat3::Identity();
  jj.block<3, 3>(12, kGyroBias) = Mat3::Identity();

  out.jac = {std::move(ji), std::move(jj)};
}

void eval(const RelPoseFactor& f, const StateMap& states, Raw& out, bool jac) {
  const NavState* si_state = f.anchor ? nullptr : &lookup(states, f.i);
  const Pose3 pose_i = f.anchor ? *f.anchor : si_state->pose;
  const NavState& sj = lookup(states, f.j);

  const Mat3 rm_t = f.measured.rotation.matrix().transpose();
  const Mat3 ri_t = pose_i.rotation.matrix().transpose();
  const Mat3 rj = sj.pose.rotation.matrix();
  const Vec3 d = ri_t * (sj.pose.translation - pose_i.translation);
  const Vec3 r_rot =
      so3_log(f.measured.rotation.inverse() * pose_i.rotation.inverse() * sj.pose.rotation);

  VectorXd r(6);
  r.head<3>() = r_rot;
  r.tail<3>() = rm_t * (d - f.measured.translation);
  out.r = r;
  out.sqrt_info = upper_sqrt(f.information);
  out.huber_k = f.huber_k;
  if (f.anchor) {
    out.keys = {f.j};
  } else {
    out.keys = {f.i, f.j};
  }
  if (!jac) return;

  const Mat3 jr_inv = right_jacobian_inverse(r_rot);
  MatrixXd jj = MatrixXd::Zero(6, 15);
  jj.block<3, 3>(0, kRot) = jr_inv;
  jj.block<3, 3>(3, kPos) = rm_t * ri_t;
  if (f.anchor) {
    out.jac = {std::move(jj)};
    return;
  }
  MatrixXd ji = MatrixXd::Zero(6, 15);
  ji.block<3, 3>(0, kRot) = -jr_inv * rj.transpose() * ri_t.transpose();
  ji.block<3, 3>(3, kRot) = rm_t * hat(d);
  ji.block<3, 3>(3, kPos) = -rm_t * ri_t;
  out.jac = {std::move(ji), std::move(jj)};
}

void eval(const MagHeadingFactor& f, const StateMap& states, Raw& out, bool jac) {
  const NavState& s = lookup(states, f.key);
  out.r = VectorXd::Constant(1, heading_innovation(s.pose.rotation, f.heading));
  out.keys = {f.key};
  out.sqrt_info = MatrixXd::Constant(1, 1, std::sqrt(f.information));
  out.huber_k = f.huber_k;
  if (!jac) return;
  // yaw = atan2(R10, R00); d R = R hat(delta), so the first column changes
  // by R(0, dz, -dy).
  const Mat3 m = s.pose.rotation.matrix();
  const double den = m(0, 0) * m(0, 0) + m(1, 0) * m(1, 0);
  MatrixXd j = MatrixXd::Zero(1, 15);
  j(0, kRot + 1) = (m(1, 0) * m(0, 2) - m(0, 0) * m(1, 2)) / den;
  j(0, kRot + 2) = (m(0, 0) * m(1, 1) - m(1, 0) * m(0, 1)) / den;
  out.jac = {std::move(j)};
}

void eval(const FlowVelocityFactor& f, const StateMap& states, Raw& out, bool jac) {
  const NavState& s = lookup(states, f.key);
  const Mat3 rt = s.pose.rotation.matrix().transpose();
  const Vec3 body_vel = rt * s.velocity;
  out.r = body_vel.head<2>() - f.velocity;
  out.keys = {f.key};
  out.sqrt_info = upper_sqrt(f.information);
  out.huber_k = f.huber_k;
  if (!jac) return;
  MatrixXd j = MatrixXd::Zero(2, 15);
  j.block<2, 3>(0, kRot) = hat(body_vel).topRows<2>();
  j.block<2, 3>(0, kVel) = rt.topRows<2>();
  out.jac = {std::move(j)};
}

void eval(const HeightFactor& f, const StateMap& states, Raw& out, bool jac) {
  const NavState& s = lookup(states, f.key);
  out.r = VectorXd::Constant(1, s.pose.translation.z() - f.height);
  out.keys = {f.key};
  out.sqrt_info = MatrixXd::Constant(1, 1, std::sqrt(f.information));
  out.huber_k = f.huber_k;
  if (!jac) return;
  MatrixXd j = MatrixXd::Zero(1, 15);
  j(0, kPos + 2) = 1.0;
  out.jac = {std::move(j)};
}

void eval(const MarginalPrior& f, const StateMap& states, Raw& out, bool jac) {
  const std::size_t n = f.keys.size();
  VectorXd stacked(15 * n);
  std::vector<Vec15> locals(n);
  for (std::size_t k = 0; k < n; ++k) {
    locals[k] = local(lookup(states, f.keys[k]), f.linearization[k]);
    stacked.segment<15>(15 * k) = locals[k];
  }
  out.r = stacked;
  out.keys = f.keys;
  out.sqrt_info = f.sqrt_information;
  out.offset = f.offset;
  if (!jac) return;
  out.jac.clear();
  for (std::size_t k = 0; k < n; ++k) {
    MatrixXd j = MatrixXd::Zero(15 * n, 15);
    j.block<15, 15>(15 * k, 0) = local_jacobian(locals[k]);
    out.jac.push_back(std::move(j));
  }
}

Raw evaluate(const Factor& factor, const StateMap& states, bool jac) {
  Raw raw;
  std::visit([&](const auto& f) { eval(f, states, raw, jac); }, factor);
  return raw;
}

// Whitens and applies the Huber loss in place; returns 0.5 * rho(|r|^2).
double whiten(Raw& raw, VectorXd& residual, std::vector<MatrixXd>* jacobians) {
  residual = raw.sqrt_info * raw.r;
  if (raw.offset.size() > 0) residual += raw.offset;
  if (jacobians) {
    jacobians->clear();
    for (const MatrixXd& j : raw.jac) jacobians->push_back(raw.sqrt_info * j);
  }
  const double sq = residual.squaredNorm();
  if (raw.huber_k > 0.0) {
    const double norm = std::sqrt(sq);
    if (norm > raw.huber_k) {
      const double scale = std::sqrt(raw.huber_k / norm);
      residual *= scale;
      if (jacobians) {
        for (MatrixXd& j : *jacobians) j *= scale;
      }
      return 0.5 * (2.0 * raw.huber_k * norm - raw.huber_k * raw.huber_k);
    }
  }
  return 0.5 * sq;
}

}  // namespace

ImuFactor make_imu_factor(Key i, Key j, const PreintegratedDelta& delta, const ImuNoise& noise,
                          const Vec3& gravity) {
  ImuFactor f;
  f.i = i;
  f.j = j;
  f.delta = delta;
  f.gravity = gravity;

  const Mat9 cov = delta.covariance + kVarianceFloor * Mat9::Identity();
  const Mat9 info = cov.inverse();
  const Eigen::LLT<Mat9> llt(0.5 * (info + info.transpose()));
  f.sqrt_information.setZero();
  f.sqrt_information.topLeftCorner<9, 9>() = llt.matrixU();
  const double var_ba =
      std::max(noise.accel_bias_walk * noise.accel_bias_walk * delta.dt, kVarianceFloor);
  const double var_bg =
      std::max(noise.gyro_bias_walk * noise.gyro_bias_walk * delta.dt, kVarianceFloor);
  f.sqrt_information.block<3, 3>(9, 9) = Mat3::Identity() / std::sqrt(var_ba);
  f.sqrt_information.block<3, 3>(12, 12) = Mat3::Identity() / std::sqrt(var_bg);
  return f;
}

std::vector<Key> keys_of(const Factor& factor) {
  return std::visit(
      [](const auto& f) -> std::vector<Key> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ImuFactor>) {
          return {f.i, f.j};
        } else if constexpr (std::is_same_v<T, RelPoseFactor>) {
          if (f.anchor) return {f.j};
          return {f.i, f.j};
        } else if constexpr (std::is_same_v<T, MarginalPrior>) {
          return f.keys;
        } else {
          return {f.key};
        }
      },
      factor);
}

Eigen::VectorXd raw_residual(const Factor& factor, const StateMap& states) {
  return evaluate(factor, states, false).r;
}

Linearization linearize(const Factor& factor, const StateMap& states) {
  Raw raw = evaluate(factor, states, true);
  Linearization lin;
  lin.cost = whiten(raw, lin.residual, &lin.jacobians);
  lin.keys = std::move(raw.keys);
  return lin;
}

double factor_cost(const Factor& factor, const StateMap& states) {
  Raw raw = evaluate(factor, states, false);
  Eigen::VectorXd r;
  return whiten(raw, r, nullptr);
}

double heading_innovation(const Rotation3& rotation, double measured_heading) {
  return wrap_angle(yaw_of(rotation) - measured_heading);
}

bool gate_heading(const MagHeadingFactor& factor, const NavState& estimate) {
  return std::abs(heading_innovation(estimate.pose.rotation, factor.heading)) <= factor.gate;
}

}  // namespace polarnav
