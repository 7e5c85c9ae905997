#pragma once

// Residual providers of the keyframe factor graph. Every factor yields a
// whitened residual and one Jacobian block (rows x 15, geom tangent layout)
// per referenced key.

#include "polarnav/geom.hpp"
#include "polarnav/preintegration.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace polarnav {

using Key = std::uint64_t;
using StateMap = std::map<Key, NavState>;
using Mat2 = Eigen::Matrix2d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

class MissingKeyError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class OdomSource { lidar, vio, loop };

const char* to_string(OdomSource s);

struct PriorFactor {
  Key key = 0;
  NavState mean;
  Mat15 information = Mat15::Identity();
};

struct ImuFactor {
  Key i = 0;
  Key j = 0;
  PreintegratedDelta delta;
  Vec3 gravity = kDefaultGravity;
  /// Upper-triangular square root of the 15x15 information over
  /// (rot, vel, pos, accel-bias walk, gyro-bias walk).
  Mat15 sqrt_information = Mat15::Identity();
};

ImuFactor make_imu_factor(Key i, Key j, const PreintegratedDelta& delta, const ImuNoise& noise,
                          const Vec3& gravity = kDefaultGravity);

/// Relative pose between keyframes i and j (pose_i^-1 * pose_j). When
/// `anchor` is set, pose i is held fixed at that value and only key j is a
/// variable; this is how constraints to already-marginalized keyframes
/// (loop closures) enter the window.
struct RelPoseFactor {
  Key i = 0;
  Key j = 0;
  Pose3 measured;
  Mat6 information = Mat6::Identity();
  OdomSource source = OdomSource::lidar;
  std::optional<Pose3> anchor;
  double huber_k = 0.0;  // 0 disables the robust loss
};

struct MagHeadingFactor {
  Key key = 0;
  double heading = 0.0;  // rad
  double information = 1.0;
  double gate = 0.25;    // rad
  double huber_k = 0.0;
};

/// Planar (x, y) body-frame velocity.
struct FlowVelocityFactor {
  Key key = 0;
  Vec2 velocity = Vec2::Zero();
  Mat2 information = Mat2::Identity();
  double huber_k = 0.0;
};

/// World-frame height of the body origin.
struct HeightFactor {
  Key key = 0;
  double height = 0.0;
  double information = 1.0;
  double huber_k = 0.0;
};

/// Gaussian left behind by marginalization:
/// r = sqrt_information * [local(x_k, linearization_k)]_k + offset.
struct MarginalPrior {
  std::vector<Key> keys;
  std::vector<NavState> linearization;
  Eigen::MatrixXd sqrt_information;
  Eigen::VectorXd offset;
};

using Factor = std::variant<PriorFactor, ImuFactor, RelPoseFactor, MagHeadingFactor,
                            FlowVelocityFactor, HeightFactor, MarginalPrior>;

struct Linearization {
  Eigen::VectorXd residual;                // whitened (and robustified)
  std::vector<Key> keys;
  std::vector<Eigen::MatrixXd> jacobians;  // residual rows x 15
  double cost = 0.0;                       // 0.5 * rho(|r|^2)
};

std::vector<Key> keys_of(const Factor& factor);

/// Residual before whitening, state minus measurement.
Eigen::VectorXd raw_residual(const Factor& factor, const StateMap& states);

/// Whitened residual and tangent-space Jacobians at the given states.
/// Throws MissingKeyError for an absent key and DegenerateAttitudeError
/// from heading factors at gimbal lock.
Linearization linearize(const Factor& factor, const StateMap& states);

/// 0.5 * rho(|whitened residual|^2) without Jacobians.
double factor_cost(const Factor& factor, const StateMap& states);

/// Signed heading innovation wrap(yaw(R) - measured).
double heading_innovation(const Rotation3& rotation, double measured_heading);

/// Gate test with a closed boundary: accept iff |innovation| <= gate.
bool gate_heading(const MagHeadingFactor& factor, const NavState& estimate);

}  // namespace polarnav
