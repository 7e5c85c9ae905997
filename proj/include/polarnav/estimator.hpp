#pragma once

#include "polarnav/errors.hpp"
#include "polarnav/optimizer.hpp"
#include "polarnav/sensor_log.hpp"

#include <cstddef>
#include <vector>

namespace polarnav {

class EmptyLogError : public DataError {
 public:
  using DataError::DataError;
};

struct FactorToggles {
  bool lidar = true;
  bool vio = true;
  bool loop = true;
  bool mag = true;
  bool flow_velocity = true;
  bool height = true;
};

/// Measurement standard deviations assumed by the estimator.
struct MeasurementNoise {
  ImuNoise imu;
  double mag_sigma = 0.02;      // rad
  double flow_sigma = 0.05;     // m/s
  double height_sigma = 0.02;   // m
  double lidar_trans_sigma = 0.01;
  double lidar_rot_sigma = 0.002;
  double vio_trans_sigma = 0.02;
  double vio_rot_sigma = 0.003;
  double loop_trans_sigma = 0.05;
  double loop_rot_sigma = 0.01;
};

/// Huber thresholds in whitened units; 0 disables the robust loss.
struct RobustLoss {
  double lidar = 0.0;
  double vio = 0.0;
  double loop = 0.0;
  double mag = 0.0;
  double flow_velocity = 0.0;
  double height = 0.0;
};

struct EstimatorConfig {
  double keyframe_rate = 5.0;
  std::size_t window = 30;
  double mag_gate = 0.25;  // rad
  bool gate_enabled = true;
  Vec3 gravity = kDefaultGravity;
  SolverConfig solver;
  FactorToggles use;
  MeasurementNoise noise;
  RobustLoss huber;
};

struct KeyframeEstimate {
  double t = 0.0;
  NavState state;
};

struct GateRecord {
  double t = 0.0;
  double innovation = 0.0;  // rad
  bool accepted = true;
};

struct EstimatorResult {
  std::vector<KeyframeEstimate> trajectory;
  std::vector<GateRecord> gating;
  int solves = 0;
  int nonconverged = 0;
  int total_iterations = 0;
  double initial_heading = 0.0;
};

/// Keyframe-by-keyframe sliding-window smoothing over the log. Each
/// keyframe's recorded estimate is its value when it leaves the window.
/// Throws EmptyLogError when the log has fewer than two IMU samples and
/// std::invalid_argument for an unusable configuration.
EstimatorResult run_estimator(const SensorLog& log, const EstimatorConfig& config = {});

}  // namespace polarnav
