#pragma once

#include "polarnav/geom.hpp"
#include "polarnav/preintegration.hpp"

#include <vector>

namespace polarnav {

struct TruthSample {
  double t = 0.0;
  NavState state;  // biases hold the true IMU biases at t
};

struct MagSample {
  double t = 0.0;
  double heading = 0.0;  // rad, (-pi, pi]
  bool outlier = false;  // simulator bookkeeping; not serialized
};

struct FlowSample {
  double t = 0.0;
  Vec2 velocity = Vec2::Zero();  // body-frame planar velocity, m/s
  double height = 0.0;           // m
};

/// Relative pose pose(t_start)^-1 * pose(t_end).
struct OdomMeasurement {
  double t_start = 0.0;
  double t_end = 0.0;
  Pose3 relative;
};

struct SensorLog {
  std::vector<TruthSample> truth;  // IMU rate
  std::vector<ImuSample> imu;
  std::vector<MagSample> mag;
  std::vector<FlowSample> flow;
  std::vector<OdomMeasurement> lidar;
  std::vector<OdomMeasurement> vio;
  std::vector<OdomMeasurement> loops;
};

}  // namespace polarnav
