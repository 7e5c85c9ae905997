#pragma once

#include "polarnav/geom.hpp"
#include "polarnav/preintegration.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace polarnav::sim {

enum class PathKind { waypoints, zigzag, loop, figure_eight };

struct PathSpec {
  PathKind kind = PathKind::waypoints;
  double speed = 1.0;          // m/s along the path
  double knot_spacing = 2.0;   // m between spline knots on straight legs

  std::vector<Vec3> waypoints;  // waypoints

  int legs = 6;                 // zigzag
  double leg_length = 20.0;
  double zigzag_heading_deg = 60.0;  // each leg deviates this much from +x

  double straight_length = 60.0;  // loop: stadium track
  double turn_radius = 30.0;
  double laps = 2.0;              // loop and figure_eight

  double lobe_radius = 15.0;  // figure_eight
};

enum class DegradedSensor { lidar, vio };
enum class DegradationMode { absent, corrupted };

struct DegradationWindow {
  double start = 0.0;
  double end = 0.0;
  DegradedSensor sensor = DegradedSensor::lidar;
  DegradationMode mode = DegradationMode::absent;
};

struct SensorNoise {
  ImuNoise imu;
  double mag_sigma = 0.02;
  double mag_outlier_prob = 0.0;
  double mag_outlier_magnitude = 1.0;  // rad; outliers deviate by at least this
  double flow_sigma = 0.05;
  double height_sigma = 0.02;
  double lidar_trans_sigma = 0.01;
  double lidar_rot_sigma = 0.002;
  double lidar_z_drift = 0.0;  // m of vertical drift per m travelled
  double vio_trans_sigma = 0.02;
  double vio_rot_sigma = 0.003;
  double loop_trans_sigma = 0.05;
  double loop_rot_sigma = 0.01;
  double corrupted_trans_sigma = 1.0;
  double corrupted_rot_sigma = 0.3;

  /// All-zero noise, drift and outliers.
  static SensorNoise none();
};

struct Scenario {
  std::uint64_t seed = 1;
  double duration = 0.0;  // s; the motion also stops at the end of the path
  PathSpec path;
  double imu_rate = 200.0;
  double keyframe_rate = 5.0;
  double mag_rate = 10.0;
  double flow_rate = 20.0;
  double gravity = 9.81;
  ImuBias initial_bias;
  SensorNoise noise;
  std::vector<DegradationWindow> degradation;
  double loop_radius = 2.0;     // m
  double loop_min_age = 30.0;   // s
  double loop_cooldown = 2.0;   // s between injected loop closures

  Vec3 gravity_vector() const { return {0.0, 0.0, -gravity}; }
};

/// Parses a YAML scenario. Throws SchemaError with the offending line.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Checks ranges and rate divisibility; throws SchemaError.
void validate(const Scenario& scenario);

}  // namespace polarnav::sim
