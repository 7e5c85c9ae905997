#pragma once

// Fixtures shared by the acceptance criteria: scenario loading, factor
// configurations for the ablations and trajectory error helpers.

#include "polarnav/estimator.hpp"
#include "polarnav/eval.hpp"
#include "polarnav/scenario.hpp"
#include "polarnav/trajectory_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace acceptance {

using namespace polarnav;

std::filesystem::path source_path(const std::string& relative);

/// Scenario from the bundled scenarios/ directory with the seed replaced.
sim::Scenario bundled(const std::string& name, std::uint64_t seed);

/// Lidar odometry (plus loop closures) and IMU only.
EstimatorConfig lidar_imu_only();

/// Every factor type, optionally without visual odometry.
EstimatorConfig all_factors(bool with_vio = true);

std::vector<StampedPose> estimate_poses(const EstimatorResult& result);
std::vector<StampedPose> truth_poses(const SensorLog& log);

double ate(const SensorLog& log, const EstimatorResult& result, eval::AlignMode mode);

/// Zero-noise fixtures: name plus scenario.
struct Fixture {
  std::string name;
  sim::Scenario scenario;
};
std::vector<Fixture> exact_fixtures();

}  // namespace acceptance
