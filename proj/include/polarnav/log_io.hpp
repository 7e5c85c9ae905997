#pragma once

#include "polarnav/sensor_log.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace polarnav {

/// Provenance written as comment lines at the top of truth.tum.
struct LogManifest {
  std::uint64_t seed = 0;
  std::string config_hash;  // 16 hex digits
};

/// Which files were found when reading a log directory.
struct LogContents {
  SensorLog log;
  bool has_truth = false;
  bool has_mag = false;
  bool has_flow = false;
  bool has_lidar = false;
  bool has_vio = false;
  bool has_loops = false;
};

/// Writes imu.csv, mag.csv, flow.csv, lidar_odom.csv, vio_odom.csv,
/// loops.csv and truth.tum into `dir` (created if needed).
void write_log(const std::filesystem::path& dir, const SensorLog& log,
               const LogManifest& manifest);

/// Reads whatever streams exist; imu.csv is mandatory. Throws DataError with
/// file and line on malformed rows.
LogContents read_log(const std::filesystem::path& dir);

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace polarnav
