#pragma once

#include "polarnav/estimator.hpp"
#include "polarnav/polarimetry.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace polarnav::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNotConverged = 3 };

/// Settings of a `fuse` run, loaded from a YAML file and overridden by flags.
struct RunConfig {
  std::optional<std::filesystem::path> scenario;
  std::optional<std::filesystem::path> output;
  EstimatorConfig estimator;
  polar::CornerParams corners{0.9, 150, 10.0};
  std::vector<std::uint64_t> seeds;
};

/// Throws SchemaError with line diagnostics.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Rejects configurations without lidar or vio odometry.
void check_observable(const FactorToggles& use);

/// Entry point of the command-line tool; returns the process exit code.
/// Data goes to files only, diagnostics to `err`, summaries to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polarnav::cli
