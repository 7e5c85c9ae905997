#pragma once

#include "polarnav/errors.hpp"
#include "polarnav/trajectory_io.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace polarnav::eval {

class NoOverlapError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateAlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PosePair {
  double t = 0.0;        // estimate timestamp
  double t_truth = 0.0;
  Pose3 estimate;
  Pose3 truth;
};

/// Nearest-timestamp pairing; pairs further apart than max_dt are dropped
/// and each truth pose is used at most once. Throws std::invalid_argument on
/// empty input and NoOverlapError when nothing can be paired.
std::vector<PosePair> associate(const std::vector<StampedPose>& estimate,
                                const std::vector<StampedPose>& truth, double max_dt);

enum class AlignMode { none, first_pose, se3 };

const char* to_string(AlignMode mode);
/// Accepts "none", "first-pose" and "se3".
AlignMode parse_align_mode(const std::string& text);

/// Transform applied to the estimate: T * estimate ~ truth.
Pose3 align(const std::vector<PosePair>& pairs, AlignMode mode);

struct ErrorSample {
  double t = 0.0;
  Vec3 error = Vec3::Zero();  // truth - aligned estimate
  double e3d = 0.0;
  double rotation_error = 0.0;  // rad, only filled when requested
};

struct ErrorReport {
  double ate_rmse = 0.0;
  Vec3 axis_rmse = Vec3::Zero();
  double rotation_rmse = 0.0;
  bool has_rotation = false;
  double length = 0.0;  // truth polyline over the paired poses
  AlignMode mode = AlignMode::first_pose;
  Pose3 alignment;
  std::vector<ErrorSample> series;
};

ErrorReport compute_errors(const std::vector<PosePair>& pairs, const Pose3& alignment,
                           bool with_rotation = false);

/// associate + align + compute_errors.
ErrorReport evaluate(const std::vector<StampedPose>& estimate,
                     const std::vector<StampedPose>& truth, AlignMode mode, double max_dt,
                     bool with_rotation = false);

/// report.csv (one summary row) and errors.csv (series) contents.
std::string report_csv(const ErrorReport& report);
std::string errors_csv(const ErrorReport& report);
std::string summary_text(const ErrorReport& report);

}  // namespace polarnav::eval
