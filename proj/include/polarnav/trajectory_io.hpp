#pragma once

#include "polarnav/geom.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace polarnav {

struct StampedPose {
  double t = 0.0;
  Pose3 pose;
};

/// TUM text: `t x y z qx qy qz qw` per line, 9 significant digits, lines
/// starting with '#' are comments. Throws DataError naming the line.
std::vector<StampedPose> parse_tum(const std::string& text, const std::string& origin = "tum");
std::vector<StampedPose> read_tum(const std::filesystem::path& path);

std::string format_tum(const std::vector<StampedPose>& poses,
                       const std::vector<std::string>& comments = {});
void write_tum(const std::filesystem::path& path, const std::vector<StampedPose>& poses,
               const std::vector<std::string>& comments = {});

/// Comment lines of a TUM file without the leading "# ".
std::vector<std::string> read_tum_comments(const std::filesystem::path& path);

/// Writes `content` to `path`, throwing DataError on failure.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace polarnav
