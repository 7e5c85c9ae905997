#include "polarnav/trajectory_io.hpp"

#include "polarnav/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace polarnav {

std::vector<StampedPose> parse_tum(const std::string& text, const std::string& origin) {
  std::vector<StampedPose> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double v[8];
    int count = 0;
    std::string tok;
    while (fields >> tok) {
      if (count == 8) {
        throw DataError(origin + " line " + std::to_string(lineno) + ": expected 8 fields");
      }
      char* end = nullptr;
      v[count] = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0' || !std::isfinite(v[count])) {
        throw DataError(origin + " line " + std::to_string(lineno) + ": bad number '" + tok +
                        "'");
      }
      ++count;
    }
    if (count != 8) {
      throw DataError(origin + " line " + std::to_string(lineno) + ": expected 8 fields");
    }
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (q.norm() < 1e-6) {
      throw DataError(origin + " line " + std::to_string(lineno) + ": zero quaternion");
    }
    if (!out.empty() && v[0] <= out.back().t) {
      throw DataError(origin + " line " + std::to_string(lineno) +
                      ": timestamps must increase");
    }
    out.push_back({v[0], Pose3{Rotation3::from_quaternion(q), Vec3(v[1], v[2], v[3])}});
  }
  return out;
}

std::vector<StampedPose> read_tum(const std::filesystem::path& path) {
  return parse_tum(read_text(path), path.string());
}

std::string format_tum(const std::vector<StampedPose>& poses,
                       const std::vector<std::string>& comments) {
  std::string out;
  for (const std::string& c : comments) out += "# " + c + "\n";
  char buf[256];
  for (const StampedPose& p : poses) {
    const Eigen::Quaterniond& q = p.pose.rotation.quaternion();
    const Vec3& x = p.pose.translation;
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n", p.t, x.x(),
                  x.y(), x.z(), q.x(), q.y(), q.z(), q.w());
    out += buf;
  }
  return out;
}

void write_tum(const std::filesystem::path& path, const std::vector<StampedPose>& poses,
               const std::vector<std::string>& comments) {
  write_text(path, format_tum(poses, comments));
}

std::vector<std::string> read_tum_comments(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) out.push_back(line.substr(2));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace polarnav
