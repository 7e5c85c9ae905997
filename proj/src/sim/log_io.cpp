#include "polarnav/log_io.hpp"

#include "polarnav/errors.hpp"
#include "polarnav/trajectory_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace polarnav {

namespace fs = std::filesystem;

namespace {

constexpr const char* kImuHeader = "t,gx,gy,gz,ax,ay,az";
constexpr const char* kMagHeader = "t,yaw";
constexpr const char* kFlowHeader = "t,vx,vy,height";
constexpr const char* kOdomHeader = "t_start,t_end,x,y,z,qx,qy,qz,qw";

class CsvWriter {
 public:
  explicit CsvWriter(const char* header) { out_ = std::string(header) + "\n"; }

  template <typename... T>
  void row(T... values) {
    bool first = true;
    ((append(static_cast<double>(values), first)), ...);
    out_ += '\n';
  }

  const std::string& str() const { return out_; }

 private:
  void append(double v, bool& first) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!first) out_ += ',';
    out_ += buf;
    first = false;
  }

  std::string out_;
};

std::string odom_csv(const std::vector<OdomMeasurement>& list) {
  CsvWriter w(kOdomHeader);
  for (const OdomMeasurement& m : list) {
    const Eigen::Quaterniond& q = m.relative.rotation.quaternion();
    const Vec3& x = m.relative.translation;
    w.row(m.t_start, m.t_end, x.x(), x.y(), x.z(), q.x(), q.y(), q.z(), q.w());
  }
  return w.str();
}

// Parses a CSV with a fixed header into rows of `columns` doubles.
std::vector<std::vector<double>> read_csv(const fs::path& path, const std::string& header,
                                         std::size_t sort_column = 0) {
  const std::string name = path.filename().string();
  std::istringstream in(read_text(path));
  std::string line;
  int lineno = 0;
  std::size_t columns = 1;
  for (char c : header) columns += (c == ',');

  if (!std::getline(in, line)) throw DataError(name + ": empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw DataError(name + " line 1: expected header '" + header + "'");
  }
  std::vector<std::vector<double>> rows;
  double last_t = -INFINITY;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string tok;
    while (std::getline(fields, tok, ',')) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (tok.empty() || *end != '\0' || !std::isfinite(v)) {
        throw DataError(name + " line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
      row.push_back(v);
    }
    if (row.size() != columns) {
      throw DataError(name + " line " + std::to_string(lineno) + ": expected " +
                      std::to_string(columns) + " columns, got " + std::to_string(row.size()));
    }
    if (row[sort_column] < last_t) {
      throw DataError(name + " line " + std::to_string(lineno) + ": rows not time-sorted");
    }
    last_t = row[sort_column];
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<OdomMeasurement> read_odom(const fs::path& path) {
  std::vector<OdomMeasurement> out;
  int lineno = 1;
  for (const auto& r : read_csv(path, kOdomHeader, 1)) {
    ++lineno;
    const Eigen::Quaterniond q(r[8], r[5], r[6], r[7]);
    if (q.norm() < 1e-6 || r[1] <= r[0]) {
      throw DataError(path.filename().string() + " line " + std::to_string(lineno) +
                      ": invalid relative pose");
    }
    out.push_back({r[0], r[1], Pose3{Rotation3::from_quaternion(q), Vec3(r[2], r[3], r[4])}});
  }
  return out;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_log(const fs::path& dir, const SensorLog& log, const LogManifest& manifest) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  CsvWriter imu(kImuHeader);
  for (const ImuSample& s : log.imu) {
    imu.row(s.t, s.gyro.x(), s.gyro.y(), s.gyro.z(), s.accel.x(), s.accel.y(), s.accel.z());
  }
  write_text(dir / "imu.csv", imu.str());

  CsvWriter mag(kMagHeader);
  for (const MagSample& s : log.mag) mag.row(s.t, s.heading);
  write_text(dir / "mag.csv", mag.str());

  CsvWriter flow(kFlowHeader);
  for (const FlowSample& s : log.flow) flow.row(s.t, s.velocity.x(), s.velocity.y(), s.height);
  write_text(dir / "flow.csv", flow.str());

  write_text(dir / "lidar_odom.csv", odom_csv(log.lidar));
  write_text(dir / "vio_odom.csv", odom_csv(log.vio));
  write_text(dir / "loops.csv", odom_csv(log.loops));

  std::vector<StampedPose> truth;
  truth.reserve(log.truth.size());
  for (const TruthSample& s : log.truth) truth.push_back({s.t, s.state.pose});
  write_tum(dir / "truth.tum", truth,
            {"seed " + std::to_string(manifest.seed), "config_hash " + manifest.config_hash});
}

LogContents read_log(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("log directory not found: " + dir.string());
  LogContents c;
  const fs::path imu = dir / "imu.csv";
  if (!fs::exists(imu)) throw DataError("missing imu.csv in " + dir.string());
  for (const auto& r : read_csv(imu, kImuHeader)) {
    c.log.imu.push_back({r[0], Vec3(r[1], r[2], r[3]), Vec3(r[4], r[5], r[6])});
  }
  if (c.log.imu.size() < 2) throw DataError("imu.csv needs at least two samples");

  if (fs::exists(dir / "mag.csv")) {
    c.has_mag = true;
    for (const auto& r : read_csv(dir / "mag.csv", kMagHeader)) {
      c.log.mag.push_back({r[0], r[1], false});
    }
  }
  if (fs::exists(dir / "flow.csv")) {
    c.has_flow = true;
    for (const auto& r : read_csv(dir / "flow.csv", kFlowHeader)) {
      c.log.flow.push_back({r[0], Vec2(r[1], r[2]), r[3]});
    }
  }
  if (fs::exists(dir / "lidar_odom.csv")) {
    c.has_lidar = true;
    c.log.lidar = read_odom(dir / "lidar_odom.csv");
  }
  if (fs::exists(dir / "vio_odom.csv")) {
    c.has_vio = true;
    c.log.vio = read_odom(dir / "vio_odom.csv");
  }
  if (fs::exists(dir / "loops.csv")) {
    c.has_loops = true;
    c.log.loops = read_odom(dir / "loops.csv");
  }
  if (fs::exists(dir / "truth.tum")) {
    c.has_truth = true;
    for (const StampedPose& p : read_tum(dir / "truth.tum")) {
      TruthSample s;
      s.t = p.t;
      s.state.pose = p.pose;
      c.log.truth.push_back(s);
    }
  }
  return c;
}

}  // namespace polarnav
