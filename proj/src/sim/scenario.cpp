#include "polarnav/scenario.hpp"

#include "polarnav/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace polarnav::sim {

SensorNoise SensorNoise::none() {
  SensorNoise n;
  n.imu = ImuNoise{0.0, 0.0, 0.0, 0.0};
  n.mag_sigma = 0.0;
  n.mag_outlier_prob = 0.0;
  n.flow_sigma = 0.0;
  n.height_sigma = 0.0;
  n.lidar_trans_sigma = 0.0;
  n.lidar_rot_sigma = 0.0;
  n.lidar_z_drift = 0.0;
  n.vio_trans_sigma = 0.0;
  n.vio_rot_sigma = 0.0;
  n.loop_trans_sigma = 0.0;
  n.loop_rot_sigma = 0.0;
  return n;
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

// Rejects keys outside `allowed` so that typos surface as schema errors.
void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                const std::string& section) {
  if (!map.IsMap()) throw SchemaError(section + " must be a mapping", line_of(map));
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.contains(key)) {
      throw SchemaError("unknown key '" + key + "' in " + section, line_of(kv.first));
    }
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out) {
  const YAML::Node n = map[key];
  if (!n) return;
  try {
    out = n.as<T>();
  } catch (const YAML::Exception&) {
    throw SchemaError(std::string("bad value for '") + key + "'", line_of(n));
  }
}

Vec3 read_vec3(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence() || n.size() != 3) {
    throw SchemaError(what + " must be a 3-element list", line_of(n));
  }
  try {
    return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
  } catch (const YAML::Exception&) {
    throw SchemaError(what + " must contain numbers", line_of(n));
  }
}

PathKind parse_kind(const YAML::Node& n) {
  const std::string s = n.as<std::string>();
  if (s == "waypoints") return PathKind::waypoints;
  if (s == "zigzag") return PathKind::zigzag;
  if (s == "loop") return PathKind::loop;
  if (s == "figure_eight") return PathKind::figure_eight;
  throw SchemaError("unknown path generator '" + s + "'", line_of(n));
}

void parse_path(const YAML::Node& node, PathSpec& p) {
  check_keys(node,
             {"generator", "speed", "knot_spacing", "waypoints", "legs", "leg_length",
              "heading_deg", "straight_length", "turn_radius", "laps", "lobe_radius"},
             "path");
  if (node["generator"]) p.kind = parse_kind(node["generator"]);
  read(node, "speed", p.speed);
  read(node, "knot_spacing", p.knot_spacing);
  read(node, "legs", p.legs);
  read(node, "leg_length", p.leg_length);
  read(node, "heading_deg", p.zigzag_heading_deg);
  read(node, "straight_length", p.straight_length);
  read(node, "turn_radius", p.turn_radius);
  read(node, "laps", p.laps);
  read(node, "lobe_radius", p.lobe_radius);
  if (const YAML::Node w = node["waypoints"]) {
    if (!w.IsSequence()) throw SchemaError("waypoints must be a list", line_of(w));
    p.waypoints.clear();
    for (const auto& item : w) p.waypoints.push_back(read_vec3(item, "waypoint"));
  }
}

void parse_imu(const YAML::Node& node, Scenario& s) {
  check_keys(node,
             {"gyro_density", "accel_density", "gyro_bias_walk", "accel_bias_walk",
              "initial_accel_bias", "initial_gyro_bias"},
             "imu");
  read(node, "gyro_density", s.noise.imu.gyro_density);
  read(node, "accel_density", s.noise.imu.accel_density);
  read(node, "gyro_bias_walk", s.noise.imu.gyro_bias_walk);
  read(node, "accel_bias_walk", s.noise.imu.accel_bias_walk);
  if (node["initial_accel_bias"]) {
    s.initial_bias.accel = read_vec3(node["initial_accel_bias"], "initial_accel_bias");
  }
  if (node["initial_gyro_bias"]) {
    s.initial_bias.gyro = read_vec3(node["initial_gyro_bias"], "initial_gyro_bias");
  }
}

void parse_noise(const YAML::Node& node, SensorNoise& n) {
  check_keys(node,
             {"mag_sigma", "mag_outlier_prob", "mag_outlier_magnitude", "flow_sigma",
              "height_sigma", "lidar_trans_sigma", "lidar_rot_sigma", "lidar_z_drift",
              "vio_trans_sigma", "vio_rot_sigma", "loop_trans_sigma", "loop_rot_sigma",
              "corrupted_trans_sigma", "corrupted_rot_sigma"},
             "noise");
  read(node, "mag_sigma", n.mag_sigma);
  read(node, "mag_outlier_prob", n.mag_outlier_prob);
  read(node, "mag_outlier_magnitude", n.mag_outlier_magnitude);
  read(node, "flow_sigma", n.flow_sigma);
  read(node, "height_sigma", n.height_sigma);
  read(node, "lidar_trans_sigma", n.lidar_trans_sigma);
  read(node, "lidar_rot_sigma", n.lidar_rot_sigma);
  read(node, "lidar_z_drift", n.lidar_z_drift);
  read(node, "vio_trans_sigma", n.vio_trans_sigma);
  read(node, "vio_rot_sigma", n.vio_rot_sigma);
  read(node, "loop_trans_sigma", n.loop_trans_sigma);
  read(node, "loop_rot_sigma", n.loop_rot_sigma);
  read(node, "corrupted_trans_sigma", n.corrupted_trans_sigma);
  read(node, "corrupted_rot_sigma", n.corrupted_rot_sigma);
}

DegradationWindow parse_window(const YAML::Node& node) {
  check_keys(node, {"sensor", "start", "end", "mode"}, "degradation entry");
  DegradationWindow w;
  if (!node["start"] || !node["end"] || !node["sensor"]) {
    throw SchemaError("degradation entry needs sensor, start and end", line_of(node));
  }
  read(node, "start", w.start);
  read(node, "end", w.end);
  const std::string sensor = node["sensor"].as<std::string>();
  if (sensor == "lidar") {
    w.sensor = DegradedSensor::lidar;
  } else if (sensor == "vio") {
    w.sensor = DegradedSensor::vio;
  } else {
    throw SchemaError("degradation sensor must be lidar or vio", line_of(node["sensor"]));
  }
  if (const YAML::Node m = node["mode"]) {
    const std::string mode = m.as<std::string>();
    if (mode == "absent") {
      w.mode = DegradationMode::absent;
    } else if (mode == "corrupted") {
      w.mode = DegradationMode::corrupted;
    } else {
      throw SchemaError("degradation mode must be absent or corrupted", line_of(m));
    }
  }
  return w;
}

bool divides(double fast, double slow) {
  const double ratio = fast / slow;
  return std::abs(ratio - std::round(ratio)) < 1e-9 && std::round(ratio) >= 1.0;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SchemaError(e.msg, e.mark.line + 1);
  }
  if (!root.IsMap()) throw SchemaError("scenario must be a mapping", 0);
  check_keys(root,
             {"seed", "duration", "gravity", "rates", "path", "imu", "noise", "loops",
              "degradation"},
             "scenario");

  Scenario s;
  if (!root["duration"]) throw SchemaError("missing required key 'duration'", line_of(root));
  read(root, "seed", s.seed);
  read(root, "duration", s.duration);
  read(root, "gravity", s.gravity);
  if (const YAML::Node r = root["rates"]) {
    check_keys(r, {"imu", "keyframe", "mag", "flow"}, "rates");
    read(r, "imu", s.imu_rate);
    read(r, "keyframe", s.keyframe_rate);
    read(r, "mag", s.mag_rate);
    read(r, "flow", s.flow_rate);
  }
  if (!root["path"]) throw SchemaError("missing required section 'path'", line_of(root));
  parse_path(root["path"], s.path);
  if (const YAML::Node n = root["imu"]) parse_imu(n, s);
  if (const YAML::Node n = root["noise"]) parse_noise(n, s.noise);
  if (const YAML::Node n = root["loops"]) {
    check_keys(n, {"radius", "min_age", "cooldown"}, "loops");
    read(n, "radius", s.loop_radius);
    read(n, "min_age", s.loop_min_age);
    read(n, "cooldown", s.loop_cooldown);
  }
  if (const YAML::Node n = root["degradation"]) {
    if (!n.IsSequence()) throw SchemaError("degradation must be a list", line_of(n));
    for (const auto& item : n) s.degradation.push_back(parse_window(item));
  }

  try {
    validate(s);
  } catch (const SchemaError& e) {
    // Attach the line of the section most likely at fault when none is known.
    if (e.line() > 0) throw;
    throw SchemaError(e.what(), line_of(root["duration"]));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what(), 0);
  }
}

void validate(const Scenario& s) {
  if (!(s.duration > 0.0)) throw SchemaError("duration must be > 0", 0);
  if (!(s.imu_rate > 0.0) || !(s.keyframe_rate > 0.0) || !(s.mag_rate > 0.0) ||
      !(s.flow_rate > 0.0)) {
    throw SchemaError("rates must be positive", 0);
  }
  if (s.imu_rate < 10.0) throw SchemaError("imu rate must be at least 10 Hz", 0);
  if (!divides(s.imu_rate, s.keyframe_rate) || !divides(s.imu_rate, s.mag_rate) ||
      !divides(s.imu_rate, s.flow_rate)) {
    throw SchemaError("keyframe, mag and flow rates must divide the imu rate", 0);
  }
  if (s.path.speed < 0.0) throw SchemaError("speed must be >= 0", 0);
  if (!(s.path.knot_spacing > 0.0)) throw SchemaError("knot_spacing must be > 0", 0);
  if (s.noise.mag_outlier_prob < 0.0 || s.noise.mag_outlier_prob > 1.0) {
    throw SchemaError("mag_outlier_prob must lie in [0, 1]", 0);
  }
  for (const DegradationWindow& w : s.degradation) {
    if (w.start < 0.0 || w.end > s.duration || w.start >= w.end) {
      throw SchemaError("degradation window must satisfy 0 <= start < end <= duration", 0);
    }
  }
  switch (s.path.kind) {
    case PathKind::waypoints:
      if (s.path.waypoints.empty()) throw SchemaError("waypoint path needs waypoints", 0);
      break;
    case PathKind::zigzag:
      if (s.path.legs < 1 || !(s.path.leg_length > 0.0)) {
        throw SchemaError("zigzag needs legs >= 1 and leg_length > 0", 0);
      }
      break;
    case PathKind::loop:
      if (!(s.path.turn_radius > 0.0) || s.path.straight_length < 0.0 || !(s.path.laps > 0.0)) {
        throw SchemaError("loop needs turn_radius > 0, straight_length >= 0, laps > 0", 0);
      }
      break;
    case PathKind::figure_eight:
      if (!(s.path.lobe_radius > 0.0) || !(s.path.laps > 0.0)) {
        throw SchemaError("figure_eight needs lobe_radius > 0 and laps > 0", 0);
      }
      break;
  }
}

}  // namespace polarnav::sim
