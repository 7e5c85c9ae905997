#include "polarnav/cli.hpp"

#include "polarnav/errors.hpp"
#include "polarnav/trajectory_io.hpp"

#include <yaml-cpp/yaml.h>

#include <set>

namespace polarnav::cli {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

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

void positive(const YAML::Node& map, const char* key, double value) {
  if (map[key] && !(value > 0.0)) {
    throw SchemaError(std::string("'") + key + "' must be positive", line_of(map[key]));
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SchemaError(e.msg, e.mark.line + 1);
  }
  RunConfig c;
  if (root.IsNull()) return c;
  check_keys(root,
             {"scenario", "output", "seeds", "keyframe_rate", "window", "mag_gate",
              "gate_enabled", "factors", "noise", "huber", "solver", "corners"},
             "run config");
  EstimatorConfig& e = c.estimator;

  if (root["scenario"]) c.scenario = root["scenario"].as<std::string>();
  if (root["output"]) c.output = root["output"].as<std::string>();
  if (const YAML::Node s = root["seeds"]) {
    if (!s.IsSequence()) throw SchemaError("seeds must be a list", line_of(s));
    for (const auto& item : s) {
      try {
        c.seeds.push_back(item.as<std::uint64_t>());
      } catch (const YAML::Exception&) {
        throw SchemaError("seeds must be non-negative integers", line_of(item));
      }
    }
  }
  read(root, "keyframe_rate", e.keyframe_rate);
  positive(root, "keyframe_rate", e.keyframe_rate);
  int window = static_cast<int>(e.window);
  read(root, "window", window);
  if (window < 2) throw SchemaError("window must be at least 2", line_of(root["window"]));
  e.window = static_cast<std::size_t>(window);
  read(root, "mag_gate", e.mag_gate);
  if (root["mag_gate"] && !(e.mag_gate >= 0.0)) {
    throw SchemaError("mag_gate must be >= 0", line_of(root["mag_gate"]));
  }
  read(root, "gate_enabled", e.gate_enabled);

  if (const YAML::Node f = root["factors"]) {
    check_keys(f, {"lidar", "vio", "loop", "mag", "flow_velocity", "height"}, "factors");
    read(f, "lidar", e.use.lidar);
    read(f, "vio", e.use.vio);
    read(f, "loop", e.use.loop);
    read(f, "mag", e.use.mag);
    read(f, "flow_velocity", e.use.flow_velocity);
    read(f, "height", e.use.height);
  }
  if (const YAML::Node n = root["noise"]) {
    check_keys(n,
               {"gyro_density", "accel_density", "gyro_bias_walk", "accel_bias_walk",
                "mag_sigma", "flow_sigma", "height_sigma", "lidar_trans_sigma",
                "lidar_rot_sigma", "vio_trans_sigma", "vio_rot_sigma", "loop_trans_sigma",
                "loop_rot_sigma"},
               "noise");
    MeasurementNoise& m = e.noise;
    const std::pair<const char*, double*> fields[] = {
        {"gyro_density", &m.imu.gyro_density},
        {"accel_density", &m.imu.accel_density},
        {"gyro_bias_walk", &m.imu.gyro_bias_walk},
        {"accel_bias_walk", &m.imu.accel_bias_walk},
        {"mag_sigma", &m.mag_sigma},
        {"flow_sigma", &m.flow_sigma},
        {"height_sigma", &m.height_sigma},
        {"lidar_trans_sigma", &m.lidar_trans_sigma},
        {"lidar_rot_sigma", &m.lidar_rot_sigma},
        {"vio_trans_sigma", &m.vio_trans_sigma},
        {"vio_rot_sigma", &m.vio_rot_sigma},
        {"loop_trans_sigma", &m.loop_trans_sigma},
        {"loop_rot_sigma", &m.loop_rot_sigma},
    };
    for (const auto& [key, target] : fields) {
      read(n, key, *target);
      positive(n, key, *target);
    }
  }
  if (const YAML::Node h = root["huber"]) {
    check_keys(h, {"lidar", "vio", "loop", "mag", "flow_velocity", "height"}, "huber");
    read(h, "lidar", e.huber.lidar);
    read(h, "vio", e.huber.vio);
    read(h, "loop", e.huber.loop);
    read(h, "mag", e.huber.mag);
    read(h, "flow_velocity", e.huber.flow_velocity);
    read(h, "height", e.huber.height);
  }
  if (const YAML::Node s = root["solver"]) {
    check_keys(s,
               {"max_iterations", "relative_cost_tolerance", "step_tolerance", "initial_lambda",
                "parallel_linearization"},
               "solver");
    read(s, "max_iterations", e.solver.max_iterations);
    if (e.solver.max_iterations < 1) {
      throw SchemaError("max_iterations must be >= 1", line_of(s["max_iterations"]));
    }
    read(s, "relative_cost_tolerance", e.solver.relative_cost_tolerance);
    read(s, "step_tolerance", e.solver.step_tolerance);
    read(s, "initial_lambda", e.solver.initial_lambda);
    positive(s, "initial_lambda", e.solver.initial_lambda);
    read(s, "parallel_linearization", e.solver.parallel_linearization);
  }
  if (const YAML::Node k = root["corners"]) {
    check_keys(k, {"quality", "max_corners", "min_distance"}, "corners");
    read(k, "quality", c.corners.quality_level);
    if (!(c.corners.quality_level > 0.0 && c.corners.quality_level < 1.0)) {
      throw SchemaError("corner quality must lie in (0, 1)", line_of(k["quality"]));
    }
    read(k, "max_corners", c.corners.max_corners);
    read(k, "min_distance", c.corners.min_distance);
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return parse_run_config(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what(), 0);
  }
}

void check_observable(const FactorToggles& use) {
  if (!use.lidar && !use.vio) {
    throw DataError("configuration disables both lidar and vio odometry; the run is unobservable");
  }
}

}  // namespace polarnav::cli
