#include "scenes.hpp"

#include "polarnav/sim.hpp"

namespace acceptance {

std::filesystem::path source_path(const std::string& relative) {
  return std::filesystem::path(POLARNAV_SOURCE_DIR) / relative;
}

sim::Scenario bundled(const std::string& name, std::uint64_t seed) {
  sim::Scenario sc = sim::load_scenario(source_path("scenarios/" + name));
  sc.seed = seed;
  return sc;
}

EstimatorConfig lidar_imu_only() {
  EstimatorConfig c;
  c.use = FactorToggles{true, false, true, false, false, false};
  return c;
}

EstimatorConfig all_factors(bool with_vio) {
  EstimatorConfig c;
  c.use.vio = with_vio;
  return c;
}

std::vector<StampedPose> estimate_poses(const EstimatorResult& result) {
  std::vector<StampedPose> out;
  out.reserve(result.trajectory.size());
  for (const KeyframeEstimate& k : result.trajectory) out.push_back({k.t, k.state.pose});
  return out;
}

std::vector<StampedPose> truth_poses(const SensorLog& log) {
  std::vector<StampedPose> out;
  out.reserve(log.truth.size());
  for (const TruthSample& s : log.truth) out.push_back({s.t, s.state.pose});
  return out;
}

double ate(const SensorLog& log, const EstimatorResult& result, eval::AlignMode mode) {
  return eval::evaluate(estimate_poses(result), truth_poses(log), mode, 0.01).ate_rmse;
}

std::vector<Fixture> exact_fixtures() {
  std::vector<Fixture> out;
  out.push_back({"straight", sim::load_scenario(source_path("scenarios/straight_exact.yaml"))});

  sim::Scenario still;
  still.duration = 10.0;
  still.path.speed = 0.0;
  still.path.waypoints = {Vec3::Zero()};
  still.noise = sim::SensorNoise::none();
  out.push_back({"stationary", still});

  for (const char* name : {"zigzag_256m.yaml", "loop_480m_degraded.yaml"}) {
    sim::Scenario sc = bundled(name, 7);
    sc.noise = sim::SensorNoise::none();
    sc.initial_bias = ImuBias{};
    out.push_back({name, sc});
  }

  sim::Scenario eight;
  eight.duration = 60.0;
  eight.path.kind = sim::PathKind::figure_eight;
  eight.path.speed = 1.5;
  eight.path.lobe_radius = 8.0;
  eight.path.laps = 1.0;
  eight.noise = sim::SensorNoise::none();
  out.push_back({"figure_eight", eight});
  return out;
}

}  // namespace acceptance
