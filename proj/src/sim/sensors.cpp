#include "polarnav/rng.hpp"
#include "polarnav/sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace polarnav::sim {

namespace {

enum Stream : std::uint64_t {
  kGyroNoise = 1,
  kAccelNoise,
  kGyroWalk,
  kAccelWalk,
  kMag,
  kFlow,
  kLidar,
  kVio,
  kLoop,
};

Vec3 normal3(const CounterRng& rng, std::uint64_t index, std::uint32_t first_lane = 0) {
  return {rng.normal(index, first_lane), rng.normal(index, first_lane + 1),
          rng.normal(index, first_lane + 2)};
}

int ratio(double fast, double slow) { return static_cast<int>(std::lround(fast / slow)); }

const DegradationWindow* window_at(const Scenario& s, DegradedSensor sensor, double t) {
  for (const DegradationWindow& w : s.degradation) {
    if (w.sensor == sensor && t >= w.start && t <= w.end) return &w;
  }
  return nullptr;
}

Pose3 perturb(const Pose3& rel, const CounterRng& rng, std::uint64_t index, double rot_sigma,
              double trans_sigma) {
  Pose3 out;
  out.rotation = rel.rotation * so3_exp(rot_sigma * normal3(rng, index, 0));
  out.translation = rel.translation + trans_sigma * normal3(rng, index, 3);
  return out;
}

}  // namespace

SensorLog synthesize_sensors(const TruthStream& stream, const Scenario& scenario) {
  const SensorNoise& nz = scenario.noise;
  const std::uint64_t seed = scenario.seed;
  const CounterRng gyro_noise(seed, kGyroNoise), accel_noise(seed, kAccelNoise);
  const CounterRng gyro_walk(seed, kGyroWalk), accel_walk(seed, kAccelWalk);
  const CounterRng mag_rng(seed, kMag), flow_rng(seed, kFlow);
  const CounterRng lidar_rng(seed, kLidar), vio_rng(seed, kVio), loop_rng(seed, kLoop);

  SensorLog log;
  log.truth = stream.truth;
  const std::size_t n = stream.commands.size();
  const double dt = 1.0 / scenario.imu_rate;
  const double gyro_sigma = nz.imu.gyro_density * std::sqrt(scenario.imu_rate);
  const double accel_sigma = nz.imu.accel_density * std::sqrt(scenario.imu_rate);

  ImuBias bias = scenario.initial_bias;
  log.imu.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      bias.gyro += nz.imu.gyro_bias_walk * std::sqrt(dt) * normal3(gyro_walk, k);
      bias.accel += nz.imu.accel_bias_walk * std::sqrt(dt) * normal3(accel_walk, k);
    }
    log.truth[k].state.gyro_bias = bias.gyro;
    log.truth[k].state.accel_bias = bias.accel;
    const ImuSample& c = stream.commands[k];
    log.imu.push_back({c.t, c.gyro + bias.gyro + gyro_sigma * normal3(gyro_noise, k),
                       c.accel + bias.accel + accel_sigma * normal3(accel_noise, k)});
  }

  const int mag_every = ratio(scenario.imu_rate, scenario.mag_rate);
  const double out_min = std::min(nz.mag_outlier_magnitude, std::numbers::pi);
  for (std::size_t k = 0; k < n; k += mag_every) {
    const TruthSample& s = log.truth[k];
    const double yaw = yaw_of(s.state.rotation());
    MagSample m{s.t, wrap_angle(yaw + nz.mag_sigma * mag_rng.normal(k)), false};
    if (nz.mag_outlier_prob > 0.0 && mag_rng.uniform(k, 2) < nz.mag_outlier_prob) {
      const double sign = mag_rng.uniform(k, 3) < 0.5 ? -1.0 : 1.0;
      const double dev = out_min + mag_rng.uniform(k, 4) * (std::numbers::pi - out_min);
      m.heading = wrap_angle(yaw + sign * dev);
      m.outlier = true;
    }
    log.mag.push_back(m);
  }

  const int flow_every = ratio(scenario.imu_rate, scenario.flow_rate);
  for (std::size_t k = 0; k < n; k += flow_every) {
    const NavState& s = log.truth[k].state;
    const Vec3 vb = s.rotation().inverse() * s.velocity;
    FlowSample f;
    f.t = log.truth[k].t;
    f.velocity = vb.head<2>() + nz.flow_sigma * Vec2(flow_rng.normal(k, 0), flow_rng.normal(k, 1));
    f.height = s.position().z() + nz.height_sigma * flow_rng.normal(k, 2);
    log.flow.push_back(f);
  }

  const int kf_every = ratio(scenario.imu_rate, scenario.keyframe_rate);
  std::vector<std::size_t> keyframes;
  for (std::size_t k = 0; k < n; k += kf_every) keyframes.push_back(k);

  for (std::size_t j = 1; j < keyframes.size(); ++j) {
    const TruthSample& a = log.truth[keyframes[j - 1]];
    const TruthSample& b = log.truth[keyframes[j]];
    const double mid = 0.5 * (a.t + b.t);
    const Pose3 rel = a.state.pose.inverse() * b.state.pose;

    const DegradationWindow* lw = window_at(scenario, DegradedSensor::lidar, mid);
    if (!lw || lw->mode == DegradationMode::corrupted) {
      const bool bad = lw != nullptr;
      Pose3 meas = perturb(rel, lidar_rng, j, bad ? nz.corrupted_rot_sigma : nz.lidar_rot_sigma,
                           bad ? nz.corrupted_trans_sigma : nz.lidar_trans_sigma);
      const double travelled = (b.state.position() - a.state.position()).norm();
      meas.translation +=
          a.state.rotation().inverse() * Vec3(0.0, 0.0, nz.lidar_z_drift * travelled);
      log.lidar.push_back({a.t, b.t, meas});
    }

    const DegradationWindow* vw = window_at(scenario, DegradedSensor::vio, mid);
    if (!vw || vw->mode == DegradationMode::corrupted) {
      const bool bad = vw != nullptr;
      log.vio.push_back({a.t, b.t,
                         perturb(rel, vio_rng, j, bad ? nz.corrupted_rot_sigma : nz.vio_rot_sigma,
                                 bad ? nz.corrupted_trans_sigma : nz.vio_trans_sigma)});
    }
  }

  // Loop closures: nearest sufficiently old keyframe within the radius.
  double last_loop = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    const TruthSample& b = log.truth[keyframes[j]];
    if (b.t - last_loop < scenario.loop_cooldown) continue;
    const DegradationWindow* lw = window_at(scenario, DegradedSensor::lidar, b.t);
    if (lw && lw->mode == DegradationMode::absent) continue;
    std::size_t best = keyframes.size();
    double best_dist = scenario.loop_radius;
    for (std::size_t i = 0; i < j; ++i) {
      const TruthSample& a = log.truth[keyframes[i]];
      if (b.t - a.t < scenario.loop_min_age) break;  // later keyframes are younger still
      const double d = (b.state.position() - a.state.position()).norm();
      if (d <= best_dist && (best == keyframes.size() || d < best_dist)) {
        best = i;
        best_dist = d;
      }
    }
    if (best == keyframes.size()) continue;
    const TruthSample& a = log.truth[keyframes[best]];
    const Pose3 rel = a.state.pose.inverse() * b.state.pose;
    log.loops.push_back(
        {a.t, b.t, perturb(rel, loop_rng, j, nz.loop_rot_sigma, nz.loop_trans_sigma)});
    last_loop = b.t;
  }
  return log;
}

SensorLog simulate(const Scenario& scenario) {
  return synthesize_sensors(generate_truth(scenario), scenario);
}

}  // namespace polarnav::sim
