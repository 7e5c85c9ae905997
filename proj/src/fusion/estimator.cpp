#include "polarnav/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

namespace polarnav {

namespace {

constexpr int kConsensusSamples = 5;
constexpr double kUnknownVelocitySigma = 1.0;
constexpr double kOdomVelocitySigma = 0.5;

void check(const EstimatorConfig& c) {
  if (!(c.keyframe_rate > 0.0)) throw std::invalid_argument("keyframe rate must be positive");
  if (c.window < 2) throw std::invalid_argument("window must hold at least two keyframes");
  if (!(c.mag_gate >= 0.0)) throw std::invalid_argument("mag gate must be non-negative");
  const MeasurementNoise& n = c.noise;
  for (double s : {n.mag_sigma, n.flow_sigma, n.height_sigma, n.lidar_trans_sigma,
                   n.lidar_rot_sigma, n.vio_trans_sigma, n.vio_rot_sigma, n.loop_trans_sigma,
                   n.loop_rot_sigma, n.imu.gyro_density, n.imu.accel_density,
                   n.imu.gyro_bias_walk, n.imu.accel_bias_walk}) {
    if (!(s > 0.0)) throw std::invalid_argument("noise sigmas must be positive");
  }
}

Mat6 odom_information(double rot_sigma, double trans_sigma) {
  Mat6 info = Mat6::Zero();
  info.diagonal() << Vec3::Constant(1.0 / (rot_sigma * rot_sigma)),
      Vec3::Constant(1.0 / (trans_sigma * trans_sigma));
  return info;
}

// Index of the element of `times` nearest to t, if within tol.
std::optional<std::size_t> nearest(const std::vector<double>& times, double t, double tol) {
  if (times.empty()) return std::nullopt;
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  std::size_t best = times.size();
  double best_dt = tol;
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  for (std::size_t c : {hi > 0 ? hi - 1 : hi, hi}) {
    if (c >= times.size()) continue;
    const double d = std::abs(times[c] - t);
    if (d <= best_dt && (best == times.size() || d < best_dt)) {
      best = c;
      best_dt = d;
    }
  }
  if (best == times.size()) return std::nullopt;
  return best;
}

template <typename T>
std::vector<double> times_of(const std::vector<T>& samples) {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const T& s : samples) t.push_back(s.t);
  return t;
}

// Heading at the first IMU sample implied by each of the first magnetometer
// samples (level platform, gyro integrated back). The earliest sample that
// agrees with at least two others within the gate wins; the first sample is
// the fallback when no such agreement exists.
double initial_heading(const SensorLog& log, double gate) {
  const int count = std::min<int>(kConsensusSamples, static_cast<int>(log.mag.size()));
  std::vector<double> implied;
  for (int m = 0; m < count; ++m) {
    double turned = 0.0;
    for (std::size_t k = 1; k < log.imu.size() && log.imu[k].t <= log.mag[m].t; ++k) {
      const double dt = log.imu[k].t - log.imu[k - 1].t;
      turned += 0.5 * (log.imu[k].gyro.z() + log.imu[k - 1].gyro.z()) * dt;
    }
    implied.push_back(wrap_angle(log.mag[m].heading - turned));
  }
  for (int a = 0; a < count; ++a) {
    int agree = 0;
    for (int b = 0; b < count; ++b) {
      if (a != b && std::abs(wrap_angle(implied[a] - implied[b])) <= gate) ++agree;
    }
    if (agree >= 2) return implied[a];
  }
  return implied.front();
}

struct OdomLink {
  std::size_t from = 0;  // keyframe index
  Pose3 measured;
  OdomSource source = OdomSource::lidar;
};

}  // namespace

EstimatorResult run_estimator(const SensorLog& log, const EstimatorConfig& config) {
  check(config);
  if (log.imu.size() < 2) throw EmptyLogError("log holds fewer than two IMU samples");

  std::vector<double> gaps;
  for (std::size_t k = 1; k < log.imu.size() && k <= 64; ++k) {
    gaps.push_back(log.imu[k].t - log.imu[k - 1].t);
  }
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double imu_dt = gaps[gaps.size() / 2];
  if (!(imu_dt > 0.0)) throw DataError("IMU timestamps must increase");
  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(1.0 / (imu_dt * config.keyframe_rate))));

  std::vector<std::size_t> kf_index;
  for (std::size_t k = 0; k < log.imu.size(); k += stride) kf_index.push_back(k);
  std::vector<double> kf_time;
  for (std::size_t k : kf_index) kf_time.push_back(log.imu[k].t);
  const double half = 0.5 / config.keyframe_rate;

  // Odometry links grouped by the keyframe they end at.
  std::map<std::size_t, std::vector<OdomLink>> links;
  auto add_links = [&](const std::vector<OdomMeasurement>& list, OdomSource source) {
    for (const OdomMeasurement& m : list) {
      const auto a = nearest(kf_time, m.t_start, half);
      const auto b = nearest(kf_time, m.t_end, half);
      if (!a || !b || *a >= *b) continue;
      links[*b].push_back({*a, m.relative, source});
    }
  };
  if (config.use.lidar) add_links(log.lidar, OdomSource::lidar);
  if (config.use.vio) add_links(log.vio, OdomSource::vio);
  if (config.use.loop) add_links(log.loops, OdomSource::loop);

  const std::vector<double> mag_time = times_of(log.mag);
  const std::vector<double> flow_time = times_of(log.flow);
  const MeasurementNoise& nz = config.noise;

  EstimatorResult result;
  Graph graph(config.window);
  std::vector<NavState> history(kf_index.size());

  // Initial state: level attitude, heading from the magnetometer, height
  // from the range sensor and velocity from flow or the first odometry.
  NavState x0;
  double yaw_sigma = 0.01;
  if (config.use.mag && !log.mag.empty()) {
    result.initial_heading = initial_heading(log, config.mag_gate);
    yaw_sigma = nz.mag_sigma;
  }
  x0.pose.rotation = from_yaw_pitch_roll(result.initial_heading, 0.0, 0.0);
  const auto flow0 = nearest(flow_time, kf_time[0], half);
  if (config.use.height && flow0) {
    x0.pose.translation.z() = log.flow[*flow0].height;
  }
  Vec3 vel_sigma = Vec3::Constant(kUnknownVelocitySigma);
  if (config.use.flow_velocity && flow0) {
    const Vec2 v = log.flow[*flow0].velocity;
    x0.velocity = x0.pose.rotation * Vec3(v.x(), v.y(), 0.0);
    vel_sigma = Vec3(nz.flow_sigma, nz.flow_sigma, kOdomVelocitySigma);
  } else if (links.contains(1)) {
    for (const OdomLink& l : links.at(1)) {
      if (l.from != 0 || l.source == OdomSource::loop) continue;
      x0.velocity = x0.pose.rotation * l.measured.translation / (kf_time[1] - kf_time[0]);
      vel_sigma = Vec3::Constant(kOdomVelocitySigma);
      break;
    }
  }

  PriorFactor prior;
  prior.key = 0;
  prior.mean = x0;
  Vec15 sigma;
  sigma << 0.01, 0.01, yaw_sigma, Vec3::Constant(1e-3), vel_sigma, Vec3::Constant(0.05),
      Vec3::Constant(0.005);
  prior.information = sigma.cwiseInverse().cwiseAbs2().asDiagonal();
  graph.add_state(0, x0);
  graph.add_factor(prior);

  auto record = [&](const std::vector<std::pair<Key, NavState>>& removed) {
    for (const auto& [key, state] : removed) {
      history[key] = state;
      result.trajectory.push_back({kf_time[key], state});
    }
  };

  for (std::size_t j = 0; j < kf_index.size(); ++j) {
    const Key key = j;
    if (j > 0) {
      const NavState& prev = graph.state(j - 1);
      const ImuBias bias{prev.accel_bias, prev.gyro_bias};
      const std::span<const ImuSample> samples(log.imu.data() + kf_index[j - 1],
                                               kf_index[j] - kf_index[j - 1] + 1);
      const PreintegratedDelta delta = integrate(samples, bias, nz.imu);
      graph.add_state(key, predict(prev, delta, config.gravity));
      graph.add_factor(make_imu_factor(j - 1, key, delta, nz.imu, config.gravity));
    }

    if (const auto it = links.find(j); it != links.end()) {
      for (const OdomLink& l : it->second) {
        RelPoseFactor f;
        f.i = l.from;
        f.j = key;
        f.measured = l.measured;
        f.source = l.source;
        switch (l.source) {
          case OdomSource::lidar:
            f.information = odom_information(nz.lidar_rot_sigma, nz.lidar_trans_sigma);
            f.huber_k = config.huber.lidar;
            break;
          case OdomSource::vio:
            f.information = odom_information(nz.vio_rot_sigma, nz.vio_trans_sigma);
            f.huber_k = config.huber.vio;
            break;
          case OdomSource::loop:
            f.information = odom_information(nz.loop_rot_sigma, nz.loop_trans_sigma);
            f.huber_k = config.huber.loop;
            break;
        }
        if (!graph.has_state(l.from)) f.anchor = history[l.from].pose;
        graph.add_factor(f);
      }
    }

    if (config.use.mag) {
      if (const auto m = nearest(mag_time, kf_time[j], half)) {
        MagHeadingFactor f;
        f.key = key;
        f.heading = log.mag[*m].heading;
        f.information = 1.0 / (nz.mag_sigma * nz.mag_sigma);
        f.gate = config.mag_gate;
        f.huber_k = config.huber.mag;
        const double innovation = heading_innovation(graph.state(key).rotation(), f.heading);
        const bool accepted = !config.gate_enabled || gate_heading(f, graph.state(key));
        result.gating.push_back({log.mag[*m].t, innovation, accepted});
        if (accepted) graph.add_factor(f);
      }
    }

    if (const auto fl = nearest(flow_time, kf_time[j], half)) {
      const FlowSample& s = log.flow[*fl];
      if (config.use.flow_velocity) {
        FlowVelocityFactor f;
        f.key = key;
        f.velocity = s.velocity;
        f.information = Mat2::Identity() / (nz.flow_sigma * nz.flow_sigma);
        f.huber_k = config.huber.flow_velocity;
        graph.add_factor(f);
      }
      if (config.use.height) {
        HeightFactor f;
        f.key = key;
        f.height = s.height;
        f.information = 1.0 / (nz.height_sigma * nz.height_sigma);
        f.huber_k = config.huber.height;
        graph.add_factor(f);
      }
    }

    const SolverStats stats = optimize(graph, config.solver);
    ++result.solves;
    result.total_iterations += stats.iterations;
    if (!stats.converged()) ++result.nonconverged;
    record(graph.slide_window());
  }

  std::vector<std::pair<Key, NavState>> rest(graph.states().begin(), graph.states().end());
  record(rest);
  return result;
}

}  // namespace polarnav
