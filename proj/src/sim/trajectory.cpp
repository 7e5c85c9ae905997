#include "polarnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace polarnav::sim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCoincident = 1e-9;

// Samples a curve given by arc length at (at most) `spacing` intervals,
// always including both ends.
std::vector<Vec3> sample_curve(const std::function<Vec3(double)>& curve, double length,
                               double spacing) {
  const int steps = std::max(1, static_cast<int>(std::ceil(length / spacing - 1e-9)));
  std::vector<Vec3> out;
  out.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) out.push_back(curve(length * i / steps));
  return out;
}

std::vector<Vec3> densify(const std::vector<Vec3>& corners, double spacing) {
  std::vector<Vec3> out{corners.front()};
  for (std::size_t i = 1; i < corners.size(); ++i) {
    const Vec3 a = corners[i - 1];
    const Vec3 b = corners[i];
    const double len = (b - a).norm();
    if (len < kCoincident) {
      throw DegeneratePathError("coincident consecutive waypoints at index " +
                                std::to_string(i));
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-9)));
    for (int k = 1; k <= steps; ++k) out.push_back(a + (b - a) * (double(k) / steps));
  }
  return out;
}

Vec3 stadium(const PathSpec& p, double s) {
  const double S = p.straight_length;
  const double R = p.turn_radius;
  const double lap = 2.0 * S + 2.0 * kPi * R;
  s = std::fmod(s, lap);
  if (s < S) return {s, 0.0, 0.0};
  s -= S;
  if (s < kPi * R) {
    const double a = -kPi / 2 + s / R;
    return {S + R * std::cos(a), R + R * std::sin(a), 0.0};
  }
  s -= kPi * R;
  if (s < S) return {S - s, 2.0 * R, 0.0};
  s -= S;
  const double a = kPi / 2 + s / R;
  return {R * std::cos(a), R + R * std::sin(a), 0.0};
}

Vec3 figure_eight(const PathSpec& p, double s) {
  const double r = p.lobe_radius;
  const double lobe = 2.0 * kPi * r;
  s = std::fmod(s, 2.0 * lobe);
  if (s < lobe) {
    const double a = kPi + s / r;  // counter-clockwise around (r, 0)
    return {r + r * std::cos(a), r * std::sin(a), 0.0};
  }
  const double a = -(s - lobe) / r;  // clockwise around (-r, 0)
  return {-r + r * std::cos(a), r * std::sin(a), 0.0};
}

}  // namespace

std::vector<Vec3> path_waypoints(const PathSpec& spec) {
  switch (spec.kind) {
    case PathKind::waypoints:
      return spec.waypoints;
    case PathKind::zigzag: {
      const double h = spec.zigzag_heading_deg * kPi / 180.0;
      std::vector<Vec3> out{Vec3::Zero()};
      for (int leg = 0; leg < spec.legs; ++leg) {
        const double dir = (leg % 2 == 0) ? h : -h;
        out.push_back(out.back() + spec.leg_length * Vec3(std::cos(dir), std::sin(dir), 0.0));
      }
      return out;
    }
    case PathKind::loop: {
      const double lap = 2.0 * spec.straight_length + 2.0 * kPi * spec.turn_radius;
      return sample_curve([&](double s) { return stadium(spec, s); }, lap * spec.laps,
                          spec.knot_spacing);
    }
    case PathKind::figure_eight: {
      const double lap = 4.0 * kPi * spec.lobe_radius;
      return sample_curve([&](double s) { return figure_eight(spec, s); }, lap * spec.laps,
                          spec.knot_spacing);
    }
  }
  return {};
}

Trajectory::Trajectory(const PathSpec& spec) : speed_(spec.speed) {
  const std::vector<Vec3> corners = path_waypoints(spec);
  if (corners.empty()) throw DegeneratePathError("path has no waypoints");
  points_ = corners.size() == 1 ? corners : densify(corners, spec.knot_spacing);

  const std::size_t n = points_.size();
  knots_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    knots_[i] = knots_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }

  // Natural spline: tridiagonal system for the interior second derivatives.
  second_.assign(n, Vec3::Zero());
  if (n < 3) return;
  std::vector<double> diag(n, 0.0), upper(n, 0.0);
  std::vector<Vec3> rhs(n, Vec3::Zero());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = knots_[i] - knots_[i - 1];
    const double h1 = knots_[i + 1] - knots_[i];
    diag[i] = (h0 + h1) / 3.0;
    upper[i] = h1 / 6.0;
    rhs[i] = (points_[i + 1] - points_[i]) / h1 - (points_[i] - points_[i - 1]) / h0;
  }
  // Thomas algorithm; the lower diagonal entry of row i is h0 / 6.
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = (knots_[i] - knots_[i - 1]) / 6.0;
    const double m = lower / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    second_[i] = (rhs[i] - upper[i] * second_[i + 1]) / diag[i];
  }
}

Vec3 Trajectory::eval(double u, int derivative) const {
  if (points_.size() == 1) return derivative == 0 ? points_[0] : Vec3::Zero();
  u = std::clamp(u, 0.0, knots_.back());
  auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
  std::size_t i = static_cast<std::size_t>(std::distance(knots_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, knots_.size() - 1) - 1;
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - u) / h;
  const double b = (u - knots_[i]) / h;
  const Vec3& p0 = points_[i];
  const Vec3& p1 = points_[i + 1];
  const Vec3& m0 = second_[i];
  const Vec3& m1 = second_[i + 1];
  switch (derivative) {
    case 0:
      return a * p0 + b * p1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * (h * h / 6.0);
    case 1:
      return (p1 - p0) / h + (-(3.0 * a * a - 1.0) * m0 + (3.0 * b * b - 1.0) * m1) * (h / 6.0);
    default:
      return a * m0 + b * m1;
  }
}

double Trajectory::arc_length() const {
  // 5-point Gauss-Legendre per spline interval.
  static constexpr double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                                  -0.9061798459386640, 0.9061798459386640};
  static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                  0.2369268850561891, 0.2369268850561891};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const double mid = 0.5 * (knots_[i] + knots_[i + 1]);
    const double half = 0.5 * (knots_[i + 1] - knots_[i]);
    for (int q = 0; q < 5; ++q) total += w[q] * half * eval(mid + half * x[q], 1).norm();
  }
  return total;
}

double Trajectory::travel_time() const {
  if (speed_ <= 0.0 || points_.size() == 1) return 0.0;
  return parameter_length() / speed_;
}

Kinematics Trajectory::at(double t) const {
  Kinematics k;
  const bool moving = speed_ > 0.0 && points_.size() > 1;
  const double u = moving ? std::min(speed_ * t, parameter_length()) : 0.0;
  k.position = eval(u, 0);
  const Vec3 d1 = eval(u, 1);
  const Vec3 d2 = eval(u, 2);
  const double planar = d1.x() * d1.x() + d1.y() * d1.y();
  k.yaw = planar > 0.0 ? std::atan2(d1.y(), d1.x()) : 0.0;
  if (!moving) return k;
  k.velocity = d1 * speed_;
  k.acceleration = d2 * (speed_ * speed_);
  if (planar > 0.0) k.yaw_rate = (d1.x() * d2.y() - d1.y() * d2.x()) / planar * speed_;
  return k;
}

TruthStream generate_truth(const Scenario& scenario) {
  validate(scenario);
  const Trajectory traj(scenario.path);
  const double travel = traj.travel_time();
  const double span = travel > 0.0 ? std::min(scenario.duration, travel) : scenario.duration;
  const int n = static_cast<int>(std::floor(span * scenario.imu_rate + 1e-9)) + 1;
  if (n < 2) throw DegeneratePathError("path is shorter than one IMU period");

  const Vec3 g = scenario.gravity_vector();
  TruthStream out;
  out.commands.reserve(n);
  out.truth.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double t = k / scenario.imu_rate;
    const Kinematics kin = traj.at(t);
    const Rotation3 r = from_yaw_pitch_roll(kin.yaw, 0.0, 0.0);
    out.commands.push_back({t, Vec3(0.0, 0.0, kin.yaw_rate), r.inverse() * (kin.acceleration - g)});
    if (k == 0) {
      NavState s;
      s.pose = Pose3{r, kin.position};
      s.velocity = kin.velocity;
      out.truth.push_back({t, s});
    }
  }

  const ImuNoise silent{0.0, 0.0, 0.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const PreintegratedDelta d =
        integrate(std::span<const ImuSample>(out.commands.data() + k - 1, 2), ImuBias{}, silent);
    out.truth.push_back({out.commands[k].t, predict(out.truth.back().state, d, g)});
  }
  for (TruthSample& s : out.truth) {
    s.state.accel_bias = scenario.initial_bias.accel;
    s.state.gyro_bias = scenario.initial_bias.gyro;
  }
  return out;
}

}  // namespace polarnav::sim
