#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polarnav/errors.hpp"
#include "polarnav/polarimetry.hpp"
#include "polarnav/rng.hpp"
#include "polarnav/sim.hpp"
#include "test_support.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace polarnav;
using namespace polarnav::sim;

namespace {

Scenario straight_scenario(double length, double speed) {
  Scenario sc;
  sc.duration = length / speed;
  sc.path.kind = PathKind::waypoints;
  sc.path.speed = speed;
  sc.path.waypoints = {Vec3::Zero(), Vec3(length, 0, 0)};
  sc.noise = SensorNoise::none();
  return sc;
}

Scenario zigzag_scenario(std::uint64_t seed) {
  Scenario sc;
  sc.seed = seed;
  sc.duration = 30.0;
  sc.path.kind = PathKind::zigzag;
  sc.path.speed = 2.0;
  sc.path.legs = 3;
  sc.path.leg_length = 20.0;
  sc.noise.mag_outlier_prob = 0.1;
  return sc;
}

int schema_line(const std::string& yaml) {
  try {
    parse_scenario(yaml);
  } catch (const SchemaError& e) {
    return e.line();
  }
  return -1;
}

bool same_pose(const Pose3& a, const Pose3& b) {
  return a.translation == b.translation &&
         a.rotation.quaternion().coeffs() == b.rotation.quaternion().coeffs();
}

}  // namespace

TEST_CASE("scenario files parse with defaults") {
  const Scenario sc = parse_scenario(R"(
seed: 9
duration: 12.5
rates: {imu: 100, keyframe: 5}
path:
  generator: zigzag
  speed: 1.5
  legs: 4
  leg_length: 8
noise:
  mag_outlier_prob: 0.2
  lidar_z_drift: 0.01
degradation:
  - {sensor: vio, start: 1, end: 2}
  - {sensor: lidar, start: 3, end: 4, mode: corrupted}
)");
  CHECK(sc.seed == 9);
  CHECK(sc.duration == 12.5);
  CHECK(sc.imu_rate == 100.0);
  CHECK(sc.mag_rate == 10.0);
  CHECK(sc.path.kind == PathKind::zigzag);
  CHECK(sc.path.legs == 4);
  CHECK(sc.noise.mag_outlier_prob == 0.2);
  CHECK(sc.noise.flow_sigma == SensorNoise{}.flow_sigma);
  REQUIRE(sc.degradation.size() == 2);
  CHECK(sc.degradation[0].sensor == DegradedSensor::vio);
  CHECK(sc.degradation[0].mode == DegradationMode::absent);
  CHECK(sc.degradation[1].mode == DegradationMode::corrupted);
}

TEST_CASE("scenario schema errors carry line numbers") {
  CHECK(schema_line("duration: 10\npath:\n  generator: zigzag\n  bogus: 1\n") == 4);
  CHECK(schema_line("duration: 10\npath: {generator: spiral}\n") == 2);
  CHECK(schema_line("duration: 0\npath: {generator: zigzag}\n") >= 0);
  CHECK(schema_line("duration: ten\npath: {generator: zigzag}\n") == 1);
  CHECK(schema_line("duration: 5\n") >= 0);
  CHECK(schema_line("duration: 5\npath: {generator: zigzag}\nnoise: {mag_outlier_prob: 2}\n") >= 0);
  CHECK(schema_line("duration: 5\npath: {generator: zigzag}\nrates: {imu: 200, mag: 7}\n") >= 0);
  CHECK(schema_line(
            "duration: 5\npath: {generator: zigzag}\ndegradation:\n  - {sensor: lidar, start: 4, end: 9}\n") >=
        0);
  CHECK(schema_line("duration: 5\npath: {generator: zigzag\n") > 0);
  CHECK_THROWS_AS(parse_scenario("duration: 0\npath: {generator: zigzag}\n"), SchemaError);
}

TEST_CASE("the bundled scenarios load") {
  for (const char* name : {"zigzag_256m.yaml", "loop_480m_degraded.yaml", "straight_exact.yaml"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_scenario(std::filesystem::path(POLARNAV_SOURCE_DIR) / "scenarios" / name));
  }
}

TEST_CASE("counter RNG draws are pure functions of their coordinates") {
  const CounterRng a(7, 3), b(7, 3), other_stream(7, 4), other_seed(8, 3);
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    CHECK(a.bits(i, 1) == b.bits(i, 1));
    const double u = a.uniform(i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = a.normal(i);
    mean += z;
    var += z * z;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
  CHECK(a.bits(0) != other_stream.bits(0));
  CHECK(a.bits(0) != other_seed.bits(0));
  CHECK(a.bits(0, 0) != a.bits(0, 1));
}

TEST_CASE("straight line of 10 m at 1 m/s") {
  const TruthStream ts = generate_truth(straight_scenario(10.0, 1.0));
  CHECK(ts.truth.size() == 2001);
  CHECK(ts.truth.back().t == doctest::Approx(10.0));
  CHECK((ts.truth.back().state.position() - Vec3(10, 0, 0)).norm() < 1e-9);
}

TEST_CASE("zigzag path length matches the leg sum") {
  PathSpec p;
  p.kind = PathKind::zigzag;
  p.legs = 6;
  p.leg_length = 20.0;
  const Trajectory traj(p);
  CHECK(traj.arc_length() == doctest::Approx(120.0).epsilon(0.01));
}

TEST_CASE("a single waypoint at zero speed is stationary") {
  Scenario sc = straight_scenario(1.0, 1.0);
  sc.path.speed = 0.0;
  sc.path.waypoints = {Vec3(1, 2, 0)};
  sc.duration = 3.0;
  const TruthStream ts = generate_truth(sc);
  CHECK(ts.truth.size() == 601);
  for (const TruthSample& s : ts.truth) {
    CHECK((s.state.position() - Vec3(1, 2, 0)).norm() < 1e-12);
    CHECK(s.state.velocity.norm() < 1e-12);
  }
}

TEST_CASE("coincident waypoints are rejected") {
  PathSpec p;
  p.waypoints = {Vec3::Zero(), Vec3(5, 0, 0), Vec3(5, 0, 0), Vec3(5, 5, 0)};
  CHECK_THROWS_AS(Trajectory{p}, DegeneratePathError);
}

TEST_CASE("truth velocity agrees with finite differences of position") {
  for (PathKind kind : {PathKind::zigzag, PathKind::loop, PathKind::figure_eight}) {
    Scenario sc = zigzag_scenario(1);
    sc.path.kind = kind;
    sc.path.turn_radius = 10.0;
    sc.path.straight_length = 20.0;
    sc.path.laps = 1.0;
    const TruthStream ts = generate_truth(sc);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < ts.truth.size(); ++k) {
      const Vec3 fd = (ts.truth[k + 1].state.position() - ts.truth[k - 1].state.position()) /
                      (ts.truth[k + 1].t - ts.truth[k - 1].t);
      worst = std::max(worst, (fd - ts.truth[k].state.velocity).norm());
    }
    CAPTURE(static_cast<int>(kind));
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("the same seed gives bit-identical logs") {
  const SensorLog a = simulate(zigzag_scenario(4));
  const SensorLog b = simulate(zigzag_scenario(4));
  REQUIRE(a.imu.size() == b.imu.size());
  for (std::size_t k = 0; k < a.imu.size(); ++k) {
    CHECK(a.imu[k].gyro == b.imu[k].gyro);
    CHECK(a.imu[k].accel == b.imu[k].accel);
  }
  REQUIRE(a.mag.size() == b.mag.size());
  for (std::size_t k = 0; k < a.mag.size(); ++k) CHECK(a.mag[k].heading == b.mag[k].heading);
  REQUIRE(a.lidar.size() == b.lidar.size());
  for (std::size_t k = 0; k < a.lidar.size(); ++k) CHECK(same_pose(a.lidar[k].relative, b.lidar[k].relative));

  const SensorLog c = simulate(zigzag_scenario(5));
  CHECK(a.imu[10].gyro != c.imu[10].gyro);
}

TEST_CASE("streams are independent of each other's settings") {
  Scenario base = zigzag_scenario(6);
  Scenario louder = base;
  louder.noise.mag_sigma = 0.5;
  louder.noise.flow_sigma = 1.0;
  louder.noise.mag_outlier_prob = 0.0;
  const SensorLog a = simulate(base), b = simulate(louder);
  for (std::size_t k = 0; k < a.imu.size(); ++k) CHECK(a.imu[k].gyro == b.imu[k].gyro);
  for (std::size_t k = 0; k < a.lidar.size(); ++k) CHECK(same_pose(a.lidar[k].relative, b.lidar[k].relative));
  for (std::size_t k = 0; k < a.flow.size(); ++k) CHECK(a.flow[k].height == b.flow[k].height);
}

TEST_CASE("noise-free measurements equal the truth projections") {
  Scenario sc = zigzag_scenario(2);
  sc.noise = SensorNoise::none();
  const SensorLog log = simulate(sc);
  for (std::size_t k = 0; k < log.imu.size(); ++k) CHECK(log.truth[k].t == log.imu[k].t);
  for (const MagSample& m : log.mag) {
    const auto k = static_cast<std::size_t>(std::lround(m.t * sc.imu_rate));
    CHECK(m.heading == yaw_of(log.truth[k].state.rotation()));
    CHECK(!m.outlier);
  }
  for (const FlowSample& f : log.flow) {
    const NavState& s = log.truth[static_cast<std::size_t>(std::lround(f.t * sc.imu_rate))].state;
    CHECK(f.height == s.position().z());
    CHECK((f.velocity - (s.rotation().inverse() * s.velocity).head<2>()).norm() < 1e-12);
  }
  CHECK(log.lidar.size() == 150);
  for (const OdomMeasurement& o : log.lidar) {
    const NavState& a = log.truth[static_cast<std::size_t>(std::lround(o.t_start * sc.imu_rate))].state;
    const NavState& b = log.truth[static_cast<std::size_t>(std::lround(o.t_end * sc.imu_rate))].state;
    const Pose3 rel = a.pose.inverse() * b.pose;
    CHECK((o.relative.translation - rel.translation).norm() < 1e-12);
    CHECK(so3_log(o.relative.rotation.inverse() * rel.rotation).norm() < 1e-12);
  }
  // IMU commands integrate back onto the truth.
  NavState x = log.truth.front().state;
  for (std::size_t k = 1; k < log.imu.size(); ++k) {
    x = predict(x, integrate(std::span(log.imu.data() + k - 1, 2), ImuBias{}, ImuNoise{0, 0, 0, 0}));
  }
  CHECK((x.position() - log.truth.back().state.position()).norm() < 1e-9);
}

TEST_CASE("lidar z drift accumulates with distance travelled") {
  Scenario sc = straight_scenario(100.0, 2.0);
  sc.noise.lidar_z_drift = 0.01;
  const SensorLog log = simulate(sc);
  Pose3 chain;
  for (const OdomMeasurement& o : log.lidar) chain = chain * o.relative;
  CHECK(chain.translation.z() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(chain.translation.x() == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(std::abs(log.truth.back().state.position().z()) < 1e-12);
}

TEST_CASE("degradation windows suppress or corrupt odometry") {
  Scenario sc = straight_scenario(40.0, 1.0);
  sc.degradation.push_back({10.0, 20.0, DegradedSensor::lidar, DegradationMode::absent});
  sc.degradation.push_back({25.0, 30.0, DegradedSensor::vio, DegradationMode::corrupted});
  const SensorLog log = simulate(sc);
  for (const OdomMeasurement& o : log.lidar) {
    const double mid = 0.5 * (o.t_start + o.t_end);
    CHECK((mid < 10.0 || mid > 20.0));
  }
  CHECK(log.lidar.size() == 150);
  CHECK(log.vio.size() == 200);
  double worst_clean = 0.0;
  int corrupted = 0, big = 0;
  for (const OdomMeasurement& o : log.vio) {
    const double mid = 0.5 * (o.t_start + o.t_end);
    const double dev = (o.relative.translation - Vec3(0.2, 0, 0)).norm();
    if (mid >= 25.0 && mid <= 30.0) {
      ++corrupted;
      if (dev > 0.1) ++big;
    } else {
      worst_clean = std::max(worst_clean, dev);
    }
  }
  CHECK(worst_clean < 1e-9);
  CHECK(corrupted == 25);
  CHECK(big >= 20);  // corruption keeps its own sigma even in a noise-free scenario
}

TEST_CASE("loop closures follow the radius, age and cooldown rules") {
  Scenario sc;
  sc.duration = 200.0;
  sc.path.kind = PathKind::loop;
  sc.path.speed = 2.0;
  sc.path.straight_length = 30.0;
  sc.path.turn_radius = 10.0;
  sc.path.laps = 2.0;
  sc.noise = SensorNoise::none();
  const SensorLog log = simulate(sc);
  REQUIRE(!log.loops.empty());
  auto at = [&](double t) -> const NavState& {
    return log.truth[static_cast<std::size_t>(std::lround(t * sc.imu_rate))].state;
  };
  double previous = -1e9;
  for (const OdomMeasurement& o : log.loops) {
    CHECK(o.t_end - o.t_start >= sc.loop_min_age);
    CHECK((at(o.t_end).position() - at(o.t_start).position()).norm() <= sc.loop_radius);
    CHECK(o.t_end - previous >= sc.loop_cooldown);
    previous = o.t_end;
  }
  // The first closure happens when the second lap starts, against the start.
  CHECK(log.loops.front().t_start < 2.0);
  CHECK(log.loops.front().t_end > 50.0);

  // Nothing is injected while lidar is down.
  sc.degradation.push_back({100.0, 150.0, DegradedSensor::lidar, DegradationMode::absent});
  for (const OdomMeasurement& o : simulate(sc).loops) CHECK((o.t_end < 100.0 || o.t_end > 150.0));
}

TEST_CASE("uniform polarization scenes follow Malus's law") {
  PolarSceneSpec spec;
  spec.width = 8;
  spec.height = 6;
  spec.background = {0, 0, 0, 0, 200.0, 0.0, 0.0};
  polar::PolarMosaic m = synthesize_polar_scene(spec);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) CHECK(int(m.samples.at(x, y)) == 50);
  }
  spec.background.dop = 1.0;
  const polar::IntensityPlanes p = polar::demosaic(synthesize_polar_scene(spec));
  CHECK(p.i0.at(1, 2) == 100.0f);
  CHECK(p.i45.at(1, 2) == 50.0f);
  CHECK(p.i90.at(1, 2) == 0.0f);
  CHECK(p.i135.at(1, 2) == 50.0f);
}

TEST_CASE("invalid scene regions are rejected") {
  PolarSceneSpec spec;
  spec.width = 7;
  spec.height = 6;
  spec.background.intensity = 100.0;
  CHECK_THROWS_AS(synthesize_polar_scene(spec), InvalidRegionError);
  spec.width = 8;
  spec.regions.push_back({0, 0, 5, 1, 100.0, 0.5, 0.0});
  CHECK_THROWS_AS(synthesize_polar_scene(spec), InvalidRegionError);
  spec.regions = {{0, 0, 2, 2, 100.0, 1.5, 0.0}};
  CHECK_THROWS_AS(synthesize_polar_scene(spec), InvalidRegionError);
  spec.regions = {{0, 0, 2, 2, 100.0, 0.5, -std::numbers::pi / 2}};
  CHECK_THROWS_AS(synthesize_polar_scene(spec), InvalidRegionError);
  spec.regions = {{0, 0, 2, 2, 100.0, 0.5, std::numbers::pi / 2}};
  CHECK_NOTHROW(synthesize_polar_scene(spec));
}

TEST_CASE("a DOP checkerboard has uniform grayscale and a checkered DOP") {
  const PolarSceneSpec spec = dop_checkerboard(64, 64, 4, 200.0, 0.2, 0.8, 0.0);
  const polar::IntensityPlanes p = polar::demosaic(synthesize_polar_scene(spec));
  const polar::Plane8 g = polar::grayscale(p);
  const polar::PlaneD d = polar::dop(p);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      CHECK(g.at(x, y) == g.at(0, 0));
      const bool odd = ((x / 4) + (y / 4)) % 2 == 1;
      CHECK(d.at(x, y) == doctest::Approx(odd ? 0.8 : 0.2).epsilon(0.02));
    }
  }
}
