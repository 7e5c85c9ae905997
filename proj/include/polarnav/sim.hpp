#pragma once

#include "polarnav/polarimetry.hpp"
#include "polarnav/scenario.hpp"
#include "polarnav/sensor_log.hpp"

#include <stdexcept>
#include <vector>

namespace polarnav::sim {

class DegeneratePathError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Planar-heading kinematics at one instant.
struct Kinematics {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  double yaw = 0.0;
  double yaw_rate = 0.0;
};

/// Natural cubic spline through the path knots, parametrized by chord
/// length and traversed at the path speed.
class Trajectory {
 public:
  explicit Trajectory(const PathSpec& spec);

  /// Chord-length parameter range, roughly the path length in metres.
  double parameter_length() const { return knots_.empty() ? 0.0 : knots_.back(); }
  /// Arc length of the spline, by numeric integration.
  double arc_length() const;
  /// Time needed to reach the end of the path (0 for a stationary path).
  double travel_time() const;

  Kinematics at(double t) const;

 private:
  Vec3 eval(double u, int derivative) const;

  double speed_;
  std::vector<double> knots_;
  std::vector<Vec3> points_;
  std::vector<Vec3> second_;  // spline second derivatives at knots
};

/// Polyline through the corners/samples of the named generator.
std::vector<Vec3> path_waypoints(const PathSpec& spec);

/// Noise-free IMU commands at the IMU rate plus the state stream obtained by
/// integrating them, so that the truth is exactly consistent with the
/// preintegration scheme. Motion lasts min(duration, travel time).
struct TruthStream {
  std::vector<TruthSample> truth;
  std::vector<ImuSample> commands;
};

TruthStream generate_truth(const Scenario& scenario);

/// Adds biases, noise, outliers, drift and degradation on top of the truth.
SensorLog synthesize_sensors(const TruthStream& truth, const Scenario& scenario);

/// generate_truth followed by synthesize_sensors.
SensorLog simulate(const Scenario& scenario);

/// Region of a polarization scene in superpixel coordinates, half open.
struct PolarRegion {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double intensity = 0.0;  // total intensity s, 0..510 keeps every channel in 8 bits
  double dop = 0.0;        // [0, 1]
  double aop = 0.0;        // (-pi/2, pi/2]
};

struct PolarSceneSpec {
  int width = 0;   // mosaic pixels, even
  int height = 0;
  PolarRegion background;  // extent ignored
  std::vector<PolarRegion> regions;  // later regions paint over earlier ones
  polar::MosaicLayout layout;
};

class InvalidRegionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malus-law intensities per superpixel, unquantized.
polar::IntensityPlanes render_intensities(const PolarSceneSpec& spec);

/// Quantized raw mosaic (round half away from zero, clamped to [0, 255]).
polar::PolarMosaic synthesize_polar_scene(const PolarSceneSpec& spec);

/// Constant intensity and angle with the degree of polarization alternating
/// between two values on a checkerboard of `square` superpixels.
PolarSceneSpec dop_checkerboard(int width, int height, int square, double intensity,
                                double dop_a, double dop_b, double aop);

}  // namespace polarnav::sim
