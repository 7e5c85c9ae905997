#include "polarnav/polarimetry.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

namespace polarnav::polar {

bool MosaicLayout::valid() const {
  std::array<bool, 4> seen{};
  for (PolarAngle a : cells) {
    const auto idx = static_cast<std::size_t>(a);
    if (idx >= 4 || seen[idx]) return false;
    seen[idx] = true;
  }
  return true;
}

IntensityPlanes demosaic(const PolarMosaic& mosaic, Exec exec) {
  const int w = mosaic.samples.width;
  const int h = mosaic.samples.height;
  if (w <= 0 || h <= 0 || w % 2 != 0 || h % 2 != 0) {
    throw std::invalid_argument("mosaic dimensions must be positive and even, got " +
                                std::to_string(w) + "x" + std::to_string(h));
  }
  if (mosaic.samples.size() != static_cast<std::size_t>(w) * h) {
    throw std::invalid_argument("mosaic sample count does not match dimensions");
  }
  if (!mosaic.layout.valid()) throw std::invalid_argument("invalid mosaic layout");

  IntensityPlanes out{PlaneF(w / 2, h / 2), PlaneF(w / 2, h / 2), PlaneF(w / 2, h / 2),
                      PlaneF(w / 2, h / 2)};
  if (exec == Exec::serial) {
    kernels::serial::demosaic(mosaic, out);
  } else {
    kernels::parallel::demosaic(mosaic, out);
  }
  return out;
}

namespace {

void require_consistent(const IntensityPlanes& p) {
  const PlaneF& ref = p.i0;
  if (!p.i45.same_shape(ref) || !p.i90.same_shape(ref) || !p.i135.same_shape(ref)) {
    throw std::invalid_argument("intensity planes differ in size");
  }
}

}  // namespace

Plane8 grayscale(const IntensityPlanes& planes, Exec exec) {
  require_consistent(planes);
  Plane8 out(planes.width(), planes.height());
  if (exec == Exec::serial) {
    kernels::serial::grayscale(planes, out);
  } else {
    kernels::parallel::grayscale(planes, out);
  }
  return out;
}

PlaneD dop(const IntensityPlanes& planes, Exec exec) {
  require_consistent(planes);
  PlaneD out(planes.width(), planes.height());
  if (exec == Exec::serial) {
    kernels::serial::dop(planes, out);
  } else {
    kernels::parallel::dop(planes, out);
  }
  return out;
}

AngleOfPolarization aop(const IntensityPlanes& planes, Exec exec) {
  require_consistent(planes);
  AngleOfPolarization out{PlaneD(planes.width(), planes.height()),
                          Plane8(planes.width(), planes.height())};
  if (exec == Exec::serial) {
    kernels::serial::aop(planes, out);
  } else {
    kernels::parallel::aop(planes, out);
  }
  return out;
}

std::uint8_t map_dop(double d) {
  if (!(d >= 0.0 && d <= 1.0)) {
    throw std::invalid_argument("degree of polarization outside [0, 1]: " + std::to_string(d));
  }
  return kernels::map_dop_value(d);
}

std::uint8_t map_aop(double theta) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  if (!(theta >= -kHalfPi && theta <= kHalfPi)) {
    throw std::invalid_argument("angle of polarization outside [-pi/2, pi/2]: " +
                                std::to_string(theta));
  }
  return kernels::map_aop_value(theta);
}

Plane8 map_dop(const PlaneD& d, Exec exec) {
  for (double v : d.pixels) map_dop(v);  // range check before the parallel pass
  Plane8 out(d.width, d.height);
  if (exec == Exec::serial) {
    kernels::serial::map_dop(d, out);
  } else {
    kernels::parallel::map_dop(d, out);
  }
  return out;
}

Plane8 map_aop(const PlaneD& theta, Exec exec) {
  for (double v : theta.pixels) map_aop(v);
  Plane8 out(theta.width, theta.height);
  if (exec == Exec::serial) {
    kernels::serial::map_aop(theta, out);
  } else {
    kernels::parallel::map_aop(theta, out);
  }
  return out;
}

PolarRgb pack_rgb(Plane8 dop_mapped, Plane8 gray, Plane8 aop_mapped) {
  if (!dop_mapped.same_shape(gray) || !aop_mapped.same_shape(gray)) {
    throw std::invalid_argument("pack_rgb: channel dimensions differ");
  }
  return {std::move(dop_mapped), std::move(gray), std::move(aop_mapped)};
}

PolarFrame process(const PolarMosaic& mosaic, Exec exec) {
  PolarFrame f;
  f.planes = demosaic(mosaic, exec);
  f.gray = grayscale(f.planes, exec);
  f.dop = dop(f.planes, exec);
  f.aop = aop(f.planes, exec);
  f.rgb = pack_rgb(map_dop(f.dop, exec), f.gray, map_aop(f.aop.theta, exec));
  return f;
}

}  // namespace polarnav::polar
