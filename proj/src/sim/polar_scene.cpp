#include "polarnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace polarnav::sim {

namespace {

void check_region(const PolarRegion& r, int w, int h, bool check_extent) {
  if (!(r.intensity >= 0.0) || !(r.dop >= 0.0 && r.dop <= 1.0) ||
      !(r.aop > -std::numbers::pi / 2 && r.aop <= std::numbers::pi / 2)) {
    throw InvalidRegionError("region needs intensity >= 0, dop in [0, 1], aop in (-pi/2, pi/2]");
  }
  if (check_extent && (r.x0 < 0 || r.y0 < 0 || r.x1 > w || r.y1 > h || r.x0 >= r.x1 ||
                       r.y0 >= r.y1)) {
    throw InvalidRegionError("region [" + std::to_string(r.x0) + "," + std::to_string(r.x1) +
                             ")x[" + std::to_string(r.y0) + "," + std::to_string(r.y1) +
                             ") outside the superpixel grid");
  }
}

float malus(const PolarRegion& r, double phi) {
  return static_cast<float>(r.intensity / 4.0 * (1.0 + r.dop * std::cos(2.0 * r.aop - 2.0 * phi)));
}

}  // namespace

polar::IntensityPlanes render_intensities(const PolarSceneSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0 || spec.width % 2 || spec.height % 2) {
    throw InvalidRegionError("scene dimensions must be positive and even");
  }
  const int w = spec.width / 2;
  const int h = spec.height / 2;
  check_region(spec.background, w, h, false);
  for (const PolarRegion& r : spec.regions) check_region(r, w, h, true);

  std::vector<const PolarRegion*> owner(static_cast<std::size_t>(w) * h, &spec.background);
  for (const PolarRegion& r : spec.regions) {
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) owner[static_cast<std::size_t>(y) * w + x] = &r;
    }
  }

  constexpr double q = std::numbers::pi / 4;
  polar::IntensityPlanes p{polar::PlaneF(w, h), polar::PlaneF(w, h), polar::PlaneF(w, h),
                           polar::PlaneF(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const PolarRegion& r = *owner[static_cast<std::size_t>(y) * w + x];
      p.i0.at(x, y) = malus(r, 0.0);
      p.i45.at(x, y) = malus(r, q);
      p.i90.at(x, y) = malus(r, 2 * q);
      p.i135.at(x, y) = malus(r, 3 * q);
    }
  }
  return p;
}

polar::PolarMosaic synthesize_polar_scene(const PolarSceneSpec& spec) {
  if (!spec.layout.valid()) throw InvalidRegionError("mosaic layout must use each angle once");
  const polar::IntensityPlanes p = render_intensities(spec);
  auto quantize = [](float v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(static_cast<double>(v)), 0.0, 255.0));
  };
  auto plane_for = [&](polar::PolarAngle a) -> const polar::PlaneF& {
    switch (a) {
      case polar::PolarAngle::k0: return p.i0;
      case polar::PolarAngle::k45: return p.i45;
      case polar::PolarAngle::k90: return p.i90;
      case polar::PolarAngle::k135: return p.i135;
    }
    return p.i0;
  };

  polar::PolarMosaic m;
  m.layout = spec.layout;
  m.samples = polar::Plane8(spec.width, spec.height);
  for (int cell = 0; cell < 4; ++cell) {
    const polar::PlaneF& src = plane_for(spec.layout.cells[cell]);
    const int dx = cell % 2;
    const int dy = cell / 2;
    for (int y = 0; y < p.height(); ++y) {
      for (int x = 0; x < p.width(); ++x) m.samples.at(2 * x + dx, 2 * y + dy) = quantize(src.at(x, y));
    }
  }
  return m;
}

PolarSceneSpec dop_checkerboard(int width, int height, int square, double intensity,
                                double dop_a, double dop_b, double aop) {
  if (square <= 0) throw InvalidRegionError("checkerboard square must be positive");
  PolarSceneSpec spec;
  spec.width = width;
  spec.height = height;
  spec.background = {0, 0, 0, 0, intensity, dop_a, aop};
  const int w = width / 2;
  const int h = height / 2;
  for (int y0 = 0; y0 < h; y0 += square) {
    for (int x0 = 0; x0 < w; x0 += square) {
      if (((x0 / square) + (y0 / square)) % 2 == 0) continue;
      spec.regions.push_back(
          {x0, y0, std::min(x0 + square, w), std::min(y0 + square, h), intensity, dop_b, aop});
    }
  }
  return spec;
}

}  // namespace polarnav::sim
