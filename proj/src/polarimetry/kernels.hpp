#pragma once

// Row kernels shared by the serial reference and the OpenMP drivers. Both
// drivers call exactly these functions, so their outputs are bit-identical
// regardless of how rows are partitioned.

#include "polarnav/polarimetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace polarnav::polar::kernels {

inline double round_half_away(double v) { return std::round(v); }

inline std::uint8_t to_u8_clamped(double v) {
  return static_cast<std::uint8_t>(std::clamp(round_half_away(v), 0.0, 255.0));
}

inline std::uint8_t map_dop_value(double d) {
  return to_u8_clamped(-255.0 * d * d + 510.0 * d);
}

inline std::uint8_t map_aop_value(double theta) {
  return to_u8_clamped((theta + std::numbers::pi / 2.0) * 255.0 / std::numbers::pi);
}

inline void demosaic_row(const PolarMosaic& m, IntensityPlanes& out, int v) {
  const int w = out.width();
  const std::array<PlaneF*, 4> target{&out.i0, &out.i45, &out.i90, &out.i135};
  for (int u = 0; u < w; ++u) {
    for (int cell = 0; cell < 4; ++cell) {
      const int sx = 2 * u + (cell & 1);
      const int sy = 2 * v + (cell >> 1);
      PlaneF* plane = target[static_cast<int>(m.layout.cells[cell])];
      plane->at(u, v) = static_cast<float>(m.samples.at(sx, sy));
    }
  }
}

inline void grayscale_row(const IntensityPlanes& p, Plane8& out, int v) {
  for (int u = 0; u < out.width; ++u) {
    const double sum = static_cast<double>(p.i0.at(u, v)) + p.i45.at(u, v) +
                       p.i90.at(u, v) + p.i135.at(u, v);
    out.at(u, v) = to_u8_clamped(0.5 * sum);
  }
}

inline void dop_row(const IntensityPlanes& p, PlaneD& out, int v) {
  for (int u = 0; u < out.width; ++u) {
    const double a0 = p.i0.at(u, v), a45 = p.i45.at(u, v);
    const double a90 = p.i90.at(u, v), a135 = p.i135.at(u, v);
    const double total = a0 + a45 + a90 + a135;
    if (total <= 0.0) {
      out.at(u, v) = 0.0;
      continue;
    }
    const double d = 2.0 * std::hypot(a0 - a90, a45 - a135) / total;
    out.at(u, v) = std::clamp(d, 0.0, 1.0);
  }
}

inline void aop_row(const IntensityPlanes& p, AngleOfPolarization& out, int v) {
  for (int u = 0; u < out.theta.width; ++u) {
    const double q = static_cast<double>(p.i0.at(u, v)) - p.i90.at(u, v);
    const double s = static_cast<double>(p.i45.at(u, v)) - p.i135.at(u, v);
    if (q == 0.0 && s == 0.0) {
      out.theta.at(u, v) = 0.0;
      out.valid.at(u, v) = 0;
    } else {
      out.theta.at(u, v) = 0.5 * std::atan2(s, q);
      out.valid.at(u, v) = 1;
    }
  }
}

inline void map_dop_row(const PlaneD& in, Plane8& out, int v) {
  for (int u = 0; u < in.width; ++u) out.at(u, v) = map_dop_value(in.at(u, v));
}

inline void map_aop_row(const PlaneD& in, Plane8& out, int v) {
  for (int u = 0; u < in.width; ++u) out.at(u, v) = map_aop_value(in.at(u, v));
}

struct Gradients {
  PlaneD gxx, gxy, gyy;
};

inline void sobel_row(const Plane8& img, Gradients& g, int y) {
  if (y < 1 || y >= img.height - 1) return;
  auto px = [&](int x, int yy) { return static_cast<double>(img.at(x, yy)); };
  for (int x = 1; x < img.width - 1; ++x) {
    const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                      (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
    const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                      (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
    g.gxx.at(x, y) = gx * gx;
    g.gxy.at(x, y) = gx * gy;
    g.gyy.at(x, y) = gy * gy;
  }
}

inline void min_eigen_row(const Gradients& g, PlaneD& out, int y) {
  if (y < 2 || y >= out.height - 2) return;
  for (int x = 2; x < out.width - 2; ++x) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        a += g.gxx.at(x + dx, y + dy);
        b += g.gxy.at(x + dx, y + dy);
        c += g.gyy.at(x + dx, y + dy);
      }
    }
    const double half_trace = 0.5 * (a + c);
    const double disc = std::hypot(0.5 * (a - c), b);
    out.at(x, y) = std::max(0.0, half_trace - disc);
  }
}

// Drivers. `serial` is the reference; `parallel` distributes rows with OpenMP.
namespace serial {
void demosaic(const PolarMosaic& m, IntensityPlanes& out);
void grayscale(const IntensityPlanes& p, Plane8& out);
void dop(const IntensityPlanes& p, PlaneD& out);
void aop(const IntensityPlanes& p, AngleOfPolarization& out);
void map_dop(const PlaneD& in, Plane8& out);
void map_aop(const PlaneD& in, Plane8& out);
void min_eigen(const Plane8& img, PlaneD& out);
}  // namespace serial

namespace parallel {
void demosaic(const PolarMosaic& m, IntensityPlanes& out);
void grayscale(const IntensityPlanes& p, Plane8& out);
void dop(const IntensityPlanes& p, PlaneD& out);
void aop(const IntensityPlanes& p, AngleOfPolarization& out);
void map_dop(const PlaneD& in, Plane8& out);
void map_aop(const PlaneD& in, Plane8& out);
void min_eigen(const Plane8& img, PlaneD& out);
}  // namespace parallel

}  // namespace polarnav::polar::kernels
