#pragma once

// Division-of-focal-plane polarimetry: demosaic, grayscale / degree / angle
// of polarization, 8-bit mappings, RGB packing and corner detection.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace polarnav::polar {

template <typename T>
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<T> pixels;

  Plane() = default;
  Plane(int w, int h, T fill = T{})
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return pixels.size(); }
  bool same_shape(int w, int h) const { return width == w && height == h; }
  template <typename U>
  bool same_shape(const Plane<U>& o) const { return same_shape(o.width, o.height); }

  bool operator==(const Plane&) const = default;
};

using Plane8 = Plane<std::uint8_t>;
using PlaneF = Plane<float>;
using PlaneD = Plane<double>;

enum class PolarAngle : std::uint8_t { k0, k45, k90, k135 };

/// Which polarizer sits at each position of a 2x2 superpixel,
/// in order top-left, top-right, bottom-left, bottom-right.
struct MosaicLayout {
  std::array<PolarAngle, 4> cells{PolarAngle::k90, PolarAngle::k45, PolarAngle::k135,
                                  PolarAngle::k0};

  bool valid() const;
};

inline constexpr int kSensorWidth = 2448;
inline constexpr int kSensorHeight = 2048;

struct PolarMosaic {
  Plane8 samples;
  MosaicLayout layout;
};

/// Half-resolution intensity planes behind each polarizer orientation.
/// Values are in [0, 255] but kept in floating point so that synthetic
/// (unquantized) inputs pass through the pipeline unchanged.
struct IntensityPlanes {
  PlaneF i0, i45, i90, i135;

  int width() const { return i0.width; }
  int height() const { return i0.height; }
};

/// R = mapped degree of polarization, G = grayscale, B = mapped angle.
struct PolarRgb {
  Plane8 r, g, b;

  int width() const { return g.width; }
  int height() const { return g.height; }
};

struct AngleOfPolarization {
  PlaneD theta;   // (-pi/2, pi/2]
  Plane8 valid;   // 0 where both Stokes differences vanish
};

struct Corner {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

struct CornerParams {
  double quality_level = 0.01;
  int max_corners = 150;
  double min_distance = 10.0;
};

enum class Exec { serial, parallel };

IntensityPlanes demosaic(const PolarMosaic& mosaic, Exec exec = Exec::parallel);

/// g = (g0 + g1 + g2 + g3) / 2, rounded half away from zero, clamped to 255.
Plane8 grayscale(const IntensityPlanes& planes, Exec exec = Exec::parallel);

/// Degree of polarization in [0, 1]; zero where all intensities are zero.
PlaneD dop(const IntensityPlanes& planes, Exec exec = Exec::parallel);

/// Angle of polarization via half the two-argument arctangent.
AngleOfPolarization aop(const IntensityPlanes& planes, Exec exec = Exec::parallel);

/// round(-255 d^2 + 510 d); throws std::invalid_argument outside [0, 1].
std::uint8_t map_dop(double d);

/// round((theta + pi/2) * 255 / pi); throws outside [-pi/2, pi/2].
std::uint8_t map_aop(double theta);

Plane8 map_dop(const PlaneD& d, Exec exec = Exec::parallel);
Plane8 map_aop(const PlaneD& theta, Exec exec = Exec::parallel);

PolarRgb pack_rgb(Plane8 dop_mapped, Plane8 gray, Plane8 aop_mapped);

struct PolarFrame {
  IntensityPlanes planes;
  Plane8 gray;
  PlaneD dop;
  AngleOfPolarization aop;
  PolarRgb rgb;
};

/// Full pipeline from raw mosaic to packed RGB.
PolarFrame process(const PolarMosaic& mosaic, Exec exec = Exec::parallel);

/// Minimum-eigenvalue structure-tensor response (3x3 Sobel, 3x3 box window).
/// Pixels closer than two pixels to the border are zero.
PlaneD min_eigen_response(const Plane8& image, Exec exec = Exec::parallel);

/// Shi-Tomasi corners ordered by score desc, then x, then y.
/// Throws std::invalid_argument for images smaller than 16x16 or a quality
/// level outside (0, 1).
std::vector<Corner> detect_corners(const Plane8& image, const CornerParams& params,
                                   Exec exec = Exec::parallel);

/// Corners from the grayscale channel, supplemented by the DOP and AOP
/// channels. Grayscale corners take precedence, then R, then B; later
/// channels only add corners at least min_distance from every kept one.
std::vector<Corner> detect_enhanced(const PolarRgb& image, const CornerParams& params,
                                    Exec exec = Exec::parallel);

}  // namespace polarnav::polar
