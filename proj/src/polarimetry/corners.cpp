#include "polarnav/polarimetry.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <stdexcept>

namespace polarnav::polar {

namespace {

constexpr int kMinImageSide = 16;

// Offset of the vertex of the parabola through (-1, l), (0, c), (1, r).
double parabola_peak(double l, double c, double r) {
  const double denom = l - 2.0 * c + r;
  if (denom >= 0.0) return 0.0;
  return std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
}

bool far_from_all(const Corner& c, const std::vector<Corner>& kept, double min_distance) {
  const double min_sq = min_distance * min_distance;
  for (const Corner& k : kept) {
    const double dx = k.x - c.x;
    const double dy = k.y - c.y;
    if (dx * dx + dy * dy < min_sq) return false;
  }
  return true;
}

void validate(const Plane8& image, const CornerParams& params) {
  if (image.width < kMinImageSide || image.height < kMinImageSide) {
    throw std::invalid_argument("corner detection needs at least a 16x16 image");
  }
  if (!(params.quality_level > 0.0 && params.quality_level < 1.0)) {
    throw std::invalid_argument("quality level must lie in (0, 1)");
  }
  if (params.max_corners <= 0) throw std::invalid_argument("max_corners must be positive");
  if (params.min_distance < 0.0) throw std::invalid_argument("min_distance must be >= 0");
}

}  // namespace

PlaneD min_eigen_response(const Plane8& image, Exec exec) {
  PlaneD out(image.width, image.height);
  if (exec == Exec::serial) {
    kernels::serial::min_eigen(image, out);
  } else {
    kernels::parallel::min_eigen(image, out);
  }
  return out;
}

std::vector<Corner> detect_corners(const Plane8& image, const CornerParams& params,
                                   Exec exec) {
  validate(image, params);
  const PlaneD response = min_eigen_response(image, exec);
  const double max_score = *std::max_element(response.pixels.begin(), response.pixels.end());
  if (max_score <= 0.0) return {};
  const double threshold = params.quality_level * max_score;

  std::vector<Corner> candidates;
  for (int y = 2; y < image.height - 2; ++y) {
    for (int x = 2; x < image.width - 2; ++x) {
      const double s = response.at(x, y);
      if (s <= 0.0 || s < threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (response.at(x + dx, y + dy) > s) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      const double ox = parabola_peak(response.at(x - 1, y), s, response.at(x + 1, y));
      const double oy = parabola_peak(response.at(x, y - 1), s, response.at(x, y + 1));
      candidates.push_back({x + ox, y + oy, s});
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Corner& a, const Corner& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });

  std::vector<Corner> kept;
  for (const Corner& c : candidates) {
    if (static_cast<int>(kept.size()) >= params.max_corners) break;
    if (far_from_all(c, kept, params.min_distance)) kept.push_back(c);
  }
  return kept;
}

std::vector<Corner> detect_enhanced(const PolarRgb& image, const CornerParams& params,
                                    Exec exec) {
  std::vector<Corner> merged = detect_corners(image.g, params, exec);
  for (const Plane8* channel : {&image.r, &image.b}) {
    for (const Corner& c : detect_corners(*channel, params, exec)) {
      if (static_cast<int>(merged.size()) >= params.max_corners) return merged;
      if (far_from_all(c, merged, params.min_distance)) merged.push_back(c);
    }
  }
  return merged;
}

}  // namespace polarnav::polar
