#pragma once

#include "polarnav/polarimetry.hpp"

#include <filesystem>

namespace polarnav::polar {

/// Binary 8-bit PGM (P5). Throws DataError on malformed input.
Plane8 read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Plane8& image);

/// Binary 8-bit PPM (P6), channels written in R, G, B order.
PolarRgb read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const PolarRgb& image);

}  // namespace polarnav::polar
