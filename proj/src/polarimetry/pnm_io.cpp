#include "polarnav/pnm_io.hpp"

#include "polarnav/errors.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <string>

namespace polarnav::polar {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_positive(const std::string& tok, const std::filesystem::path& path,
                   const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw DataError(path.string() + ": malformed " + what + " '" + tok + "'");
}

struct Header {
  int width;
  int height;
};

Header read_header(std::istream& in, const std::filesystem::path& path, const char* magic) {
  const std::string m = next_token(in);
  if (m != magic) {
    throw DataError(path.string() + ": expected " + magic + " magic, got '" + m + "'");
  }
  const int w = parse_positive(next_token(in), path, "width");
  const int h = parse_positive(next_token(in), path, "height");
  const int maxval = parse_positive(next_token(in), path, "maxval");
  if (maxval != 255) throw DataError(path.string() + ": only 8-bit (maxval 255) supported");
  // next_token consumed exactly one whitespace byte after maxval
  return {w, h};
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

Plane8 read_pgm(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  const Header h = read_header(in, path, "P5");
  Plane8 img(h.width, h.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.size())) {
    throw DataError(path.string() + ": truncated pixel data");
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Plane8& image) {
  std::ofstream out = open_out(path);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.size()));
}

PolarRgb read_ppm(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  const Header h = read_header(in, path, "P6");
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(h.width) * h.height * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw DataError(path.string() + ": truncated pixel data");
  }
  PolarRgb rgb{Plane8(h.width, h.height), Plane8(h.width, h.height), Plane8(h.width, h.height)};
  for (std::size_t i = 0; i < rgb.g.size(); ++i) {
    rgb.r.pixels[i] = raw[3 * i];
    rgb.g.pixels[i] = raw[3 * i + 1];
    rgb.b.pixels[i] = raw[3 * i + 2];
  }
  return rgb;
}

void write_ppm(const std::filesystem::path& path, const PolarRgb& image) {
  std::vector<std::uint8_t> raw(image.g.size() * 3);
  for (std::size_t i = 0; i < image.g.size(); ++i) {
    raw[3 * i] = image.r.pixels[i];
    raw[3 * i + 1] = image.g.pixels[i];
    raw[3 * i + 2] = image.b.pixels[i];
  }
  std::ofstream out = open_out(path);
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace polarnav::polar
