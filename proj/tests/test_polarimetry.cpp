#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polarnav/errors.hpp"
#include "polarnav/pnm_io.hpp"
#include "polarnav/polarimetry.hpp"
#include "polarnav/sim.hpp"
#include "polarnav/trajectory_io.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace polarnav;
using namespace polarnav::polar;
using std::numbers::pi;

namespace {

PolarMosaic random_mosaic(int w, int h, std::uint64_t seed) {
  testing::Gen gen(seed);
  PolarMosaic m;
  m.samples = Plane8(w, h);
  for (auto& p : m.samples.pixels) p = static_cast<std::uint8_t>(gen.integer(0, 255));
  return m;
}

IntensityPlanes uniform_planes(float a0, float a45, float a90, float a135) {
  return {PlaneF(4, 4, a0), PlaneF(4, 4, a45), PlaneF(4, 4, a90), PlaneF(4, 4, a135)};
}

// Filled square on a dark background.
Plane8 square_image(int size, int x0, int y0, int side) {
  Plane8 img(size, size, 20);
  for (int y = y0; y < y0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) img.at(x, y) = 220;
  }
  return img;
}

}  // namespace

TEST_CASE("demosaic routes each superpixel cell to its polarizer plane") {
  PolarMosaic m;
  m.samples = Plane8(4, 2);
  // Default layout: TL=90, TR=45, BL=135, BR=0.
  m.samples.at(0, 0) = 9;
  m.samples.at(1, 0) = 4;
  m.samples.at(0, 1) = 13;
  m.samples.at(1, 1) = 1;
  m.samples.at(2, 0) = 90;
  m.samples.at(3, 0) = 45;
  m.samples.at(2, 1) = 135;
  m.samples.at(3, 1) = 200;
  const IntensityPlanes p = demosaic(m);
  REQUIRE(p.width() == 2);
  REQUIRE(p.height() == 1);
  CHECK(p.i90.at(0, 0) == 9);
  CHECK(p.i45.at(0, 0) == 4);
  CHECK(p.i135.at(0, 0) == 13);
  CHECK(p.i0.at(0, 0) == 1);
  CHECK(p.i0.at(1, 0) == 200);

  m.layout.cells = {PolarAngle::k0, PolarAngle::k45, PolarAngle::k135, PolarAngle::k90};
  const IntensityPlanes q = demosaic(m);
  CHECK(q.i0.at(0, 0) == 9);
  CHECK(q.i90.at(0, 0) == 1);
}

TEST_CASE("demosaic rejects odd sizes and invalid layouts") {
  PolarMosaic m;
  m.samples = Plane8(5, 4);
  CHECK_THROWS_AS(demosaic(m), std::invalid_argument);
  m.samples = Plane8(4, 4);
  m.layout.cells = {PolarAngle::k0, PolarAngle::k0, PolarAngle::k90, PolarAngle::k135};
  CHECK_THROWS_AS(demosaic(m), std::invalid_argument);
}

TEST_CASE("full sensor frames produce 1224x1024 channels") {
  PolarMosaic m;
  m.samples = Plane8(kSensorWidth, kSensorHeight, 60);
  const PolarFrame f = process(m);
  CHECK(f.rgb.width() == 1224);
  CHECK(f.rgb.height() == 1024);
  CHECK(f.gray.at(0, 0) == 120);
}

TEST_CASE("grayscale halves the channel sum, rounding half away from zero") {
  CHECK(grayscale(uniform_planes(10, 11, 12, 0)).at(0, 0) == 17);  // 16.5
  CHECK(grayscale(uniform_planes(10, 10, 12, 0)).at(0, 0) == 16);
  CHECK(grayscale(uniform_planes(255, 255, 255, 255)).at(0, 0) == 255);  // clamped
  CHECK(grayscale(uniform_planes(0, 0, 0, 0)).at(0, 0) == 0);
}

TEST_CASE("degree and angle of polarization on hand-computed intensities") {
  // Fully polarized at 0 rad: I0=100, I45=50, I90=0, I135=50.
  IntensityPlanes p = uniform_planes(100, 50, 0, 50);
  CHECK(dop(p).at(1, 1) == doctest::Approx(1.0));
  CHECK(aop(p).theta.at(1, 1) == doctest::Approx(0.0));

  // Half polarized at +pi/4: I45 - I135 = s/2 * d.
  p = uniform_planes(50, 75, 50, 25);
  CHECK(dop(p).at(0, 0) == doctest::Approx(0.5));
  CHECK(aop(p).theta.at(0, 0) == doctest::Approx(pi / 4));

  // Angle pi/2 is represented as +pi/2, not -pi/2.
  p = uniform_planes(0, 50, 100, 50);
  CHECK(aop(p).theta.at(0, 0) == doctest::Approx(pi / 2));
}

TEST_CASE("dark and unpolarized pixels are handled explicitly") {
  const IntensityPlanes dark = uniform_planes(0, 0, 0, 0);
  CHECK(dop(dark).at(0, 0) == 0.0);
  const AngleOfPolarization a = aop(dark);
  CHECK(a.theta.at(0, 0) == 0.0);
  CHECK(a.valid.at(0, 0) == 0);
  const AngleOfPolarization b = aop(uniform_planes(30, 30, 30, 30));
  CHECK(b.valid.at(0, 0) == 0);
  CHECK(aop(uniform_planes(31, 30, 30, 30)).valid.at(0, 0) == 1);
}

TEST_CASE("dop stays within [0, 1] on arbitrary mosaics") {
  const PolarMosaic m = random_mosaic(64, 48, 3);
  const PlaneD d = dop(demosaic(m));
  for (double v : d.pixels) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("8-bit mappings hit their end points exactly") {
  CHECK(map_dop(0.0) == 0);
  CHECK(map_dop(1.0) == 255);
  CHECK(map_dop(0.5) == 191);  // -63.75 + 255 = 191.25
  CHECK(map_aop(-pi / 2) == 0);
  CHECK(map_aop(pi / 2) == 255);
  CHECK(map_aop(0.0) == 128);  // 127.5 rounds away from zero
  CHECK_THROWS_AS(map_dop(-1e-9), std::invalid_argument);
  CHECK_THROWS_AS(map_dop(1.0 + 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(map_aop(pi / 2 + 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(map_dop(std::nan("")), std::invalid_argument);
}

TEST_CASE("map_dop is monotone") {
  int last = -1;
  for (int i = 0; i <= 1000; ++i) {
    const int v = map_dop(i / 1000.0);
    CHECK(v >= last);
    last = v;
  }
}

TEST_CASE("serial and parallel kernels are bit-identical") {
  const PolarMosaic m = random_mosaic(130, 98, 5);
  const PolarFrame s = process(m, Exec::serial);
  const PolarFrame p = process(m, Exec::parallel);
  CHECK(s.planes.i0 == p.planes.i0);
  CHECK(s.gray == p.gray);
  CHECK(s.dop == p.dop);
  CHECK(s.aop.theta == p.aop.theta);
  CHECK(s.rgb.r == p.rgb.r);
  CHECK(s.rgb.b == p.rgb.b);
  CHECK(min_eigen_response(s.gray, Exec::serial) == min_eigen_response(s.gray, Exec::parallel));
}

TEST_CASE("pack_rgb requires matching shapes") {
  CHECK_THROWS_AS(pack_rgb(Plane8(4, 4), Plane8(4, 4), Plane8(4, 5)), std::invalid_argument);
  const PolarRgb rgb = pack_rgb(Plane8(4, 4, 1), Plane8(4, 4, 2), Plane8(4, 4, 3));
  CHECK(rgb.r.at(3, 3) == 1);
  CHECK(rgb.g.at(3, 3) == 2);
  CHECK(rgb.b.at(3, 3) == 3);
}

TEST_CASE("corners of a bright square are found near its vertices") {
  const Plane8 img = square_image(64, 20, 24, 20);
  const std::vector<Corner> c = detect_corners(img, {0.1, 10, 5.0});
  REQUIRE(c.size() == 4);
  const Vec2 expected[] = {{19.5, 23.5}, {39.5, 23.5}, {19.5, 43.5}, {39.5, 43.5}};
  for (const Vec2& e : expected) {
    double best = 1e9;
    for (const Corner& k : c) best = std::min(best, (Vec2(k.x, k.y) - e).norm());
    CHECK(best < 1.5);
  }
}

TEST_CASE("corner list honours ordering, spacing and the cap") {
  testing::Gen gen(21);
  Plane8 img(96, 96);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(gen.integer(0, 255));
  const CornerParams params{0.05, 40, 7.0};
  const std::vector<Corner> c = detect_corners(img, params);
  CHECK(c.size() <= 40);
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i - 1].score >= c[i].score);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      CHECK(std::hypot(c[i].x - c[j].x, c[i].y - c[j].y) >= params.min_distance);
    }
  }
}

TEST_CASE("flat images have no corners and bad parameters are rejected") {
  CHECK(detect_corners(Plane8(32, 32, 77), {0.9, 10, 5}).empty());
  CHECK_THROWS_AS(detect_corners(Plane8(15, 32), {0.5, 10, 5}), std::invalid_argument);
  CHECK_THROWS_AS(detect_corners(Plane8(32, 32), {0.0, 10, 5}), std::invalid_argument);
  CHECK_THROWS_AS(detect_corners(Plane8(32, 32), {1.0, 10, 5}), std::invalid_argument);
}

TEST_CASE("enhanced detection keeps every grayscale corner first") {
  sim::PolarSceneSpec spec = sim::dop_checkerboard(128, 128, 8, 200, 0.2, 0.8, 0.0);
  spec.regions.push_back({10, 10, 30, 30, 400, 0.2, 0.0});  // bright patch in intensity
  const PolarFrame f = process(sim::synthesize_polar_scene(spec));
  const CornerParams params{0.3, 100, 5.0};
  const std::vector<Corner> gray = detect_corners(f.gray, params);
  const std::vector<Corner> enhanced = detect_enhanced(f.rgb, params);
  REQUIRE(!gray.empty());
  CHECK(enhanced.size() > gray.size());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    CHECK(enhanced[i].x == gray[i].x);
    CHECK(enhanced[i].y == gray[i].y);
  }
}

TEST_CASE("PGM and PPM round trip through disk") {
  testing::ScratchDir dir("pnm");
  const PolarMosaic m = random_mosaic(10, 6, 8);
  write_pgm(dir / "a.pgm", m.samples);
  CHECK(read_pgm(dir / "a.pgm") == m.samples);

  const PolarRgb rgb = pack_rgb(Plane8(3, 2, 1), Plane8(3, 2, 2), Plane8(3, 2, 250));
  write_ppm(dir / "a.ppm", rgb);
  const PolarRgb back = read_ppm(dir / "a.ppm");
  CHECK(back.r == rgb.r);
  CHECK(back.g == rgb.g);
  CHECK(back.b == rgb.b);
}

TEST_CASE("PGM reader skips comments and rejects malformed files") {
  testing::ScratchDir dir("pnm_bad");
  write_text(dir / "c.pgm", std::string("P5\n# made by hand\n2 1\n255\n") + char(7) + char(9));
  const Plane8 img = read_pgm(dir / "c.pgm");
  CHECK(img.width == 2);
  CHECK(img.at(1, 0) == 9);

  write_text(dir / "trunc.pgm", "P5\n4 4\n255\n\x01\x02");
  CHECK_THROWS_AS(read_pgm(dir / "trunc.pgm"), DataError);
  write_text(dir / "ascii.pgm", "P2\n2 2\n255\n1 2 3 4\n");
  CHECK_THROWS_AS(read_pgm(dir / "ascii.pgm"), DataError);
  write_text(dir / "deep.pgm", "P5\n2 2\n65535\n12345678");
  CHECK_THROWS_AS(read_pgm(dir / "deep.pgm"), DataError);
  CHECK_THROWS_AS(read_pgm(dir / "missing.pgm"), DataError);
}
