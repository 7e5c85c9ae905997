#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "polarnav/cli.hpp"
#include "polarnav/errors.hpp"
#include "polarnav/eval.hpp"
#include "polarnav/log_io.hpp"
#include "polarnav/pnm_io.hpp"
#include "polarnav/sim.hpp"
#include "polarnav/trajectory_io.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <sstream>

using namespace polarnav;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  args.insert(args.begin(), "polarnav");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string scenario_path(const std::string& name) {
  return (fs::path(POLARNAV_SOURCE_DIR) / "scenarios" / name).string();
}

const char* const kLogFiles[] = {"imu.csv",        "mag.csv",       "flow.csv", "lidar_odom.csv",
                                 "vio_odom.csv",   "loops.csv",     "truth.tum"};

int csv_rows(const fs::path& p) {
  const std::string text = read_text(p);
  return static_cast<int>(std::count(text.begin(), text.end(), '\n')) - 1;
}

}  // namespace

TEST_CASE("usage errors exit with 1 and help with 0") {
  CHECK(call({}).code == cli::kUsage);
  CHECK(call({"frobnicate"}).code == cli::kUsage);
  CHECK(call({"simulate"}).code == cli::kUsage);
  CHECK(call({"eval", "a.tum", "b.tum", "--align", "sideways"}).code != cli::kOk);
  const Outcome help = call({"--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("simulate") != std::string::npos);
  CHECK(call({"fuse", "--help"}).code == cli::kOk);
}

TEST_CASE("simulate writes the seven log files with provenance") {
  testing::ScratchDir dir("cli_sim");
  const Outcome o = call({"simulate", scenario_path("straight_exact.yaml"), (dir / "log").string()});
  REQUIRE(o.code == cli::kOk);
  for (const char* f : kLogFiles) CHECK(fs::exists(dir / "log" / f));
  const auto comments = read_tum_comments(dir / "log" / "truth.tum");
  REQUIRE(comments.size() >= 2);
  CHECK(comments[0] == "seed 3");
  CHECK(comments[1].rfind("config_hash ", 0) == 0);
  CHECK(csv_rows(dir / "log" / "imu.csv") == 2001);

  CHECK(call({"simulate", scenario_path("straight_exact.yaml"), (dir / "s").string(), "--seeds",
              "4,5"})
            .code == cli::kOk);
  CHECK(read_tum_comments(dir / "s" / "seed_5" / "truth.tum")[0] == "seed 5");
}

TEST_CASE("simulating the same scenario twice is byte-identical") {
  testing::ScratchDir dir("cli_det");
  const std::string sc = scenario_path("zigzag_256m.yaml");
  REQUIRE(call({"simulate", sc, (dir / "a").string(), "--seed", "2"}).code == cli::kOk);
  REQUIRE(call({"simulate", sc, (dir / "b").string(), "--seed", "2"}).code == cli::kOk);
  for (const char* f : kLogFiles) {
    CAPTURE(f);
    CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
  }
  // The full-length scenario covers the intended distance.
  const auto truth = read_tum(dir / "a" / "truth.tum");
  double length = 0.0;
  for (std::size_t i = 1; i < truth.size(); ++i) {
    length += (truth[i].pose.translation - truth[i - 1].pose.translation).norm();
  }
  CHECK(length == doctest::Approx(256.0).epsilon(0.02));
}

TEST_CASE("invalid scenarios exit with 2 and name the line") {
  testing::ScratchDir dir("cli_bad");
  write_text(dir / "zero.yaml", "seed: 1\nduration: 0\npath: {generator: zigzag}\n");
  Outcome o = call({"simulate", (dir / "zero.yaml").string(), (dir / "out").string()});
  CHECK(o.code == cli::kDataError);
  CHECK(o.err.find("duration") != std::string::npos);

  write_text(dir / "typo.yaml", "duration: 5\npath:\n  generator: zigzag\n  sped: 2\n");
  o = call({"simulate", (dir / "typo.yaml").string(), (dir / "out").string()});
  CHECK(o.code == cli::kDataError);
  CHECK(o.err.find("line 4") != std::string::npos);
  CHECK(call({"simulate", (dir / "missing.yaml").string(), (dir / "out").string()}).code ==
        cli::kDataError);
}

TEST_CASE("fuse recovers a noise-free log exactly") {
  testing::ScratchDir dir("cli_fuse");
  const std::string log = (dir / "log").string();
  REQUIRE(call({"simulate", scenario_path("straight_exact.yaml"), log}).code == cli::kOk);
  const Outcome o = call({"fuse", log, "--out", (dir / "run").string()});
  REQUIRE(o.code == cli::kOk);
  for (const char* f : {"estimate.tum", "gating.csv", "stats.json"}) CHECK(fs::exists(dir / "run" / f));

  const auto stats = nlohmann::json::parse(read_text(dir / "run" / "stats.json"));
  CHECK(stats["keyframes"].get<int>() == 51);
  CHECK(stats["nonconverged_solves"].get<int>() == 0);

  const eval::ErrorReport r = eval::evaluate(read_tum(dir / "run" / "estimate.tum"),
                                             read_tum(dir / "log" / "truth.tum"),
                                             eval::AlignMode::none, 0.01);
  CHECK(r.ate_rmse <= 1e-6);
  CHECK(r.series.size() == 51);

  const Outcome e = call({"eval", (dir / "run" / "estimate.tum").string(),
                          (dir / "log" / "truth.tum").string(), "--align", "none"});
  CHECK(e.code == cli::kOk);
  CHECK(fs::exists(dir / "run" / "report.csv"));
  CHECK(fs::exists(dir / "run" / "errors.csv"));
  CHECK(csv_rows(dir / "run" / "errors.csv") == 51);
  CHECK(e.out.find("ATE") != std::string::npos);
}

TEST_CASE("fuse ablations and missing streams") {
  testing::ScratchDir dir("cli_ablate");
  const std::string log = (dir / "log").string();
  REQUIRE(call({"simulate", scenario_path("straight_exact.yaml"), log}).code == cli::kOk);

  // Lidar failure is tolerated while vio is available.
  CHECK(call({"fuse", log, "--no-lidar", "--out", (dir / "a").string()}).code == cli::kOk);
  // Without any odometry the run is unobservable.
  const Outcome o = call({"fuse", log, "--no-lidar", "--no-vio", "--out", (dir / "b").string()});
  CHECK(o.code == cli::kDataError);
  CHECK(!fs::exists(dir / "b" / "estimate.tum"));

  fs::remove(dir / "log" / "vio_odom.csv");
  CHECK(call({"fuse", log, "--out", (dir / "c").string()}).code == cli::kDataError);
  CHECK(call({"fuse", log, "--no-vio", "--out", (dir / "c").string()}).code == cli::kOk);

  fs::remove(dir / "log" / "imu.csv");
  CHECK(call({"fuse", log, "--no-vio", "--out", (dir / "d").string()}).code == cli::kDataError);
}

TEST_CASE("fuse reads a run configuration") {
  testing::ScratchDir dir("cli_cfg");
  const std::string log = (dir / "log").string();
  REQUIRE(call({"simulate", scenario_path("straight_exact.yaml"), log}).code == cli::kOk);
  write_text(dir / "run.yaml", "window: 12\nmag_gate: 0.1\nfactors: {vio: false}\n");
  REQUIRE(call({"fuse", log, "--config", (dir / "run.yaml").string(), "--out",
                (dir / "run").string()})
              .code == cli::kOk);
  const auto stats = nlohmann::json::parse(read_text(dir / "run" / "stats.json"));
  CHECK(stats["window"].get<int>() == 12);
  CHECK(stats["mag_gate_rad"].get<double>() == 0.1);
  CHECK(stats["factors"]["vio"].get<bool>() == false);

  write_text(dir / "bad.yaml", "window: 12\nfactors:\n  lidar: false\n  laser: true\n");
  const Outcome o = call({"fuse", log, "--config", (dir / "bad.yaml").string()});
  CHECK(o.code == cli::kDataError);
  CHECK(o.err.find("line 4") != std::string::npos);
}

TEST_CASE("run configuration schema") {
  const cli::RunConfig c = cli::parse_run_config(
      "keyframe_rate: 10\nseeds: [1, 2]\ngate_enabled: false\nnoise: {mag_sigma: 0.05}\n"
      "corners: {quality: 0.5, max_corners: 20}\n");
  CHECK(c.estimator.keyframe_rate == 10.0);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(!c.estimator.gate_enabled);
  CHECK(c.estimator.noise.mag_sigma == 0.05);
  CHECK(c.corners.quality_level == 0.5);
  CHECK(c.corners.max_corners == 20);
  CHECK(cli::parse_run_config("").estimator.window == 30);

  auto line = [](const std::string& text) {
    try {
      cli::parse_run_config(text);
    } catch (const SchemaError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line("window: 1\n") == 1);
  CHECK(line("window: 5\nkeyframe_rate: -1\n") == 2);
  CHECK(line("window: 5\nnoise:\n  mag_sigma: 0.1\n  flux: 2\n") == 4);
  CHECK(line("seeds: [1, x]\n") == 1);
  CHECK_THROWS_AS(cli::check_observable({false, false, true, true, true, true}), DataError);
  CHECK_NOTHROW(cli::check_observable({false, true, true, true, true, true}));
}

TEST_CASE("polar writes the packed image and both corner lists") {
  testing::ScratchDir dir("cli_polar");
  const polar::PolarMosaic m = sim::synthesize_polar_scene(sim::dop_checkerboard(256, 256, 16, 200.0, 0.2, 0.8, 0.0));
  polar::write_pgm(dir / "mosaic.pgm", m.samples);
  const Outcome o = call({"polar", (dir / "mosaic.pgm").string(), (dir / "out").string()});
  REQUIRE(o.code == cli::kOk);
  const polar::PolarRgb rgb = polar::read_ppm(dir / "out" / "rgb.ppm");
  CHECK(rgb.width() == 128);
  CHECK(rgb.height() == 128);
  CHECK(read_text(dir / "out" / "corners_gray.csv") == "x,y,score\n");
  CHECK(csv_rows(dir / "out" / "corners_enhanced.csv") > 0);

  CHECK(call({"polar", (dir / "mosaic.pgm").string(), (dir / "out").string(), "--quality", "1.5"})
            .code == cli::kUsage);
  write_text(dir / "junk.pgm", "P5\n3 3\n255\nxx");
  CHECK(call({"polar", (dir / "junk.pgm").string(), (dir / "out").string()}).code ==
        cli::kDataError);
}

TEST_CASE("polar halves a full-size sensor frame") {
  testing::ScratchDir dir("cli_polar_full");
  polar::write_pgm(dir / "full.pgm", polar::Plane8(polar::kSensorWidth, polar::kSensorHeight, 60));
  REQUIRE(call({"polar", (dir / "full.pgm").string(), (dir / "out").string()}).code == cli::kOk);
  const polar::PolarRgb rgb = polar::read_ppm(dir / "out" / "rgb.ppm");
  CHECK(rgb.width() == 1224);
  CHECK(rgb.height() == 1024);
}

TEST_CASE("eval reports a known constant offset") {
  testing::ScratchDir dir("cli_eval");
  std::vector<StampedPose> truth, est;
  for (int i = 0; i < 10; ++i) {
    truth.push_back({i * 0.2, Pose3{Rotation3::identity(), Vec3(i, 0, 0)}});
    est.push_back({i * 0.2, Pose3{Rotation3::identity(), Vec3(i, 0, 0.5)}});
  }
  write_tum(dir / "est.tum", est);
  write_tum(dir / "truth.tum", truth);
  const Outcome o = call({"eval", (dir / "est.tum").string(), (dir / "truth.tum").string(),
                          "--align", "none", "--out", (dir / "r").string()});
  REQUIRE(o.code == cli::kOk);
  const std::string report = read_text(dir / "r" / "report.csv");
  CHECK(report.find("none,10,0.5,0,0,0.5,9") != std::string::npos);

  CHECK(call({"eval", (dir / "est.tum").string(), (dir / "truth.tum").string()}).code == cli::kOk);
  CHECK(read_text(dir / "report.csv").find("first-pose,10,0,") != std::string::npos);

  write_text(dir / "late.tum", "100 0 0 0 0 0 0 1\n101 0 0 0 0 0 0 1\n");
  CHECK(call({"eval", (dir / "late.tum").string(), (dir / "truth.tum").string()}).code ==
        cli::kDataError);
  CHECK(call({"eval", (dir / "est.tum").string(), (dir / "truth.tum").string(), "--align", "se3"})
            .code == cli::kDataError);  // collinear track
}
