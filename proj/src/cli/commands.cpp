#include "polarnav/cli.hpp"

#include "polarnav/errors.hpp"
#include "polarnav/eval.hpp"
#include "polarnav/log_io.hpp"
#include "polarnav/pnm_io.hpp"
#include "polarnav/scenario.hpp"
#include "polarnav/sim.hpp"
#include "polarnav/trajectory_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <ostream>

namespace polarnav::cli {

namespace fs = std::filesystem;

namespace {

class NotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
};

struct FuseArgs {
  std::string log_dir;
  std::string config;
  std::string out;
  bool no_mag = false, no_flow = false, no_height = false;
  bool no_vio = false, no_lidar = false, no_loop = false;
  bool no_gate = false;
  std::optional<double> gate;
  bool strict = false;
};

struct PolarArgs {
  std::string mosaic;
  std::string out;
  std::optional<double> quality;
  std::optional<int> max_corners;
  std::optional<double> min_distance;
};

struct EvalArgs {
  std::string estimate;
  std::string truth;
  std::string align = "first-pose";
  double max_dt = 0.01;
  std::string out;
  bool rotation = false;
};

void simulate_cmd(const SimulateArgs& a, std::ostream& out) {
  const std::string text = read_text(a.scenario);
  sim::Scenario base;
  try {
    base = sim::parse_scenario(text);
  } catch (const SchemaError& e) {
    throw SchemaError(a.scenario + ": " + e.what(), 0);
  }
  const std::string hash = fnv1a_hex(text);

  auto run_one = [&](std::uint64_t seed, const fs::path& dir) {
    sim::Scenario s = base;
    s.seed = seed;
    const SensorLog log = sim::simulate(s);
    write_log(dir, log, {seed, hash});
    out << "wrote " << dir.string() << " (seed " << seed << ", " << log.imu.size()
        << " imu samples)\n";
  };

  if (!a.seeds.empty()) {
    for (std::uint64_t seed : a.seeds) run_one(seed, fs::path(a.out) / ("seed_" + std::to_string(seed)));
  } else {
    run_one(a.seed.value_or(base.seed), a.out);
  }
}

void require_stream(bool present, bool enabled, const char* file, const char* flag) {
  if (enabled && !present) {
    throw DataError(std::string("missing ") + file + " (pass " + flag + " to run without it)");
  }
}

void fuse_cmd(const FuseArgs& a, std::ostream& out, std::ostream& err) {
  RunConfig rc = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  EstimatorConfig& cfg = rc.estimator;
  if (a.no_mag) cfg.use.mag = false;
  if (a.no_flow) cfg.use.flow_velocity = false;
  if (a.no_height) cfg.use.height = false;
  if (a.no_vio) cfg.use.vio = false;
  if (a.no_lidar) cfg.use.lidar = false;
  if (a.no_loop) cfg.use.loop = false;
  if (a.no_gate) cfg.gate_enabled = false;
  if (a.gate) cfg.mag_gate = *a.gate;
  check_observable(cfg.use);

  const LogContents c = read_log(a.log_dir);
  require_stream(c.has_mag, cfg.use.mag, "mag.csv", "--no-mag");
  require_stream(c.has_flow, cfg.use.flow_velocity, "flow.csv", "--no-flow");
  require_stream(c.has_flow, cfg.use.height, "flow.csv", "--no-height");
  require_stream(c.has_lidar, cfg.use.lidar, "lidar_odom.csv", "--no-lidar");
  require_stream(c.has_vio, cfg.use.vio, "vio_odom.csv", "--no-vio");
  require_stream(c.has_loops, cfg.use.loop, "loops.csv", "--no-loop");

  const EstimatorResult r = run_estimator(c.log, cfg);

  fs::path dir = a.out.empty() ? (rc.output ? *rc.output : fs::path(a.log_dir)) : fs::path(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string());

  std::vector<StampedPose> poses;
  for (const KeyframeEstimate& k : r.trajectory) poses.push_back({k.t, k.state.pose});
  write_tum(dir / "estimate.tum", poses);

  std::string gating = "t,innovation_rad,accepted\n";
  int rejected = 0;
  char buf[96];
  for (const GateRecord& g : r.gating) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%d\n", g.t, g.innovation, g.accepted ? 1 : 0);
    gating += buf;
    rejected += g.accepted ? 0 : 1;
  }
  write_text(dir / "gating.csv", gating);

  nlohmann::ordered_json stats;
  stats["keyframes"] = r.trajectory.size();
  stats["solves"] = r.solves;
  stats["nonconverged_solves"] = r.nonconverged;
  stats["total_iterations"] = r.total_iterations;
  stats["initial_heading_rad"] = r.initial_heading;
  stats["mag_samples_gated"] = r.gating.size();
  stats["mag_samples_rejected"] = rejected;
  stats["factors"] = {{"lidar", cfg.use.lidar},   {"vio", cfg.use.vio},
                      {"loop", cfg.use.loop},     {"mag", cfg.use.mag},
                      {"flow_velocity", cfg.use.flow_velocity}, {"height", cfg.use.height}};
  stats["mag_gate_rad"] = cfg.gate_enabled ? nlohmann::ordered_json(cfg.mag_gate) : nullptr;
  stats["window"] = cfg.window;
  write_text(dir / "stats.json", stats.dump(2) + "\n");

  out << "fused " << r.trajectory.size() << " keyframes into " << (dir / "estimate.tum").string()
      << "\n";
  if (r.nonconverged > 0) {
    err << "warning: " << r.nonconverged << " of " << r.solves
        << " window solves hit a non-convergence termination\n";
    if (a.strict) throw NotConvergedError("solver did not converge (--strict)");
  }
}

std::string corners_csv(const std::vector<polar::Corner>& corners) {
  std::string s = "x,y,score\n";
  char buf[128];
  for (const polar::Corner& c : corners) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f\n", c.x, c.y, c.score);
    s += buf;
  }
  return s;
}

void polar_cmd(const PolarArgs& a, std::ostream& out) {
  polar::CornerParams params{0.9, 150, 10.0};
  if (a.quality) params.quality_level = *a.quality;
  if (a.max_corners) params.max_corners = *a.max_corners;
  if (a.min_distance) params.min_distance = *a.min_distance;

  polar::PolarMosaic mosaic;
  mosaic.samples = polar::read_pgm(a.mosaic);
  const polar::PolarFrame frame = polar::process(mosaic);
  const std::vector<polar::Corner> gray = polar::detect_corners(frame.gray, params);
  const std::vector<polar::Corner> enhanced = polar::detect_enhanced(frame.rgb, params);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw DataError("cannot create " + a.out);
  polar::write_ppm(fs::path(a.out) / "rgb.ppm", frame.rgb);
  write_text(fs::path(a.out) / "corners_gray.csv", corners_csv(gray));
  write_text(fs::path(a.out) / "corners_enhanced.csv", corners_csv(enhanced));
  out << frame.rgb.width() << "x" << frame.rgb.height() << " rgb, " << gray.size()
      << " gray corners, " << enhanced.size() << " enhanced corners\n";
}

void eval_cmd(const EvalArgs& a, std::ostream& out) {
  const eval::AlignMode mode = eval::parse_align_mode(a.align);
  const std::vector<StampedPose> est = read_tum(a.estimate);
  const std::vector<StampedPose> truth = read_tum(a.truth);
  const eval::ErrorReport r = eval::evaluate(est, truth, mode, a.max_dt, a.rotation);
  const fs::path dir = a.out.empty() ? fs::path(a.estimate).parent_path() : fs::path(a.out);
  if (!dir.empty()) {
    std::error_code ec;
    fs::create_directories(dir, ec);
  }
  write_text(dir / "report.csv", eval::report_csv(r));
  write_text(dir / "errors.csv", eval::errors_csv(r));
  out << eval::summary_text(r);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polarization-aided multi-sensor navigation toolkit", "polarnav"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a sensor log from a scenario");
  simulate->add_option("scenario", sim_args.scenario, "Scenario YAML file")->required();
  simulate->add_option("out", sim_args.out, "Output directory")->required();
  simulate->add_option("--seed", sim_args.seed, "Override the scenario seed");
  simulate->add_option("--seeds", sim_args.seeds, "Write one log per seed into out/seed_<n>")
      ->delimiter(',');

  FuseArgs fuse_args;
  CLI::App* fuse = app.add_subcommand("fuse", "Run the sliding-window estimator on a log");
  fuse->add_option("log_dir", fuse_args.log_dir, "Sensor log directory")->required();
  fuse->add_option("--config", fuse_args.config, "Run configuration YAML");
  fuse->add_option("--out", fuse_args.out, "Output directory (default: the log directory)");
  fuse->add_flag("--no-mag", fuse_args.no_mag, "Disable magnetometer heading factors");
  fuse->add_flag("--no-flow", fuse_args.no_flow, "Disable optical-flow velocity factors");
  fuse->add_flag("--no-height", fuse_args.no_height, "Disable height factors");
  fuse->add_flag("--no-vio", fuse_args.no_vio, "Disable visual odometry factors");
  fuse->add_flag("--no-lidar", fuse_args.no_lidar, "Disable lidar odometry factors");
  fuse->add_flag("--no-loop", fuse_args.no_loop, "Disable loop-closure factors");
  fuse->add_flag("--no-gate", fuse_args.no_gate, "Accept every magnetometer sample");
  fuse->add_option("--gate", fuse_args.gate, "Magnetometer gate in rad")->check(CLI::NonNegativeNumber);
  fuse->add_flag("--strict", fuse_args.strict, "Exit with code 3 if any solve fails to converge");

  PolarArgs polar_args;
  CLI::App* polar = app.add_subcommand("polar", "Process a raw polarization mosaic");
  polar->add_option("mosaic", polar_args.mosaic, "Binary PGM mosaic")->required();
  polar->add_option("out", polar_args.out, "Output directory")->required();
  polar->add_option("--quality", polar_args.quality, "Corner quality level in (0, 1)")
      ->check(CLI::Range(0.0, 1.0));
  polar->add_option("--max-corners", polar_args.max_corners, "Maximum corners per image")
      ->check(CLI::PositiveNumber);
  polar->add_option("--min-distance", polar_args.min_distance, "Minimum corner spacing in px")
      ->check(CLI::NonNegativeNumber);

  EvalArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("eval", "Compare an estimate with ground truth");
  evaluate->add_option("estimate", eval_args.estimate, "Estimated trajectory (TUM)")->required();
  evaluate->add_option("truth", eval_args.truth, "Ground-truth trajectory (TUM)")->required();
  evaluate->add_option("--align", eval_args.align, "none | first-pose | se3")
      ->check(CLI::IsMember({"none", "first-pose", "se3"}));
  evaluate->add_option("--max-dt", eval_args.max_dt, "Association tolerance in s")
      ->check(CLI::NonNegativeNumber);
  evaluate->add_option("--out", eval_args.out, "Output directory (default: next to estimate)");
  evaluate->add_flag("--rotation", eval_args.rotation, "Also report rotation error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) simulate_cmd(sim_args, out);
    if (fuse->parsed()) fuse_cmd(fuse_args, out, err);
    if (polar->parsed()) polar_cmd(polar_args, out);
    if (evaluate->parsed()) eval_cmd(eval_args, out);
  } catch (const NotConvergedError& e) {
    err << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace polarnav::cli
