// Serial vs OpenMP timings for the polarimetry pipeline on a full-size
// frame and for one window of factor linearization.

#include "polarnav/optimizer.hpp"
#include "polarnav/polarimetry.hpp"
#include "polarnav/sim.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

using namespace polarnav;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-26s serial %9.2f ms   parallel %9.2f ms   speedup %.2fx\n", name, serial,
              parallel, serial / parallel);
}

}  // namespace

int main() {
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());

  const sim::PolarSceneSpec spec =
      sim::dop_checkerboard(polar::kSensorWidth, polar::kSensorHeight, 32, 300.0, 0.1, 0.6, 0.4);
  const polar::PolarMosaic mosaic = sim::synthesize_polar_scene(spec);
  const polar::CornerParams params{0.05, 500, 10.0};

  report("process (full frame)",
         best_of(3, [&] { (void)polar::process(mosaic, polar::Exec::serial); }),
         best_of(3, [&] { (void)polar::process(mosaic, polar::Exec::parallel); }));

  const polar::PolarFrame frame = polar::process(mosaic);
  report("detect_enhanced",
         best_of(3, [&] { (void)polar::detect_enhanced(frame.rgb, params, polar::Exec::serial); }),
         best_of(3, [&] { (void)polar::detect_enhanced(frame.rgb, params, polar::Exec::parallel); }));

  // A 30-keyframe window built from a short simulated run.
  sim::Scenario sc;
  sc.duration = 6.0;
  sc.path.kind = sim::PathKind::zigzag;
  sc.path.speed = 2.0;
  sc.path.legs = 2;
  sc.path.leg_length = 10.0;
  const SensorLog log = sim::simulate(sc);
  Graph graph(1000);
  PriorFactor prior;
  prior.mean = log.truth.front().state;
  graph.add_state(0, prior.mean);
  graph.add_factor(prior);
  const std::size_t stride = 40;
  for (std::size_t k = stride, key = 1; k < log.imu.size(); k += stride, ++key) {
    const auto delta = integrate(std::span(log.imu.data() + k - stride, stride + 1), {}, {});
    graph.add_state(key, log.truth[k].state);
    graph.add_factor(make_imu_factor(key - 1, key, delta, ImuNoise{}));
  }
  SolverConfig serial_cfg, parallel_cfg;
  serial_cfg.parallel_linearization = false;
  serial_cfg.max_iterations = 1;
  parallel_cfg.max_iterations = 1;
  report("LM iteration (window)",
         best_of(20, [&] { Graph g = graph; (void)optimize(g, serial_cfg); }),
         best_of(20, [&] { Graph g = graph; (void)optimize(g, parallel_cfg); }));
  return 0;
}
