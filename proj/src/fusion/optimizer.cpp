#include "polarnav/optimizer.hpp"

#include "block_solver.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace polarnav {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::cost_converged: return "cost_converged";
    case Termination::step_converged: return "step_converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::damping_exhausted: return "damping_exhausted";
  }
  return "unknown";
}

namespace {

constexpr int kB = tangent::kDim;
constexpr double kGaugePivotRatio = 1e-12;
constexpr double kMaxLambda = 1e32;

struct Linearized {
  detail::BlockSystem system;
  double cost = 0.0;
};

std::vector<Linearization> linearize_all(const Graph& graph, bool parallel) {
  const auto& factors = graph.factors();
  const auto& states = graph.states();
  std::vector<Linearization> out(factors.size());
  const int n = static_cast<int>(factors.size());
  if (parallel) {
    // Each factor writes only its own slot; accumulation below is serial, so
    // the result does not depend on the thread count.
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) out[i] = linearize(factors[i], states);
  } else {
    for (int i = 0; i < n; ++i) out[i] = linearize(factors[i], states);
  }
  return out;
}

void build(const Graph& graph, bool parallel, Linearized& lin) {
  std::unordered_map<Key, int> slot;
  int idx = 0;
  for (const auto& [key, _] : graph.states()) slot[key] = idx++;
  lin.system.reset(idx);
  lin.cost = 0.0;

  const std::vector<Linearization> all = linearize_all(graph, parallel);
  for (const Linearization& l : all) {
    lin.cost += l.cost;
    for (std::size_t a = 0; a < l.keys.size(); ++a) {
      const int sa = slot.at(l.keys[a]);
      lin.system.add_rhs(sa, -(l.jacobians[a].transpose() * l.residual));
      for (std::size_t c = 0; c < l.keys.size(); ++c) {
        const int sc = slot.at(l.keys[c]);
        if (sc > sa) continue;
        const Mat15 block = l.jacobians[a].transpose() * l.jacobians[c];
        lin.system.add_block(sa, sc, block);
      }
    }
  }
}

StateMap apply_step(const StateMap& states, const Eigen::VectorXd& dx) {
  StateMap out;
  int idx = 0;
  for (const auto& [key, s] : states) {
    out.emplace_hint(out.end(), key, retract(s, dx.segment<kB>(kB * idx)));
    ++idx;
  }
  return out;
}

double total_cost(const Graph& graph, const StateMap& states) {
  double c = 0.0;
  for (const Factor& f : graph.factors()) c += factor_cost(f, states);
  return c;
}

// Predicted cost decrease of the linear model for step dx:
// -(g^T dx + 0.5 dx^T H dx) where rhs = -g.
double predicted_decrease(const detail::BlockSystem& sys, const Eigen::VectorXd& dx) {
  const int n = sys.num_blocks();
  double quad = 0.0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c <= r; ++c) {
      if (!sys.occupied(r, c)) continue;
      const double v = dx.segment<kB>(kB * r).dot(sys.block(r, c) * dx.segment<kB>(kB * c));
      quad += (r == c) ? v : 2.0 * v;
    }
  }
  return sys.rhs().dot(dx) - 0.5 * quad;
}

}  // namespace

Eigen::MatrixXd normal_matrix(const Graph& graph) {
  Linearized lin;
  build(graph, false, lin);
  return lin.system.dense();
}

SolverStats optimize(Graph& graph, const SolverConfig& config) {
  SolverStats stats;
  if (graph.states().empty()) {
    stats.termination = Termination::cost_converged;
    return stats;
  }

  Linearized lin;
  build(graph, config.parallel_linearization, lin);
  stats.initial_cost = lin.cost;
  stats.final_cost = lin.cost;

  {
    Eigen::VectorXd probe;
    if (!lin.system.solve(Eigen::VectorXd::Zero(lin.system.dim()), probe, kGaugePivotRatio)) {
      throw IndefiniteSystemError(
          "normal equations are singular at the initial estimate (gauge not fixed?)");
    }
  }

  double lambda = config.initial_lambda;
  double nu = 2.0;
  double cost = lin.cost;
  bool need_rebuild = false;

  while (stats.iterations < config.max_iterations) {
    if (cost == 0.0) {
      stats.termination = Termination::cost_converged;
      break;
    }
    if (need_rebuild) {
      build(graph, config.parallel_linearization, lin);
      need_rebuild = false;
    }
    ++stats.iterations;

    const Eigen::VectorXd diag = lin.system.diagonal().cwiseMax(1e-9);
    Eigen::VectorXd dx;
    if (!lin.system.solve(lambda * diag, dx)) {
      lambda *= nu;
      nu *= 2.0;
      if (lambda > kMaxLambda) {
        stats.termination = Termination::damping_exhausted;
        break;
      }
      continue;
    }
    const double step_norm = dx.norm();
    const StateMap candidate = apply_step(graph.states(), dx);
    const double new_cost = total_cost(graph, candidate);
    const double predicted = predicted_decrease(lin.system, dx);
    const double actual = cost - new_cost;

    if (actual > 0.0 || (actual == 0.0 && step_norm == 0.0)) {
      graph.states() = candidate;
      ++stats.accepted_steps;
      const double rel = actual / cost;
      cost = new_cost;
      const double rho = predicted > 0.0 ? actual / predicted : 0.0;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      need_rebuild = true;
      if (rel < config.relative_cost_tolerance) {
        stats.termination = Termination::cost_converged;
        break;
      }
      if (step_norm < config.step_tolerance) {
        stats.termination = Termination::step_converged;
        break;
      }
    } else {
      if (step_norm < config.step_tolerance) {
        stats.termination = Termination::step_converged;
        break;
      }
      lambda *= nu;
      nu *= 2.0;
      if (lambda > kMaxLambda) {
        stats.termination = Termination::damping_exhausted;
        break;
      }
    }
  }
  stats.final_cost = cost;
  return stats;
}

}  // namespace polarnav
