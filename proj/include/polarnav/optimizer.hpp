#pragma once

#include "polarnav/graph.hpp"

#include <stdexcept>
#include <string>

namespace polarnav {

/// The linear system is rank deficient at the start of optimization:
/// typically no prior fixes the gauge.
class IndefiniteSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  int max_iterations = 100;
  double relative_cost_tolerance = 1e-9;
  double step_tolerance = 1e-10;
  double initial_lambda = 1e-9;  // damping is lambda * diag(H)
  bool parallel_linearization = true;
};

enum class Termination { cost_converged, step_converged, max_iterations, damping_exhausted };

const char* to_string(Termination t);

struct SolverStats {
  int iterations = 0;
  int accepted_steps = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  Termination termination = Termination::max_iterations;
  bool converged() const {
    return termination == Termination::cost_converged ||
           termination == Termination::step_converged;
  }
};

/// Levenberg-Marquardt over all states in the graph. Accepted steps never
/// increase the cost. Throws IndefiniteSystemError if the undamped normal
/// equations are singular at the initial estimate.
SolverStats optimize(Graph& graph, const SolverConfig& config = {});

/// Gauss-Newton normal matrix at the current estimate, keys in ascending
/// order (15 columns each).
Eigen::MatrixXd normal_matrix(const Graph& graph);

}  // namespace polarnav
