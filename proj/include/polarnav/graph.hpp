#pragma once

#include "polarnav/factors.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace polarnav {

/// Sliding-window keyframe graph. Holds at most `window` states once
/// slide_window() has run; older keyframes are folded into a MarginalPrior.
class Graph {
 public:
  explicit Graph(std::size_t window = 30) : window_(window) {}

  void add_state(Key key, const NavState& state);
  void add_factor(Factor factor);

  const StateMap& states() const { return states_; }
  StateMap& states() { return states_; }
  const NavState& state(Key key) const;
  bool has_state(Key key) const { return states_.contains(key); }

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t window() const { return window_; }

  /// Marginalizes the oldest keyframes until at most `window` remain.
  /// Returns the removed (key, final estimate) pairs, oldest first.
  std::vector<std::pair<Key, NavState>> slide_window();

  /// Marginalizes one specific key via Schur complement on the system
  /// linearized at the current estimate.
  NavState marginalize(Key key);

  /// Sum of 0.5 * rho(|r|^2) over all factors.
  double cost() const;

 private:
  std::size_t window_;
  StateMap states_;
  std::vector<Factor> factors_;
};

}  // namespace polarnav
