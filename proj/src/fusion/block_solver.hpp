#pragma once

// Symmetric block-sparse system over 15-dim keyframe blocks. The window is
// small (tens of keyframes) and mostly banded, so blocks live in a dense
// n x n grid with an occupancy mask and the factorization skips empty blocks.

#include "polarnav/geom.hpp"

#include <Eigen/Dense>

#include <vector>

namespace polarnav::detail {

class BlockSystem {
 public:
  static constexpr int kBlock = 15;

  explicit BlockSystem(int num_blocks = 0) { reset(num_blocks); }

  void reset(int num_blocks);
  int num_blocks() const { return n_; }
  int dim() const { return n_ * kBlock; }

  /// Adds to lower-triangle block (row >= col).
  void add_block(int row, int col, const Mat15& m);
  void add_rhs(int row, const Vec15& v) { rhs_.segment<kBlock>(row * kBlock) += v; }

  const Eigen::VectorXd& rhs() const { return rhs_; }
  bool occupied(int row, int col) const { return mask_[index(row, col)] != 0; }
  const Mat15& block(int row, int col) const { return blocks_[index(row, col)]; }
  Eigen::VectorXd diagonal() const;

  /// Solves (H + diag(damping)) x = rhs. Returns false if the damped system
  /// is not positive definite; `min_pivot_ratio` rejects pivots whose square
  /// is below that fraction of the original diagonal entry.
  bool solve(const Eigen::VectorXd& damping, Eigen::VectorXd& x,
             double min_pivot_ratio = 0.0) const;

  /// Dense copy of the full symmetric matrix (for tests and marginalization).
  Eigen::MatrixXd dense() const;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * n_ + col;
  }

  int n_ = 0;
  std::vector<Mat15, Eigen::aligned_allocator<Mat15>> blocks_;
  std::vector<char> mask_;
  Eigen::VectorXd rhs_;
};

}  // namespace polarnav::detail
