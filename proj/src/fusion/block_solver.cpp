#include "block_solver.hpp"

#include <algorithm>

namespace polarnav::detail {

void BlockSystem::reset(int num_blocks) {
  n_ = num_blocks;
  const std::size_t count = static_cast<std::size_t>(n_) * n_;
  blocks_.assign(count, Mat15::Zero());
  mask_.assign(count, 0);
  rhs_ = Eigen::VectorXd::Zero(dim());
}

void BlockSystem::add_block(int row, int col, const Mat15& m) {
  const std::size_t i = index(row, col);
  blocks_[i] += m;
  mask_[i] = 1;
}

Eigen::VectorXd BlockSystem::diagonal() const {
  Eigen::VectorXd d(dim());
  for (int k = 0; k < n_; ++k) d.segment<kBlock>(k * kBlock) = block(k, k).diagonal();
  return d;
}

bool BlockSystem::solve(const Eigen::VectorXd& damping, Eigen::VectorXd& x,
                        double min_pivot_ratio) const {
  // Right-looking block Cholesky on a working copy of the lower triangle.
  std::vector<Mat15, Eigen::aligned_allocator<Mat15>> l = blocks_;
  std::vector<char> mask = mask_;
  auto at = [&](int r, int c) -> Mat15& { return l[index(r, c)]; };
  auto has = [&](int r, int c) -> char& { return mask[index(r, c)]; };

  for (int k = 0; k < n_; ++k) {
    Mat15 diag = at(k, k);
    diag.diagonal() += damping.segment<kBlock>(k * kBlock);
    const Eigen::LLT<Mat15> llt(diag);
    if (llt.info() != Eigen::Success) return false;
    const Mat15 lkk = llt.matrixL();
    if (min_pivot_ratio > 0.0) {
      const Mat15& orig = block(k, k);
      for (int i = 0; i < kBlock; ++i) {
        const double scale = std::max(orig(i, i), 0.0) + damping(k * kBlock + i);
        if (lkk(i, i) * lkk(i, i) <= min_pivot_ratio * scale || scale <= 0.0) return false;
      }
    }
    at(k, k) = lkk;
    for (int i = k + 1; i < n_; ++i) {
      if (!has(i, k)) continue;
      // L_ik = A_ik * L_kk^{-T}
      at(i, k) = lkk.triangularView<Eigen::Lower>().solve(at(i, k).transpose()).transpose();
    }
    for (int i = k + 1; i < n_; ++i) {
      if (!has(i, k)) continue;
      for (int j = k + 1; j <= i; ++j) {
        if (!has(j, k)) continue;
        at(i, j).noalias() -= at(i, k) * at(j, k).transpose();
        has(i, j) = 1;
      }
    }
  }

  // Forward substitution L y = b.
  Eigen::VectorXd y = rhs_;
  for (int i = 0; i < n_; ++i) {
    Vec15 acc = y.segment<kBlock>(i * kBlock);
    for (int k = 0; k < i; ++k) {
      if (has(i, k)) acc.noalias() -= at(i, k) * y.segment<kBlock>(k * kBlock);
    }
    y.segment<kBlock>(i * kBlock) = at(i, i).triangularView<Eigen::Lower>().solve(acc);
  }
  // Back substitution L^T x = y.
  x = y;
  for (int i = n_ - 1; i >= 0; --i) {
    Vec15 acc = x.segment<kBlock>(i * kBlock);
    for (int k = i + 1; k < n_; ++k) {
      if (has(k, i)) acc.noalias() -= at(k, i).transpose() * x.segment<kBlock>(k * kBlock);
    }
    x.segment<kBlock>(i * kBlock) =
        at(i, i).transpose().triangularView<Eigen::Upper>().solve(acc);
  }
  return true;
}

Eigen::MatrixXd BlockSystem::dense() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim(), dim());
  for (int r = 0; r < n_; ++r) {
    for (int c = 0; c <= r; ++c) {
      if (!occupied(r, c)) continue;
      h.block<kBlock, kBlock>(r * kBlock, c * kBlock) = block(r, c);
      if (r != c) h.block<kBlock, kBlock>(c * kBlock, r * kBlock) = block(r, c).transpose();
    }
  }
  return h;
}

}  // namespace polarnav::detail
