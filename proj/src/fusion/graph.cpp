#include "polarnav/graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>

namespace polarnav {

namespace {

constexpr int kB = tangent::kDim;
constexpr double kEigenFloor = 1e-12;

bool references(const Factor& f, Key key) {
  const std::vector<Key> keys = keys_of(f);
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

}  // namespace

void Graph::add_state(Key key, const NavState& state) { states_[key] = state; }

void Graph::add_factor(Factor factor) {
  for (Key k : keys_of(factor)) {
    if (!states_.contains(k)) {
      throw MissingKeyError("factor references unknown key " + std::to_string(k));
    }
  }
  factors_.push_back(std::move(factor));
}

const NavState& Graph::state(Key key) const {
  const auto it = states_.find(key);
  if (it == states_.end()) throw MissingKeyError("no state for key " + std::to_string(key));
  return it->second;
}

double Graph::cost() const {
  double c = 0.0;
  for (const Factor& f : factors_) c += factor_cost(f, states_);
  return c;
}

std::vector<std::pair<Key, NavState>> Graph::slide_window() {
  std::vector<std::pair<Key, NavState>> removed;
  while (states_.size() > window_) {
    const Key oldest = states_.begin()->first;
    removed.emplace_back(oldest, marginalize(oldest));
  }
  return removed;
}

NavState Graph::marginalize(Key key) {
  const NavState removed_state = state(key);

  std::vector<Factor> touching;
  std::vector<Factor> kept;
  for (Factor& f : factors_) {
    (references(f, key) ? touching : kept).push_back(std::move(f));
  }

  // Block order: marginalized key first, then its neighbours ascending.
  std::vector<Key> order{key};
  for (const Factor& f : touching) {
    for (Key k : keys_of(f)) {
      if (k != key && std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
    }
  }
  std::sort(order.begin() + 1, order.end());
  auto slot = [&](Key k) {
    return static_cast<int>(std::find(order.begin(), order.end(), k) - order.begin());
  };

  const int n = static_cast<int>(order.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(kB * n, kB * n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(kB * n);
  for (const Factor& f : touching) {
    const Linearization lin = linearize(f, states_);
    for (std::size_t a = 0; a < lin.keys.size(); ++a) {
      const int sa = slot(lin.keys[a]);
      b.segment<kB>(kB * sa) += lin.jacobians[a].transpose() * lin.residual;
      for (std::size_t c = 0; c < lin.keys.size(); ++c) {
        const int sc = slot(lin.keys[c]);
        h.block<kB, kB>(kB * sa, kB * sc) += lin.jacobians[a].transpose() * lin.jacobians[c];
      }
    }
  }

  factors_ = std::move(kept);
  states_.erase(key);
  if (n == 1) return removed_state;

  const int m = kB;
  const int r = kB * (n - 1);
  const Eigen::MatrixXd hmm = 0.5 * (h.topLeftCorner(m, m) + h.topLeftCorner(m, m).transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_m(hmm);
  const Eigen::VectorXd lm = eig_m.eigenvalues();
  const double lm_max = std::max(lm.maxCoeff(), 0.0);
  Eigen::VectorXd lm_inv = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (lm(i) > kEigenFloor * lm_max && lm(i) > 0.0) lm_inv(i) = 1.0 / lm(i);
  }
  const Eigen::MatrixXd hmm_inv =
      eig_m.eigenvectors() * lm_inv.asDiagonal() * eig_m.eigenvectors().transpose();

  const Eigen::MatrixXd hrm = h.bottomLeftCorner(r, m);
  Eigen::MatrixXd schur = h.bottomRightCorner(r, r) - hrm * hmm_inv * hrm.transpose();
  schur = 0.5 * (schur + schur.transpose()).eval();
  const Eigen::VectorXd b_schur = b.tail(r) - hrm * hmm_inv * b.head(m);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(schur);
  const Eigen::VectorXd lam = eig.eigenvalues();
  const double lam_max = std::max(lam.maxCoeff(), 0.0);
  std::vector<int> keep;
  for (int i = 0; i < r; ++i) {
    if (lam(i) > kEigenFloor * lam_max && lam(i) > 0.0) keep.push_back(i);
  }
  if (keep.empty()) return removed_state;

  MarginalPrior prior;
  prior.keys.assign(order.begin() + 1, order.end());
  for (Key k : prior.keys) prior.linearization.push_back(states_.at(k));
  const int rank = static_cast<int>(keep.size());
  prior.sqrt_information.resize(rank, r);
  prior.offset.resize(rank);
  for (int row = 0; row < rank; ++row) {
    const int i = keep[row];
    const double s = std::sqrt(lam(i));
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    prior.sqrt_information.row(row) = s * v.transpose();
    prior.offset(row) = v.dot(b_schur) / s;
  }
  factors_.push_back(std::move(prior));
  return removed_state;
}

}  // namespace polarnav
