#include "eventgrad/mixing.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace eventgrad {

namespace {
constexpr double kStochasticTol = 1e-12;
}

MixingMatrix::MixingMatrix(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  const Eigen::Index n = weights_.rows();
  if (n < 1 || weights_.cols() != n)
    throw std::invalid_argument("mixing matrix must be square, n >= 1");

  for (Eigen::Index i = 0; i < n; ++i) {
    double row_sum = 0, col_sum = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = weights_(i, j);
      if (w < 0.0 || w > 1.0)
        throw std::invalid_argument("mixing weight outside [0,1]");
      if (std::abs(w - weights_(j, i)) > kStochasticTol)
        throw std::invalid_argument("mixing matrix not symmetric");
      row_sum += w;
      col_sum += weights_(j, i);
    }
    if (std::abs(row_sum - 1.0) > kStochasticTol || std::abs(col_sum - 1.0) > kStochasticTol)
      throw std::invalid_argument("mixing matrix not doubly stochastic");
  }

  neighbor_lists_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i && weights_(i, j) > 0.0)
        neighbor_lists_[i].push_back(static_cast<int>(j));

  if (n == 1) {
    // Single PE: W = [1], no averaging. rho is 0 by convention.
    rho_ = 0.0;
    return;
  }

  // Dense symmetric eigendecomposition; desk scale (n <= 64) so exactness
  // beats an iterative method.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weights_, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  rho_ = std::max(std::abs(ev(n - 2)), std::abs(ev(0)));
  // tolerance absorbs eigensolver roundoff on exactly periodic matrices
  if (rho_ >= 1.0 - kStochasticTol)
    throw std::invalid_argument("spectral condition violated: rho >= 1");
}

MixingMatrix build_ring_mixing(int n) {
  if (n < 3) throw std::invalid_argument("ring topology undefined for n < 3");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  const double third = 1.0 / 3.0;
  for (int i = 0; i < n; ++i) {
    w(i, i) = third;
    w(i, (i + 1) % n) = third;
    w(i, (i + n - 1) % n) = third;
  }
  // n=3: both off-diagonal assignments hit every entry, giving the all-1/3 matrix.
  return MixingMatrix(w);
}

double mix_power_deviation(const MixingMatrix& w, int k, int i) {
  const int n = w.size();
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  if (i < 0 || i >= n) throw std::invalid_argument("PE index out of range");
  Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
  col(i) = 1.0;
  for (int step = 0; step < k; ++step) col = w.weights() * col;
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(n, 1.0 / n);
  return (uniform - col).squaredNorm();
}

}  // namespace eventgrad
