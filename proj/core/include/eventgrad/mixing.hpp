#pragma once

#include <Eigen/Core>
#include <vector>

namespace eventgrad {

/// Symmetric doubly stochastic averaging weights over n PEs.
/// Construction validates symmetry, row/column sums and the spectral
/// condition rho < 1; instances are immutable afterwards and safe to
/// share read-only across workers.
class MixingMatrix {
 public:
  /// Validates `weights` and computes the spectral quantity rho.
  /// Throws std::invalid_argument if any invariant fails.
  explicit MixingMatrix(Eigen::MatrixXd weights);

  int size() const { return static_cast<int>(weights_.rows()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  double weight(int i, int j) const { return weights_(i, j); }

  /// Off-diagonal indices j with weights[i][j] > 0.
  const std::vector<int>& neighbors(int i) const { return neighbor_lists_[i]; }

  /// rho = max(|lambda_2|, |lambda_n|), eigenvalues sorted descending.
  double spectral_gap() const { return rho_; }

 private:
  Eigen::MatrixXd weights_;
  std::vector<std::vector<int>> neighbor_lists_;
  double rho_;
};

/// Ring mixing matrix: self-weight and both neighbor weights 1/3.
/// n=3 degenerates to the complete graph (all entries 1/3). n < 3 is rejected.
MixingMatrix build_ring_mixing(int n);

/// ||1_n/n - W^k e_i||^2, the squared deviation of column i of W^k from
/// the uniform vector. Bounded above by rho^k.
double mix_power_deviation(const MixingMatrix& w, int k, int i);

}  // namespace eventgrad
