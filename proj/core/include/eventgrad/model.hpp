#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace eventgrad {

/// One named tensor of the model (a weight matrix or bias vector),
/// stored as a flattened column-major vector.
struct ParameterBlock {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;  // 1 for vectors
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }

  // View as a rows x cols matrix.
  Eigen::Map<const Eigen::MatrixXd> as_matrix() const {
    return {values.data(), rows, cols};
  }
  Eigen::Map<Eigen::MatrixXd> as_matrix() {
    return {values.data(), rows, cols};
  }
};

/// Full model of one PE: an ordered list of parameter blocks. Block order
/// and shapes are identical across PEs throughout a run; gradients reuse
/// the same shape.
struct ModelState {
  std::vector<ParameterBlock> blocks;

  Eigen::Index total_dim() const {
    Eigen::Index d = 0;
    for (const auto& b : blocks) d += b.size();
    return d;
  }

  void set_zero() {
    for (auto& b : blocks) b.values.setZero();
  }

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& v);

  // In-place this += a * other. Shapes must match.
  void axpy(double a, const ModelState& other);
  void scale(double a) {
    for (auto& b : blocks) b.values *= a;
  }

  double squared_norm() const {
    double s = 0;
    for (const auto& b : blocks) s += b.values.squaredNorm();
    return s;
  }
};

bool same_shape(const ModelState& a, const ModelState& b);

inline void require_same_shape(const ModelState& a, const ModelState& b) {
  if (!same_shape(a, b)) throw std::invalid_argument("model shape mismatch");
}

}  // namespace eventgrad
