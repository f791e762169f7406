#include "eventgrad/model.hpp"

namespace eventgrad {

Eigen::VectorXd ModelState::flatten() const {
  Eigen::VectorXd v(total_dim());
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    v.segment(off, b.size()) = b.values;
    off += b.size();
  }
  return v;
}

void ModelState::unflatten(const Eigen::VectorXd& v) {
  if (v.size() != total_dim()) throw std::invalid_argument("unflatten: dimension mismatch");
  Eigen::Index off = 0;
  for (auto& b : blocks) {
    b.values = v.segment(off, b.size());
    off += b.size();
  }
}

void ModelState::axpy(double a, const ModelState& other) {
  require_same_shape(*this, other);
  for (size_t i = 0; i < blocks.size(); ++i)
    blocks[i].values += a * other.blocks[i].values;
}

bool same_shape(const ModelState& a, const ModelState& b) {
  if (a.blocks.size() != b.blocks.size()) return false;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    if (a.blocks[i].rows != b.blocks[i].rows || a.blocks[i].cols != b.blocks[i].cols)
      return false;
  }
  return true;
}

}  // namespace eventgrad
