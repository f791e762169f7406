#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eventgrad/model.hpp"

namespace eventgrad {

/// Per-PE shard of (feature vector, target) samples. Targets hold real
/// values for least squares and class indices (as doubles) for
/// classification oracles.
struct DatasetShard {
  Eigen::MatrixXd features;  // samples x features
  Eigen::VectorXd targets;

  Eigen::Index size() const { return features.rows(); }
};

/// Local objective f_i of one PE. Immutable after construction; the caller
/// owns the per-PE RNG consumed by mini-batch sampling, so gradient calls
/// on distinct PEs may run concurrently.
class Objective {
 public:
  virtual ~Objective() = default;

  const DatasetShard& shard() const { return shard_; }
  int batch_size() const { return batch_size_; }

  /// Zero-initialized model of the right shape for this objective.
  virtual ModelState zero_model() const = 0;

  /// Exact local loss f_i(x) over the whole shard.
  double local_loss(const ModelState& model) const;

  /// Exact gradient of f_i over the whole shard (no sampling).
  ModelState full_gradient(const ModelState& model) const;

  /// Unbiased gradient estimate from a mini-batch sampled uniformly with
  /// replacement. Deterministic given the RNG state.
  ModelState stochastic_gradient(const ModelState& model, std::mt19937_64& rng) const;

  /// Gradient over an explicit sample index list (exposed for oracles).
  ModelState gradient_over(const ModelState& model, const std::vector<int>& indices) const;
  double loss_over(const ModelState& model, const std::vector<int>& indices) const;

  /// Largest eigenvalue of the local Hessian when available in closed form
  /// (least squares); nullopt otherwise.
  virtual std::optional<double> exact_lipschitz() const { return std::nullopt; }

 protected:
  Objective(DatasetShard shard, int batch_size);

  /// Adds the per-sample loss/gradient of sample `row` into (loss, grad).
  virtual void accumulate_sample(const ModelState& model, Eigen::Index row,
                                 double& loss, ModelState* grad) const = 0;

  /// Scale applied to a sum of `count` per-sample gradients so that the
  /// full gradient convention holds: sum over the shard for least squares,
  /// mean for the cross-entropy oracles.
  virtual double batch_scale(Eigen::Index count) const = 0;

  DatasetShard shard_;
  int batch_size_;
};

/// Distributed least squares f_i(x) = 1/2 ||A_i x - b_i||^2.
class LeastSquaresObjective : public Objective {
 public:
  LeastSquaresObjective(DatasetShard shard, int batch_size);
  ModelState zero_model() const override;
  std::optional<double> exact_lipschitz() const override;

 protected:
  void accumulate_sample(const ModelState& model, Eigen::Index row, double& loss,
                         ModelState* grad) const override;
  double batch_scale(Eigen::Index count) const override {
    return static_cast<double>(shard_.size()) / static_cast<double>(count);
  }
};

/// Multiclass logistic regression (softmax cross-entropy, mean over shard).
/// Blocks: weight matrix (classes x features), bias (classes).
class LogisticObjective : public Objective {
 public:
  LogisticObjective(DatasetShard shard, int batch_size, int classes);
  ModelState zero_model() const override;

 protected:
  void accumulate_sample(const ModelState& model, Eigen::Index row, double& loss,
                         ModelState* grad) const override;
  double batch_scale(Eigen::Index count) const override {
    return 1.0 / static_cast<double>(count);
  }

 private:
  int classes_;
};

/// One-hidden-layer MLP: tanh activation, softmax cross-entropy, mean over
/// shard. Blocks: W1 (hidden x features), b1, W2 (classes x hidden), b2 --
/// four heterogeneous blocks exercising per-block triggering.
class MlpObjective : public Objective {
 public:
  MlpObjective(DatasetShard shard, int batch_size, int classes, int hidden);
  ModelState zero_model() const override;

 protected:
  void accumulate_sample(const ModelState& model, Eigen::Index row, double& loss,
                         ModelState* grad) const override;
  double batch_scale(Eigen::Index count) const override {
    return 1.0 / static_cast<double>(count);
  }

 private:
  int classes_;
  int hidden_;
};

/// Generation parameters for the built-in synthetic datasets.
struct ObjectiveConfig {
  std::string kind = "least_squares";  // least_squares | logistic | mlp
  int dim = 16;                        // least squares: feature dimension
  int features = 8;                    // classification oracles
  int classes = 2;
  int hidden = 8;  // mlp only
  int samples_per_pe = 64;
  int batch_size = 8;
  double noise = 0.1;          // least squares target noise
  double cluster_spread = 2.0; // classification cluster separation
  double hetero_shift = 0.0;   // per-PE mean shift (varsigma > 0 knob)
  std::string csv_path;        // optional dataset import
};

/// All PEs' objectives over disjoint shards of one seeded synthetic
/// dataset (or an imported CSV split contiguously across PEs).
class ObjectiveSet {
 public:
  ObjectiveSet(const ObjectiveConfig& config, int n_pes, std::uint64_t seed);

  /// Wraps pre-built local objectives (explicit shards, no generation).
  ObjectiveSet(ObjectiveConfig config, std::vector<std::unique_ptr<Objective>> locals);

  int size() const { return static_cast<int>(locals_.size()); }
  const Objective& local(int i) const { return *locals_[i]; }
  const ObjectiveConfig& config() const { return config_; }

  ModelState zero_model() const { return locals_[0]->zero_model(); }

  /// f(x) = (1/n) sum_i f_i(x); used for metrics and the averaged model.
  double global_loss(const ModelState& model) const;

  /// Exact mean gradient (1/n) sum_i grad f_i(x).
  ModelState global_gradient(const ModelState& model) const;

  /// Exact minimum of the global objective (least squares only).
  std::optional<double> exact_optimum() const;

 private:
  ObjectiveConfig config_;
  std::vector<std::unique_ptr<Objective>> locals_;
};

/// Rows: features..., target. Throws on ragged or empty input.
std::vector<DatasetShard> load_csv_shards(const std::string& path, int n_pes);

}  // namespace eventgrad
