#include "eventgrad/objectives.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eventgrad {

Objective::Objective(DatasetShard shard, int batch_size)
    : shard_(std::move(shard)), batch_size_(batch_size) {
  if (shard_.size() == 0) throw std::invalid_argument("objective: empty shard");
  if (batch_size_ < 1) throw std::invalid_argument("objective: batch_size must be >= 1");
}

double Objective::local_loss(const ModelState& model) const {
  double loss = 0;
  for (Eigen::Index r = 0; r < shard_.size(); ++r)
    accumulate_sample(model, r, loss, nullptr);
  return loss * batch_scale(shard_.size());
}

ModelState Objective::full_gradient(const ModelState& model) const {
  ModelState grad = zero_model();
  require_same_shape(model, grad);
  double loss = 0;
  for (Eigen::Index r = 0; r < shard_.size(); ++r)
    accumulate_sample(model, r, loss, &grad);
  grad.scale(batch_scale(shard_.size()));
  return grad;
}

ModelState Objective::stochastic_gradient(const ModelState& model,
                                          std::mt19937_64& rng) const {
  // batch covering the shard acts as the exact full-batch oracle
  if (batch_size_ >= shard_.size()) return full_gradient(model);
  std::uniform_int_distribution<Eigen::Index> pick(0, shard_.size() - 1);
  std::vector<int> indices(batch_size_);
  for (auto& i : indices) i = static_cast<int>(pick(rng));
  return gradient_over(model, indices);
}

ModelState Objective::gradient_over(const ModelState& model,
                                    const std::vector<int>& indices) const {
  if (indices.empty()) throw std::invalid_argument("gradient_over: empty batch");
  ModelState grad = zero_model();
  require_same_shape(model, grad);
  double loss = 0;
  for (int r : indices) {
    if (r < 0 || r >= shard_.size()) throw std::out_of_range("gradient_over: bad index");
    accumulate_sample(model, r, loss, &grad);
  }
  grad.scale(batch_scale(static_cast<Eigen::Index>(indices.size())));
  return grad;
}

double Objective::loss_over(const ModelState& model, const std::vector<int>& indices) const {
  if (indices.empty()) throw std::invalid_argument("loss_over: empty batch");
  double loss = 0;
  for (int r : indices) {
    if (r < 0 || r >= shard_.size()) throw std::out_of_range("loss_over: bad index");
    accumulate_sample(model, r, loss, nullptr);
  }
  return loss * batch_scale(static_cast<Eigen::Index>(indices.size()));
}

// ---------------------------------------------------------------------------
// Least squares

LeastSquaresObjective::LeastSquaresObjective(DatasetShard shard, int batch_size)
    : Objective(std::move(shard), batch_size) {}

ModelState LeastSquaresObjective::zero_model() const {
  ParameterBlock x;
  x.name = "x";
  x.rows = shard_.features.cols();
  x.cols = 1;
  x.values = Eigen::VectorXd::Zero(x.rows);
  return ModelState{{x}};
}

void LeastSquaresObjective::accumulate_sample(const ModelState& model, Eigen::Index row,
                                              double& loss, ModelState* grad) const {
  const auto a = shard_.features.row(row).transpose();
  const double resid = a.dot(model.blocks[0].values) - shard_.targets(row);
  loss += 0.5 * resid * resid;
  if (grad) grad->blocks[0].values += resid * a;
}

std::optional<double> LeastSquaresObjective::exact_lipschitz() const {
  const Eigen::MatrixXd gram = shard_.features.transpose() * shard_.features;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// ---------------------------------------------------------------------------
// Softmax helpers

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
  return p / p.sum();
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression

LogisticObjective::LogisticObjective(DatasetShard shard, int batch_size, int classes)
    : Objective(std::move(shard), batch_size), classes_(classes) {
  if (classes_ < 2) throw std::invalid_argument("logistic: classes must be >= 2");
}

ModelState LogisticObjective::zero_model() const {
  const Eigen::Index d = shard_.features.cols();
  ParameterBlock w{"weight", classes_, d, Eigen::VectorXd::Zero(classes_ * d)};
  ParameterBlock b{"bias", classes_, 1, Eigen::VectorXd::Zero(classes_)};
  return ModelState{{w, b}};
}

void LogisticObjective::accumulate_sample(const ModelState& model, Eigen::Index row,
                                          double& loss, ModelState* grad) const {
  const auto a = shard_.features.row(row).transpose();
  const int label = static_cast<int>(shard_.targets(row));
  const auto w = model.blocks[0].as_matrix();
  const auto& b = model.blocks[1].values;

  const Eigen::VectorXd p = softmax(w * a + b);
  loss += -std::log(std::max(p(label), 1e-300));
  if (grad) {
    Eigen::VectorXd dz = p;
    dz(label) -= 1.0;
    grad->blocks[0].as_matrix() += dz * a.transpose();
    grad->blocks[1].values += dz;
  }
}

// ---------------------------------------------------------------------------
// One-hidden-layer MLP

MlpObjective::MlpObjective(DatasetShard shard, int batch_size, int classes, int hidden)
    : Objective(std::move(shard), batch_size), classes_(classes), hidden_(hidden) {
  if (classes_ < 2) throw std::invalid_argument("mlp: classes must be >= 2");
  if (hidden_ < 1) throw std::invalid_argument("mlp: hidden width must be >= 1");
}

ModelState MlpObjective::zero_model() const {
  const Eigen::Index d = shard_.features.cols();
  ParameterBlock w1{"w1", hidden_, d, Eigen::VectorXd::Zero(hidden_ * d)};
  ParameterBlock b1{"b1", hidden_, 1, Eigen::VectorXd::Zero(hidden_)};
  ParameterBlock w2{"w2", classes_, hidden_, Eigen::VectorXd::Zero(classes_ * hidden_)};
  ParameterBlock b2{"b2", classes_, 1, Eigen::VectorXd::Zero(classes_)};
  return ModelState{{w1, b1, w2, b2}};
}

void MlpObjective::accumulate_sample(const ModelState& model, Eigen::Index row,
                                     double& loss, ModelState* grad) const {
  const auto a = shard_.features.row(row).transpose();
  const int label = static_cast<int>(shard_.targets(row));
  const auto w1 = model.blocks[0].as_matrix();
  const auto& b1 = model.blocks[1].values;
  const auto w2 = model.blocks[2].as_matrix();
  const auto& b2 = model.blocks[3].values;

  const Eigen::VectorXd h = (w1 * a + b1).array().tanh();
  const Eigen::VectorXd p = softmax(w2 * h + b2);
  loss += -std::log(std::max(p(label), 1e-300));

  if (grad) {
    Eigen::VectorXd dz2 = p;
    dz2(label) -= 1.0;
    const Eigen::VectorXd dh = w2.transpose() * dz2;
    const Eigen::VectorXd dz1 = dh.array() * (1.0 - h.array().square());
    grad->blocks[0].as_matrix() += dz1 * a.transpose();
    grad->blocks[1].values += dz1;
    grad->blocks[2].as_matrix() += dz2 * h.transpose();
    grad->blocks[3].values += dz2;
  }
}

// ---------------------------------------------------------------------------
// Dataset generation and the objective set

namespace {

// Disjoint shards drawn i.i.d. from one seeded generator; hetero_shift
// displaces per-PE means to dial in data heterogeneity (varsigma > 0).
std::vector<DatasetShard> generate_shards(const ObjectiveConfig& cfg, int n_pes,
                                          std::uint64_t seed) {
  if (!cfg.csv_path.empty()) return load_csv_shards(cfg.csv_path, n_pes);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<DatasetShard> shards(n_pes);

  if (cfg.kind == "least_squares") {
    Eigen::VectorXd x_true(cfg.dim);
    for (Eigen::Index j = 0; j < x_true.size(); ++j) x_true(j) = gauss(rng);
    for (int i = 0; i < n_pes; ++i) {
      DatasetShard s;
      s.features.resize(cfg.samples_per_pe, cfg.dim);
      s.targets.resize(cfg.samples_per_pe);
      const double shift = cfg.hetero_shift * (i - 0.5 * (n_pes - 1));
      for (Eigen::Index r = 0; r < s.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < s.features.cols(); ++c)
          s.features(r, c) = gauss(rng) + shift;
        s.targets(r) = s.features.row(r).dot(x_true) + cfg.noise * gauss(rng);
      }
      shards[i] = std::move(s);
    }
    return shards;
  }

  // Classification: seeded Gaussian clusters, one center per class.
  Eigen::MatrixXd centers(cfg.classes, cfg.features);
  for (Eigen::Index r = 0; r < centers.rows(); ++r)
    for (Eigen::Index c = 0; c < centers.cols(); ++c)
      centers(r, c) = cfg.cluster_spread * gauss(rng);

  std::uniform_int_distribution<int> pick_class(0, cfg.classes - 1);
  for (int i = 0; i < n_pes; ++i) {
    DatasetShard s;
    s.features.resize(cfg.samples_per_pe, cfg.features);
    s.targets.resize(cfg.samples_per_pe);
    const double shift = cfg.hetero_shift * (i - 0.5 * (n_pes - 1));
    for (Eigen::Index r = 0; r < s.features.rows(); ++r) {
      const int label = pick_class(rng);
      for (Eigen::Index c = 0; c < s.features.cols(); ++c)
        s.features(r, c) = centers(label, c) + gauss(rng) + shift;
      s.targets(r) = label;
    }
    shards[i] = std::move(s);
  }
  return shards;
}

std::unique_ptr<Objective> make_local(const ObjectiveConfig& cfg, DatasetShard shard) {
  if (cfg.kind == "least_squares")
    return std::make_unique<LeastSquaresObjective>(std::move(shard), cfg.batch_size);
  if (cfg.kind == "logistic")
    return std::make_unique<LogisticObjective>(std::move(shard), cfg.batch_size, cfg.classes);
  if (cfg.kind == "mlp")
    return std::make_unique<MlpObjective>(std::move(shard), cfg.batch_size, cfg.classes,
                                          cfg.hidden);
  throw std::invalid_argument("unknown objective kind: " + cfg.kind);
}

}  // namespace

ObjectiveSet::ObjectiveSet(const ObjectiveConfig& config, int n_pes, std::uint64_t seed)
    : config_(config) {
  if (n_pes < 1) throw std::invalid_argument("objective set: n_pes must be >= 1");
  auto shards = generate_shards(config, n_pes, seed);
  locals_.reserve(n_pes);
  for (auto& s : shards) locals_.push_back(make_local(config, std::move(s)));
}

ObjectiveSet::ObjectiveSet(ObjectiveConfig config, std::vector<std::unique_ptr<Objective>> locals)
    : config_(std::move(config)), locals_(std::move(locals)) {
  if (locals_.empty()) throw std::invalid_argument("objective set: no local objectives");
  for (const auto& o : locals_)
    if (!o) throw std::invalid_argument("objective set: null local objective");
}

double ObjectiveSet::global_loss(const ModelState& model) const {
  double total = 0;
  for (const auto& o : locals_) total += o->local_loss(model);
  return total / static_cast<double>(locals_.size());
}

ModelState ObjectiveSet::global_gradient(const ModelState& model) const {
  ModelState grad = locals_[0]->full_gradient(model);
  for (size_t i = 1; i < locals_.size(); ++i) grad.axpy(1.0, locals_[i]->full_gradient(model));
  grad.scale(1.0 / static_cast<double>(locals_.size()));
  return grad;
}

std::optional<double> ObjectiveSet::exact_optimum() const {
  if (config_.kind != "least_squares") return std::nullopt;
  // Normal equations over the stacked system: (sum A_i^T A_i) x = sum A_i^T b_i.
  const Eigen::Index d = locals_[0]->shard().features.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (const auto& o : locals_) {
    gram += o->shard().features.transpose() * o->shard().features;
    rhs += o->shard().features.transpose() * o->shard().targets;
  }
  const Eigen::VectorXd x_star = gram.ldlt().solve(rhs);
  ModelState m = zero_model();
  m.blocks[0].values = x_star;
  return global_loss(m);
}

std::vector<DatasetShard> load_csv_shards(const std::string& path, int n_pes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged CSV row in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2)
    throw std::runtime_error("dataset needs at least one row of features and a target");
  if (static_cast<int>(rows.size()) < n_pes)
    throw std::runtime_error("fewer samples than PEs");

  // Contiguous partition; remainder goes to the leading shards.
  const Eigen::Index n_features = static_cast<Eigen::Index>(rows.front().size()) - 1;
  std::vector<DatasetShard> shards(n_pes);
  const size_t base = rows.size() / n_pes, extra = rows.size() % n_pes;
  size_t next = 0;
  for (int i = 0; i < n_pes; ++i) {
    const size_t count = base + (static_cast<size_t>(i) < extra ? 1 : 0);
    DatasetShard s;
    s.features.resize(count, n_features);
    s.targets.resize(count);
    for (size_t r = 0; r < count; ++r, ++next) {
      for (Eigen::Index c = 0; c < n_features; ++c) s.features(r, c) = rows[next][c];
      s.targets(r) = rows[next].back();
    }
    shards[i] = std::move(s);
  }
  return shards;
}

}  // namespace eventgrad
