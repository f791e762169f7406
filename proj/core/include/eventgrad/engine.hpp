#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "eventgrad/comm.hpp"
#include "eventgrad/mixing.hpp"
#include "eventgrad/model.hpp"
#include "eventgrad/objectives.hpp"
#include "eventgrad/trigger.hpp"

namespace eventgrad {

enum class Algorithm { regular, eventgrad };

struct TriggerConfig {
  double horizon = 1.0;
  int history_len = 1;
  double delta0 = 0.0;
  ThresholdSchedule schedule;
};

enum class InitKind { zero, random };

struct RunConfig {
  int n = 8;
  Algorithm algorithm = Algorithm::regular;
  double gamma = 0.05;
  int iterations = 100;
  std::uint64_t seed = 0;
  ObjectiveConfig objective;
  std::optional<Eigen::MatrixXd> custom_mixing;  // ring when absent
  std::optional<TriggerConfig> trigger;          // eventgrad only
  std::optional<double> topk_percent;            // eventgrad only
  int staleness = 0;  // extra iterations before a put becomes visible
  bool self_fresh = false;
  InitKind init = InitKind::zero;
  double init_scale = 1.0;
};

struct MetricsRow {
  int iter;
  double loss;           // global loss at the averaged model
  double disagreement;   // (1/n) sum_i ||x_i - mean||^2
  std::uint64_t messages_cum;
  std::uint64_t volume_cum;
  int events;            // triggered (PE, block) pairs this iteration
};

struct RunMetrics {
  std::vector<MetricsRow> rows;
  ModelState averaged_model;
  double final_loss = 0;
  double rho = 0;
  double wall_seconds = 0;
  CommStats stats;
  std::uint64_t epsilon_violations = 0;
  double iterations_per_epoch = 0;
};

/// Deterministic single-process simulator for both algorithms. PEs advance
/// in index order; event puts commit at the end-of-iteration barrier in
/// ascending (apply-iteration, src, block) order, so results are
/// reproducible bit-for-bit given (config, seed).
class Simulation {
 public:
  explicit Simulation(const RunConfig& config);

  /// Advances one iteration and appends one metrics row.
  void step();

  int iteration() const { return iter_; }
  const std::vector<ModelState>& states() const { return states_; }
  const MixingMatrix& mixing() const { return mixing_; }
  const ObjectiveSet& objectives() const { return objectives_; }
  const CommStats& stats() const { return stats_; }
  const std::vector<MetricsRow>& rows() const { return rows_; }
  std::uint64_t epsilon_violations() const { return epsilon_violations_; }
  /// Per-PE, per-block trigger state; empty for the regular algorithm.
  const std::vector<std::vector<TriggerState>>& triggers() const { return triggers_; }
  const std::vector<Window>& windows() const { return windows_; }

  ModelState averaged_model() const;
  double disagreement() const;

 private:
  void step_regular();
  void step_eventgrad();
  void apply_pending_puts();

  struct PendingPut {
    int apply_iter;
    Message msg;
  };

  RunConfig config_;
  ObjectiveSet objectives_;
  MixingMatrix mixing_;
  std::vector<ModelState> states_;
  std::vector<std::mt19937_64> rngs_;

  // eventgrad state
  std::vector<std::vector<TriggerState>> triggers_;  // [pe][block]
  std::vector<Window> windows_;
  std::vector<PendingPut> pending_;

  CommStats stats_;
  std::vector<MetricsRow> rows_;
  std::uint64_t epsilon_violations_ = 0;
  int iter_ = 0;
};

/// Executes the configured number of iterations, averages the final models
/// and evaluates the global loss on the result.
RunMetrics run(const RunConfig& config);

struct CompareReport {
  double final_loss_regular = 0;
  double final_loss_event = 0;
  double max_loss_gap = 0;  // max over iterations of |loss_event - loss_regular|
  double message_pct = 0;
  double volume_pct = 0;
  RunMetrics regular;
  RunMetrics event;
};

/// Runs the regular and event-triggered arms from one eventgrad config
/// (shared seed, objective, mixing, gamma, iteration count) and reports
/// the message/volume percentages.
CompareReport compare(const RunConfig& event_config);

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const RunConfig& config);

}  // namespace eventgrad
