#pragma once

#include <Eigen/Core>
#include <deque>

namespace eventgrad {

/// Summable schedule g(k) bounding the squared threshold. The cap applies
/// to the threshold itself, so delta <= sqrt(g(k)).
struct ThresholdSchedule {
  enum class Kind { none, constant_cap, geometric_cap };
  Kind kind = Kind::none;
  double alpha = 0.0;  // geometric: g(k) = alpha * beta^k
  double beta = 0.0;   // in (0,1) for a summable geometric schedule
  double c = 0.0;      // constant cap on the threshold

  /// Bound on the squared threshold at iteration k. `none` carries no cap
  /// and is treated as g == 0 in the schedule sums (the regular-rate case).
  double g(int k) const;

  /// Bound on the threshold itself: +inf (none), c (constant), sqrt(alpha beta^k).
  double cap(int k) const;
};

/// G(K) = sum_{k=0}^{K} g(k). For the geometric schedule the closed form
/// alpha (1 - beta^{K+1}) / (1 - beta) is cross-checked against the direct
/// sum to 1e-12.
double schedule_sum_G(const ThresholdSchedule& s, int K);

/// G_{1/2}(K) = sum_{k=0}^{K} sqrt(g(k)); geometric closed form uses ratio sqrt(beta).
double schedule_sum_Ghalf(const ThresholdSchedule& s, int K);

/// Per-(PE, block) event-trigger bookkeeping: last communicated copy, the
/// iteration it was sent, the current threshold and a ring buffer of the
/// most recent inter-event slopes.
class TriggerState {
 public:
  /// Seeded by the forced initial broadcast at k=0 with threshold delta0.
  TriggerState(Eigen::VectorXd initial_value, double delta0, double horizon,
               int history_len);

  /// True iff ||last_sent - current|| >= threshold. No mutation.
  bool check_event(const Eigen::VectorXd& current) const;

  /// Records a trigger at iteration k: pushes the slope
  /// ||last_sent - current|| / (k - last_sent_iter) into the history,
  /// sets threshold = mean(history) * horizon capped by the schedule,
  /// and replaces the last-sent copy.
  void update_on_trigger(const Eigen::VectorXd& current, int k,
                         const ThresholdSchedule& schedule);

  const Eigen::VectorXd& last_sent_value() const { return last_sent_; }
  int last_sent_iter() const { return last_sent_iter_; }
  double threshold() const { return threshold_; }
  const std::deque<double>& slope_history() const { return slopes_; }

 private:
  Eigen::VectorXd last_sent_;
  int last_sent_iter_ = 0;
  double threshold_;
  double horizon_;
  int history_len_;
  std::deque<double> slopes_;
};

}  // namespace eventgrad
