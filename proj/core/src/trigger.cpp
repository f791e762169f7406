#include "eventgrad/trigger.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace eventgrad {

double ThresholdSchedule::g(int k) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::constant_cap: return c * c;
    case Kind::geometric_cap: return alpha * std::pow(beta, k);
  }
  return 0.0;
}

double ThresholdSchedule::cap(int k) const {
  switch (kind) {
    case Kind::none: return std::numeric_limits<double>::infinity();
    case Kind::constant_cap: return c;
    case Kind::geometric_cap: return std::sqrt(alpha * std::pow(beta, k));
  }
  return std::numeric_limits<double>::infinity();
}

namespace {

double direct_sum(const ThresholdSchedule& s, int K, bool sqrt_terms) {
  double total = 0.0;
  for (int k = 0; k <= K; ++k)
    total += sqrt_terms ? std::sqrt(s.g(k)) : s.g(k);
  return total;
}

// Geometric partial sum a (1 - r^{K+1}) / (1 - r).
double geometric_closed_form(double a, double r, int K) {
  if (r == 1.0) return a * (K + 1);
  return a * (1.0 - std::pow(r, K + 1)) / (1.0 - r);
}

double checked_sum(const ThresholdSchedule& s, int K, bool sqrt_terms) {
  if (K < 0) throw std::invalid_argument("K must be >= 0");
  const double direct = direct_sum(s, K, sqrt_terms);
  if (s.kind == ThresholdSchedule::Kind::geometric_cap) {
    const double a = sqrt_terms ? std::sqrt(s.alpha) : s.alpha;
    const double r = sqrt_terms ? std::sqrt(s.beta) : s.beta;
    const double closed = geometric_closed_form(a, r, K);
    if (std::abs(closed - direct) > 1e-12 * std::max(1.0, std::abs(direct)))
      throw std::logic_error("geometric schedule sum: closed form disagrees with direct sum");
  }
  return direct;
}

}  // namespace

double schedule_sum_G(const ThresholdSchedule& s, int K) {
  return checked_sum(s, K, /*sqrt_terms=*/false);
}

double schedule_sum_Ghalf(const ThresholdSchedule& s, int K) {
  return checked_sum(s, K, /*sqrt_terms=*/true);
}

TriggerState::TriggerState(Eigen::VectorXd initial_value, double delta0,
                           double horizon, int history_len)
    : last_sent_(std::move(initial_value)),
      threshold_(delta0),
      horizon_(horizon),
      history_len_(history_len) {
  if (delta0 < 0) throw std::invalid_argument("delta0 must be >= 0");
  if (horizon <= 0) throw std::invalid_argument("horizon must be > 0");
  if (history_len < 1) throw std::invalid_argument("history_len must be >= 1");
}

bool TriggerState::check_event(const Eigen::VectorXd& current) const {
  if (current.size() != last_sent_.size())
    throw std::invalid_argument("check_event: dimension mismatch");
  return (last_sent_ - current).norm() >= threshold_;
}

void TriggerState::update_on_trigger(const Eigen::VectorXd& current, int k,
                                     const ThresholdSchedule& schedule) {
  if (current.size() != last_sent_.size())
    throw std::invalid_argument("update_on_trigger: dimension mismatch");
  if (k <= last_sent_iter_)
    throw std::invalid_argument("update_on_trigger: k must exceed last-sent iteration");

  const double slope = (last_sent_ - current).norm() / (k - last_sent_iter_);
  slopes_.push_back(slope);
  while (static_cast<int>(slopes_.size()) > history_len_) slopes_.pop_front();

  const double mean_slope =
      std::accumulate(slopes_.begin(), slopes_.end(), 0.0) / slopes_.size();
  threshold_ = std::min(mean_slope * horizon_, schedule.cap(k));

  last_sent_ = current;
  last_sent_iter_ = k;
}

}  // namespace eventgrad
