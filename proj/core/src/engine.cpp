#include "eventgrad/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace eventgrad {

namespace {

MixingMatrix make_mixing(const RunConfig& config) {
  if (config.custom_mixing) {
    if (config.custom_mixing->rows() != config.n)
      throw std::invalid_argument("custom mixing matrix size does not match n");
    return MixingMatrix(*config.custom_mixing);
  }
  return build_ring_mixing(config.n);
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

}  // namespace

void validate(const RunConfig& config) {
  if (config.n < 1) throw std::invalid_argument("n must be >= 1");
  if (config.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (config.gamma < 0) throw std::invalid_argument("gamma must be >= 0");
  if (config.staleness < 0) throw std::invalid_argument("staleness must be >= 0");
  if (config.algorithm == Algorithm::regular) {
    if (config.trigger || config.topk_percent)
      throw std::invalid_argument("regular algorithm takes no trigger/sparsify config");
  }
  if (config.topk_percent && (*config.topk_percent <= 0 || *config.topk_percent > 100))
    throw std::invalid_argument("topk_percent must be in (0,100]");
  if (config.trigger) {
    const auto& t = *config.trigger;
    if (t.horizon <= 0) throw std::invalid_argument("trigger.horizon must be > 0");
    if (t.history_len < 1) throw std::invalid_argument("trigger.history_len must be >= 1");
    if (t.delta0 < 0) throw std::invalid_argument("trigger.delta0 must be >= 0");
    if (t.schedule.kind == ThresholdSchedule::Kind::geometric_cap &&
        (t.schedule.alpha <= 0 || t.schedule.beta <= 0 || t.schedule.beta >= 1))
      throw std::invalid_argument("geometric schedule needs alpha > 0 and beta in (0,1)");
    if (t.schedule.kind == ThresholdSchedule::Kind::constant_cap && t.schedule.c < 0)
      throw std::invalid_argument("constant cap must be >= 0");
  }
}

Simulation::Simulation(const RunConfig& config)
    : config_(config),
      objectives_(config.objective, config.n, config.seed),
      mixing_(make_mixing(config)) {
  validate(config_);

  states_.reserve(config_.n);
  for (int i = 0; i < config_.n; ++i) {
    ModelState m = objectives_.zero_model();
    if (config_.init == InitKind::random) {
      auto rng = seeded_rng(config_.seed, 0x1217u, static_cast<std::uint64_t>(i));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (auto& b : m.blocks)
        for (Eigen::Index j = 0; j < b.size(); ++j)
          b.values(j) = config_.init_scale * gauss(rng);
    }
    states_.push_back(std::move(m));
  }

  rngs_.reserve(config_.n);
  for (int i = 0; i < config_.n; ++i)
    rngs_.push_back(seeded_rng(config_.seed, 0x5a3cu, static_cast<std::uint64_t>(i)));

  const int n_blocks = static_cast<int>(states_[0].blocks.size());
  stats_ = CommStats(config_.n, n_blocks);

  if (config_.algorithm == Algorithm::eventgrad) {
    const TriggerConfig trig_cfg = config_.trigger.value_or(TriggerConfig{});
    triggers_.resize(config_.n);
    windows_.reserve(config_.n);
    for (int i = 0; i < config_.n; ++i) {
      for (int b = 0; b < n_blocks; ++b)
        triggers_[i].emplace_back(states_[i].blocks[b].values, trig_cfg.delta0,
                                  trig_cfg.horizon, trig_cfg.history_len);
      windows_.emplace_back(i, mixing_.neighbors(i), states_);
    }
  }
}

ModelState Simulation::averaged_model() const {
  ModelState avg = states_[0];
  for (int i = 1; i < config_.n; ++i) avg.axpy(1.0, states_[i]);
  avg.scale(1.0 / config_.n);
  return avg;
}

double Simulation::disagreement() const {
  const ModelState avg = averaged_model();
  double total = 0;
  for (const auto& s : states_) {
    ModelState d = s;
    d.axpy(-1.0, avg);
    total += d.squared_norm();
  }
  return total / config_.n;
}

void Simulation::step() {
  if (config_.algorithm == Algorithm::regular)
    step_regular();
  else
    step_eventgrad();
  ++iter_;
}

void Simulation::step_regular() {
  const int n = config_.n;
  const int n_blocks = static_cast<int>(states_[0].blocks.size());

  // Every block of every PE goes to both neighbors; accounting only, the
  // averaging below reads exact values.
  for (int i = 0; i < n; ++i)
    for (size_t nb = 0; nb < mixing_.neighbors(i).size(); ++nb)
      for (int b = 0; b < n_blocks; ++b)
        stats_.record_sent(i, b, true,
                           static_cast<std::uint64_t>(states_[i].blocks[b].size()));

  rows_.push_back({iter_, objectives_.global_loss(averaged_model()), disagreement(),
                   stats_.messages, stats_.volume, 0});

  std::vector<ModelState> next(n);
  for (int i = 0; i < n; ++i) {
    const ModelState grad = objectives_.local(i).stochastic_gradient(states_[i], rngs_[i]);
    next[i] = objectives_.zero_model();
    for (int b = 0; b < n_blocks; ++b) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(states_[i].blocks[b].size());
      for (int j = 0; j < n; ++j) {
        const double w = mixing_.weight(i, j);
        if (w == 0.0) continue;
        acc += w * states_[j].blocks[b].values;
      }
      next[i].blocks[b].values = acc - config_.gamma * grad.blocks[b].values;
    }
  }
  states_ = std::move(next);
}

void Simulation::step_eventgrad() {
  const int n = config_.n;
  const int n_blocks = static_cast<int>(states_[0].blocks.size());
  const TriggerConfig trig_cfg = config_.trigger.value_or(TriggerConfig{});
  int events = 0;

  // Trigger phase: the k=0 broadcast is forced (windows already hold the
  // initial models, so it may be sparsified like any other event).
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < n_blocks; ++b) {
      TriggerState& trig = triggers_[i][b];
      const Eigen::VectorXd& current = states_[i].blocks[b].values;
      bool fire = false;
      const bool dense = !config_.topk_percent.has_value();
      if (iter_ == 0) {
        fire = true;
      } else if (trig.check_event(current)) {
        fire = true;
        trig.update_on_trigger(current, iter_, trig_cfg.schedule);
      } else {
        // epsilon-bound invariant: an untriggered block stays within its
        // threshold this iteration.
        if ((trig.last_sent_value() - current).norm() >= trig.threshold())
          ++epsilon_violations_;
      }
      if (!fire) continue;
      ++events;

      Message msg;
      msg.src = i;
      msg.block_id = b;
      msg.sent_iter = iter_;
      msg.dense = dense;
      if (dense)
        msg.dense_payload = current;
      else
        msg.sparse_payload = topk_sparsify(current, *config_.topk_percent);

      const int apply_iter = iter_ == 0 ? 0 : iter_ + config_.staleness;
      for (int dst : mixing_.neighbors(i)) {
        msg.dst = dst;
        pending_.push_back({apply_iter, msg});
      }
    }
  }

  apply_pending_puts();

  rows_.push_back({iter_, objectives_.global_loss(averaged_model()), disagreement(),
                   stats_.messages, stats_.volume, events});

  // Update phase: mix the last-communicated copies (own column included,
  // unless self_fresh) and descend along the stochastic gradient.
  std::vector<ModelState> next(n);
  for (int i = 0; i < n; ++i) {
    ModelState grad_arg = objectives_.zero_model();
    for (int b = 0; b < n_blocks; ++b)
      grad_arg.blocks[b].values =
          config_.self_fresh ? states_[i].blocks[b].values
                             : triggers_[i][b].last_sent_value();
    const ModelState grad = objectives_.local(i).stochastic_gradient(grad_arg, rngs_[i]);

    next[i] = objectives_.zero_model();
    for (int b = 0; b < n_blocks; ++b) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(states_[i].blocks[b].size());
      for (int j = 0; j < n; ++j) {
        const double w = mixing_.weight(i, j);
        if (w == 0.0) continue;
        const Eigen::VectorXd& v = (j == i) ? grad_arg.blocks[b].values
                                            : windows_[i].slot(j, b);
        acc += w * v;
      }
      next[i].blocks[b].values = acc - config_.gamma * grad.blocks[b].values;
    }
  }
  states_ = std::move(next);
}

void Simulation::apply_pending_puts() {
  // Commit in ascending (apply_iter, src, block, dst) order at the barrier.
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const PendingPut& a, const PendingPut& b) {
                     return std::tie(a.apply_iter, a.msg.src, a.msg.block_id, a.msg.dst) <
                            std::tie(b.apply_iter, b.msg.src, b.msg.block_id, b.msg.dst);
                   });
  size_t applied = 0;
  while (applied < pending_.size() && pending_[applied].apply_iter <= iter_) {
    one_sided_put(pending_[applied].msg, windows_, stats_);
    ++applied;
  }
  pending_.erase(pending_.begin(), pending_.begin() + applied);
}

RunMetrics run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Simulation sim(config);
  for (int k = 0; k < config.iterations; ++k) sim.step();

  RunMetrics metrics;
  metrics.rows = sim.rows();
  metrics.averaged_model = sim.averaged_model();
  metrics.final_loss = sim.objectives().global_loss(metrics.averaged_model);
  metrics.rho = sim.mixing().spectral_gap();
  metrics.stats = sim.stats();
  metrics.epsilon_violations = sim.epsilon_violations();
  metrics.iterations_per_epoch =
      static_cast<double>(sim.objectives().local(0).shard().size()) /
      sim.objectives().local(0).batch_size();
  metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return metrics;
}

CompareReport compare(const RunConfig& event_config) {
  if (event_config.algorithm != Algorithm::eventgrad)
    throw std::invalid_argument("compare expects an eventgrad config");
  RunConfig regular_config = event_config;
  regular_config.algorithm = Algorithm::regular;
  regular_config.trigger.reset();
  regular_config.topk_percent.reset();

  CompareReport report;
  report.regular = run(regular_config);
  report.event = run(event_config);
  report.final_loss_regular = report.regular.final_loss;
  report.final_loss_event = report.event.final_loss;
  for (size_t k = 0; k < report.regular.rows.size(); ++k)
    report.max_loss_gap = std::max(
        report.max_loss_gap,
        std::abs(report.event.rows[k].loss - report.regular.rows[k].loss));
  report.message_pct = message_percentage(report.event.stats, report.regular.stats);
  report.volume_pct = volume_percentage(report.event.stats, report.regular.stats);
  return report;
}

}  // namespace eventgrad
