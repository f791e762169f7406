// End-to-end acceptance checks. Each criterion prints one [PASS]/[FAIL]
// line; the binary exits nonzero if any criterion fails.

#include <unistd.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eventgrad/analysis.hpp"
#include "eventgrad/cli.hpp"
#include "eventgrad/engine.hpp"
#include "eventgrad/mixing.hpp"

using namespace eventgrad;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int number;
  std::string description;
  std::function<bool(std::string&)> check;  // detail message on failure
};

ObjectiveConfig default_least_squares() {
  ObjectiveConfig obj;
  obj.kind = "least_squares";
  obj.dim = 16;
  obj.samples_per_pe = 64;
  obj.batch_size = 8;
  obj.noise = 0.1;
  return obj;
}

TriggerConfig zero_threshold() {
  TriggerConfig t;
  t.delta0 = 0.0;
  t.schedule.kind = ThresholdSchedule::Kind::constant_cap;
  t.schedule.c = 0.0;
  return t;
}

double max_coordinate_gap(const std::vector<ModelState>& a,
                          const std::vector<ModelState>& b) {
  double gap = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t blk = 0; blk < a[i].blocks.size(); ++blk)
      gap = std::max(gap, (a[i].blocks[blk].values - b[i].blocks[blk].values)
                              .lpNorm<Eigen::Infinity>());
  return gap;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

bool criterion1_zero_threshold_equivalence(std::string& detail) {
  for (int n : {4, 8}) {
    RunConfig event_cfg;
    event_cfg.n = n;
    event_cfg.algorithm = Algorithm::eventgrad;
    event_cfg.gamma = 2e-3;
    event_cfg.iterations = 100;
    event_cfg.seed = 42;
    event_cfg.objective = default_least_squares();
    event_cfg.trigger = zero_threshold();
    event_cfg.init = InitKind::random;

    RunConfig regular_cfg = event_cfg;
    regular_cfg.algorithm = Algorithm::regular;
    regular_cfg.trigger.reset();

    Simulation event_sim(event_cfg), regular_sim(regular_cfg);
    for (int k = 0; k < event_cfg.iterations; ++k) {
      event_sim.step();
      regular_sim.step();
      const double gap = max_coordinate_gap(event_sim.states(), regular_sim.states());
      if (gap > 1e-12) {
        detail = "n=" + std::to_string(n) + " iter=" + std::to_string(k) +
                 " coordinate gap " + std::to_string(gap);
        return false;
      }
    }
    if (event_sim.stats().messages != regular_sim.stats().messages) {
      detail = "message counts diverge at n=" + std::to_string(n);
      return false;
    }
  }
  return true;
}

bool criterion2_mixing_envelope(std::string& detail) {
  for (int n : {4, 8, 16}) {
    const MixingMatrix w = build_ring_mixing(n);
    const double rho = w.spectral_gap();
    double envelope = 1.0;
    for (int k = 0; k <= 50; ++k) {
      for (int i = 0; i < n; ++i) {
        const double dev = mix_power_deviation(w, k, i);
        if (dev > envelope + 1e-12) {
          detail = "n=" + std::to_string(n) + " k=" + std::to_string(k) +
                   " deviation " + std::to_string(dev) + " > rho^k " +
                   std::to_string(envelope);
          return false;
        }
      }
      envelope *= rho;
    }
  }
  return true;
}

bool criterion3_epsilon_bound(std::string& detail) {
  RunConfig cfg;
  cfg.n = 8;
  cfg.algorithm = Algorithm::eventgrad;
  cfg.iterations = 2000;
  cfg.seed = 42;
  cfg.objective = default_least_squares();
  cfg.trigger = TriggerConfig{};  // horizon 1, history 1, delta0 0, no cap
  const ObjectiveSet probe(cfg.objective, cfg.n, cfg.seed);
  const EstimatedConstants est = estimate_constants(probe, 3, cfg.seed);
  cfg.gamma = 0.1 / est.L;

  const RunMetrics m = run(cfg);
  if (m.epsilon_violations != 0) {
    detail = std::to_string(m.epsilon_violations) + " threshold violations";
    return false;
  }
  if (m.stats.messages == 0) {
    detail = "run sent no messages at all";
    return false;
  }
  return true;
}

bool criterion4_convergence_parity(std::string& detail) {
  RunConfig cfg;
  cfg.n = 8;
  cfg.algorithm = Algorithm::eventgrad;
  cfg.iterations = 2000;
  cfg.seed = 42;
  cfg.objective = default_least_squares();
  cfg.trigger = TriggerConfig{};
  const ObjectiveSet probe(cfg.objective, cfg.n, cfg.seed);
  const EstimatedConstants est = estimate_constants(probe, 3, cfg.seed);
  cfg.gamma = 0.1 / est.L;

  const CompareReport report = compare(cfg);
  const double rel = std::abs(report.final_loss_event - report.final_loss_regular) /
                     std::abs(report.final_loss_regular);
  std::ostringstream note;
  note << "final losses regular=" << report.final_loss_regular
       << " event=" << report.final_loss_event << " rel=" << rel
       << " messages=" << report.message_pct << "%";
  if (rel >= 0.05) {
    detail = "loss gap too large: " + note.str();
    return false;
  }
  if (report.message_pct >= 100.0) {
    detail = "no message savings: " + note.str();
    return false;
  }
  return true;
}

bool criterion5_topk_volume(std::string& detail) {
  RunConfig cfg;
  cfg.n = 6;
  cfg.algorithm = Algorithm::eventgrad;
  cfg.gamma = 0.01;
  cfg.iterations = 120;
  cfg.seed = 3;
  cfg.objective.kind = "mlp";
  cfg.objective.features = 6;
  cfg.objective.classes = 3;
  cfg.objective.hidden = 5;
  cfg.objective.samples_per_pe = 24;
  cfg.objective.batch_size = 6;
  cfg.trigger = TriggerConfig{};
  cfg.trigger->delta0 = 1e-3;
  cfg.topk_percent = 40.0;

  const RunMetrics m = run(cfg);
  // block lengths for this mlp: 30, 5, 15, 3
  const std::vector<std::uint64_t> lens = {30, 5, 15, 3};
  std::uint64_t expected = 0;
  for (size_t b = 0; b < lens.size(); ++b) {
    if (m.stats.per_block_dense_messages[b] != 0) {
      detail = "unexpected dense message in a sparsified run (block " +
               std::to_string(b) + ")";
      return false;
    }
    const auto kept = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(lens[b]) * 40.0 / 100.0));
    expected += m.stats.per_block_sparse_messages[b] * 2 * kept;
  }
  if (expected != m.stats.volume) {
    detail = "volume " + std::to_string(m.stats.volume) + " != recomputed " +
             std::to_string(expected);
    return false;
  }

  // keeping 100% must reproduce the dense run exactly (double the volume)
  RunConfig full = cfg;
  full.topk_percent = 100.0;
  RunConfig dense = cfg;
  dense.topk_percent.reset();
  const RunMetrics mf = run(full), md = run(dense);
  for (size_t k = 0; k < mf.rows.size(); ++k)
    if (std::abs(mf.rows[k].loss - md.rows[k].loss) > 1e-12) {
      detail = "k=100% diverges from dense at iter " + std::to_string(k);
      return false;
    }
  ModelState diff = mf.averaged_model;
  diff.axpy(-1.0, md.averaged_model);
  if (std::sqrt(diff.squared_norm()) > 1e-12) {
    detail = "k=100% final model differs from dense";
    return false;
  }
  if (mf.stats.volume != 2 * md.stats.volume) {
    detail = "k=100% volume is not exactly twice the dense volume";
    return false;
  }
  return true;
}

bool criterion6_schedule_caps(std::string& detail) {
  // partial sums against direct summation on random schedules
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ThresholdSchedule s;
    s.kind = ThresholdSchedule::Kind::geometric_cap;
    s.alpha = 0.01 + 10.0 * unif(rng);
    s.beta = 0.05 + 0.9 * unif(rng);
    const int K = static_cast<int>(1 + 300 * unif(rng));
    double direct = 0, direct_half = 0;
    for (int k = 0; k <= K; ++k) {
      direct += s.alpha * std::pow(s.beta, k);
      direct_half += std::sqrt(s.alpha * std::pow(s.beta, k));
    }
    const double G = schedule_sum_G(s, K), Gh = schedule_sum_Ghalf(s, K);
    if (std::abs(G - direct) > 1e-12 * std::max(1.0, direct) ||
        std::abs(Gh - direct_half) > 1e-12 * std::max(1.0, direct_half)) {
      detail = "schedule sum mismatch at trial " + std::to_string(trial);
      return false;
    }
  }

  // a capped run keeps every live threshold inside g(k) at its trigger time
  RunConfig cfg;
  cfg.n = 6;
  cfg.algorithm = Algorithm::eventgrad;
  cfg.gamma = 5e-3;
  cfg.iterations = 300;
  cfg.seed = 9;
  cfg.objective = default_least_squares();
  cfg.trigger = TriggerConfig{};
  cfg.trigger->horizon = 4.0;  // aggressive enough to hit the cap
  cfg.trigger->schedule.kind = ThresholdSchedule::Kind::geometric_cap;
  cfg.trigger->schedule.alpha = 1e-4;
  cfg.trigger->schedule.beta = 0.99;

  Simulation sim(cfg);
  for (int k = 0; k < cfg.iterations; ++k) {
    sim.step();
    for (const auto& pe : sim.triggers())
      for (const auto& trig : pe) {
        if (trig.last_sent_iter() == 0) continue;  // still at delta0
        const double cap_sq =
            cfg.trigger->schedule.alpha *
            std::pow(cfg.trigger->schedule.beta, trig.last_sent_iter());
        if (trig.threshold() * trig.threshold() > cap_sq * (1.0 + 1e-12)) {
          detail = "threshold escaped the schedule cap at iter " + std::to_string(k);
          return false;
        }
      }
  }
  return true;
}

bool criterion7_gradient_oracle(std::string& detail) {
  std::mt19937_64 rng(5150);
  std::normal_distribution<double> gauss;
  for (const char* kind : {"least_squares", "logistic", "mlp"}) {
    ObjectiveConfig obj;
    obj.kind = kind;
    obj.dim = 5;
    obj.features = 5;
    obj.classes = 3;
    obj.hidden = 4;
    obj.samples_per_pe = 10;
    obj.batch_size = 10;
    const ObjectiveSet set(obj, 2, 77);
    for (int trial = 0; trial < 3; ++trial) {
      ModelState x = set.zero_model();
      for (auto& b : x.blocks)
        for (Eigen::Index j = 0; j < b.size(); ++j) b.values(j) = 0.4 * gauss(rng);

      const ModelState analytic = set.local(0).full_gradient(x);
      ModelState numeric = set.zero_model();
      ModelState probe = x;
      const double h = 1e-6;
      for (size_t b = 0; b < x.blocks.size(); ++b)
        for (Eigen::Index j = 0; j < x.blocks[b].size(); ++j) {
          const double saved = probe.blocks[b].values(j);
          probe.blocks[b].values(j) = saved + h;
          const double up = set.local(0).local_loss(probe);
          probe.blocks[b].values(j) = saved - h;
          const double down = set.local(0).local_loss(probe);
          probe.blocks[b].values(j) = saved;
          numeric.blocks[b].values(j) = (up - down) / (2.0 * h);
        }
      ModelState diff = analytic;
      diff.axpy(-1.0, numeric);
      const double rel = std::sqrt(diff.squared_norm()) /
                         std::max(1.0, std::sqrt(analytic.squared_norm()));
      if (rel > 1e-5) {
        detail = std::string(kind) + " gradient off by " + std::to_string(rel);
        return false;
      }
    }
  }
  return true;
}

bool criterion8_consensus_contraction(std::string& detail) {
  RunConfig cfg;
  cfg.n = 8;
  cfg.algorithm = Algorithm::regular;
  cfg.gamma = 0.0;
  cfg.iterations = 31;
  cfg.seed = 17;
  cfg.objective = default_least_squares();
  cfg.init = InitKind::random;
  cfg.init_scale = 3.0;

  const RunMetrics m = run(cfg);
  const double d0 = m.rows[0].disagreement;
  double envelope = 1.0;
  for (int k = 0; k <= 30; ++k) {
    if (m.rows[k].disagreement > envelope * d0 + 1e-10) {
      detail = "k=" + std::to_string(k) + " disagreement " +
               std::to_string(m.rows[k].disagreement) + " > rho^{2k} D0";
      return false;
    }
    envelope *= m.rho * m.rho;
  }
  return true;
}

bool criterion9_reproducibility(std::string& detail) {
  const fs::path dir =
      fs::temp_directory_path() / ("eventgrad_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  const std::string run_cfg = R"({
    "n": 6, "seed": 21, "algorithm": "eventgrad", "gamma": 0.002, "iterations": 60,
    "objective": {"kind": "least_squares", "dim": 8, "samples_per_pe": 16, "batch_size": 4},
    "trigger": {"horizon": 1.0, "history_len": 2, "delta0": 0.01},
    "init": {"kind": "random", "scale": 1.0}
  })";
  const std::string sweep_cfg = R"({
    "n": 4, "seed": 5, "algorithm": "eventgrad", "gamma": 0.001, "iterations": 30,
    "objective": {"kind": "least_squares", "dim": 6, "samples_per_pe": 12, "batch_size": 3},
    "sweep": {"horizon": [0.5, 1.0, 2.0], "gamma": [0.0005, 0.001]}
  })";
  std::ofstream(dir / "run.json") << run_cfg;
  std::ofstream(dir / "sweep.json") << sweep_cfg;

  std::ostringstream sink;
  bool ok = true;
  ok &= cli::cmd_run((dir / "run.json").string(), (dir / "a").string(), std::nullopt, sink,
                     sink) == cli::kExitOk;
  ok &= cli::cmd_run((dir / "run.json").string(), (dir / "b").string(), std::nullopt, sink,
                     sink) == cli::kExitOk;
  if (!ok) {
    detail = "cmd_run failed";
    fs::remove_all(dir);
    return false;
  }
  if (slurp(dir / "a" / "metrics.csv") != slurp(dir / "b" / "metrics.csv") ||
      slurp(dir / "a" / "metrics.csv").empty()) {
    detail = "repeated runs produced different metrics.csv bytes";
    fs::remove_all(dir);
    return false;
  }

  ::setenv("EVENTGRAD_THREADS", "4", 1);
  ok &= cli::cmd_sweep((dir / "sweep.json").string(), (dir / "s4").string(), std::nullopt,
                       sink, sink) == cli::kExitOk;
  ::setenv("EVENTGRAD_THREADS", "1", 1);
  ok &= cli::cmd_sweep((dir / "sweep.json").string(), (dir / "s1").string(), std::nullopt,
                       sink, sink) == cli::kExitOk;
  ::unsetenv("EVENTGRAD_THREADS");
  if (!ok) {
    detail = "cmd_sweep failed";
    fs::remove_all(dir);
    return false;
  }
  bool same = slurp(dir / "s4" / "sweep.csv") == slurp(dir / "s1" / "sweep.csv");
  for (int p = 0; p < 6 && same; ++p)
    same = slurp(dir / "s4" / "points" / std::to_string(p) / "metrics.csv") ==
           slurp(dir / "s1" / "points" / std::to_string(p) / "metrics.csv");
  fs::remove_all(dir);
  if (!same) {
    detail = "4-thread and 1-thread sweeps disagree";
    return false;
  }
  return true;
}

bool criterion10_bound_double_entry(std::string& detail) {
  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    BoundInputs in;
    in.L = 0.5 + 4.0 * unif(rng);
    in.rho = 0.05 + 0.9 * unif(rng);
    in.n = 2 + static_cast<int>(30 * unif(rng));
    in.K = 10 + static_cast<int>(5000 * unif(rng));
    in.sigma = 2.0 * unif(rng);
    in.varsigma = 2.0 * unif(rng);
    in.f0_minus_fstar = 10.0 * unif(rng);
    in.gamma = 0.5 * unif(rng) * (1.0 - std::sqrt(in.rho)) /
               (6.0 * std::sqrt(static_cast<double>(in.n)) * in.L);
    const double pick = unif(rng);
    if (pick < 0.4) {
      in.schedule.kind = ThresholdSchedule::Kind::geometric_cap;
      in.schedule.alpha = 0.01 + unif(rng);
      in.schedule.beta = 0.1 + 0.85 * unif(rng);
    } else if (pick < 0.7) {
      in.schedule.kind = ThresholdSchedule::Kind::constant_cap;
      in.schedule.c = 0.1 * unif(rng);
    }

    const double a = theorem1_rhs(in), b = theorem1_rhs_alt(in);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
      detail = "theorem transcriptions disagree at trial " + std::to_string(trial);
      return false;
    }
    const double ca = corollary1_rhs(in).rhs, cb = corollary1_rhs_alt(in);
    if (std::abs(ca - cb) > 1e-12 * std::max(1.0, std::abs(ca))) {
      detail = "corollary transcriptions disagree at trial " + std::to_string(trial);
      return false;
    }
  }

  // hand-simplified degenerate case: no thresholds, no noise
  BoundInputs in;
  in.gamma = 1e-3;
  in.L = 2.0;
  in.rho = 1.0 / 3.0;
  in.n = 8;
  in.K = 500;
  in.f0_minus_fstar = 3.0;
  const double expected = in.f0_minus_fstar / in.K;
  if (std::abs(theorem1_rhs(in) - expected) > 1e-12 * expected) {
    detail = "noise-free reduction does not collapse to (f0 - f*)/K";
    return false;
  }
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "zero-threshold event run matches the regular run per coordinate (1e-12)",
       criterion1_zero_threshold_equivalence},
      {2, "ring mixing powers stay inside the rho^k deviation envelope (n=4,8,16; k<=50)",
       criterion2_mixing_envelope},
      {3, "adaptive-threshold run of 2000 iterations records zero threshold violations",
       criterion3_epsilon_bound},
      {4, "event-triggered run converges within 5% of the baseline with fewer messages",
       criterion4_convergence_parity},
      {5, "top-k volume accounting is exact and k=100% reproduces dense payloads",
       criterion5_topk_volume},
      {6, "schedule sums match direct summation (1e-12) and capped thresholds obey g(k)",
       criterion6_schedule_caps},
      {7, "analytic gradients match central finite differences (rel 1e-5, all objectives)",
       criterion7_gradient_oracle},
      {8, "gossip-only disagreement decays within the rho^{2k} envelope (k<=30)",
       criterion8_consensus_contraction},
      {9, "run and threaded sweep outputs are byte-identical across repeats",
       criterion9_reproducibility},
      {10, "both transcriptions of the convergence bounds agree to 1e-12",
       criterion10_bound_double_entry},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.number << ": "
              << c.description;
    if (!ok && !detail.empty()) std::cout << " -- " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
  }
  if (failures != 0)
    std::cout << failures << " of " << criteria.size() << " criteria failed\n";
  return failures == 0 ? 0 : 1;
}
