#include "eventgrad/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "eventgrad/config.hpp"
#include "eventgrad/metrics.hpp"

namespace eventgrad::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
}

void write_meta(const fs::path& dir, const RunConfig& config, const RunMetrics& metrics) {
  json meta;
  meta["config"] = json::parse(run_config_to_json(config));
  meta["rho"] = metrics.rho;
  meta["seed"] = config.seed;
  meta["iterations_per_epoch"] = metrics.iterations_per_epoch;
  meta["final_loss"] = metrics.final_loss;
  meta["epsilon_violations"] = metrics.epsilon_violations;
  meta["messages_total"] = metrics.stats.messages;
  meta["volume_total"] = metrics.stats.volume;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

void write_arm(const fs::path& dir, const RunConfig& config, const RunMetrics& metrics) {
  fs::create_directories(dir);
  write_metrics_csv((dir / "metrics.csv").string(), metrics);
  write_meta(dir, config, metrics);
}

int sweep_thread_cap() {
  if (const char* env = std::getenv("EVENTGRAD_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct SweepPoint {
  double horizon, topk, gamma;
  int n;
  bool has_horizon, has_topk;
  RunConfig config;
};

std::vector<SweepPoint> enumerate_grid(const SweepConfig& sweep) {
  const auto& g = sweep.grid;
  const bool ev = sweep.base.algorithm == Algorithm::eventgrad;
  const TriggerConfig base_trigger = sweep.base.trigger.value_or(TriggerConfig{});

  auto one = [](auto list, auto fallback) {
    using T = typename decltype(list)::value_type;
    return list.empty() ? std::vector<T>{fallback} : list;
  };
  const auto horizons = one(g.horizon, base_trigger.horizon);
  const auto topks = one(g.topk_percent, sweep.base.topk_percent.value_or(0.0));
  const auto ns = one(g.n, sweep.base.n);
  const auto gammas = one(g.gamma, sweep.base.gamma);

  // Fixed nesting order keeps the output CSV deterministic.
  std::vector<SweepPoint> points;
  for (double h : horizons)
    for (double k : topks)
      for (int n : ns)
        for (double gamma : gammas) {
          SweepPoint p;
          p.horizon = h;
          p.topk = k;
          p.n = n;
          p.gamma = gamma;
          p.has_horizon = ev;
          p.has_topk = ev && k > 0.0;
          p.config = sweep.base;
          p.config.n = n;
          p.config.gamma = gamma;
          if (ev) {
            TriggerConfig t = base_trigger;
            t.horizon = h;
            p.config.trigger = t;
            if (p.has_topk) p.config.topk_percent = k;
          }
          validate(p.config);
          points.push_back(std::move(p));
        }
  return points;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override, std::ostream& out,
            std::ostream& err) {
  RunConfig config;
  try {
    config = load_run_config(config_path);
    if (seed_override) config.seed = *seed_override;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  }
  try {
    const RunMetrics metrics = run(config);
    write_arm(out_dir, config, metrics);
    out << "wrote " << (fs::path(out_dir) / "metrics.csv").string() << " ("
        << metrics.rows.size() << " rows)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_compare(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed_override, std::ostream& out,
                std::ostream& err) {
  RunConfig config;
  try {
    config = load_run_config(config_path);
    if (seed_override) config.seed = *seed_override;
    if (config.algorithm != Algorithm::eventgrad)
      throw ConfigError(config_path + ": at 'algorithm': compare needs an eventgrad config");
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  }
  try {
    const CompareReport report = compare(config);
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    RunConfig regular_config = config;
    regular_config.algorithm = Algorithm::regular;
    regular_config.trigger.reset();
    regular_config.topk_percent.reset();
    write_arm(dir / "regular", regular_config, report.regular);
    write_arm(dir / "event", config, report.event);

    json rep;
    rep["final_loss_regular"] = report.final_loss_regular;
    rep["final_loss_event"] = report.final_loss_event;
    rep["max_loss_gap"] = report.max_loss_gap;
    rep["message_pct"] = report.message_pct;
    rep["volume_pct"] = report.volume_pct;
    write_text(dir / "report.json", rep.dump(2) + "\n");
    out << rep.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override, std::ostream& out,
              std::ostream& err) {
  SweepConfig sweep;
  std::vector<SweepPoint> points;
  try {
    sweep = load_sweep_config(config_path);
    if (seed_override) sweep.base.seed = *seed_override;
    points = enumerate_grid(sweep);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::invalid_argument& e) {
    err << "error: " << config_path << ": " << e.what() << "\n";
    return kExitBadConfig;
  }

  try {
    const fs::path dir(out_dir);
    fs::create_directories(dir / "points");

    struct PointResult {
      double final_loss = 0;
      double message_pct = 100.0;
      std::uint64_t messages = 0;
    };
    std::vector<PointResult> results(points.size());

    // Grid points run concurrently with isolated output directories;
    // sweep.csv is assembled afterwards in grid order.
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const size_t idx = next.fetch_add(1);
        if (idx >= points.size()) return;
        const SweepPoint& p = points[idx];
        const fs::path point_dir = dir / "points" / std::to_string(idx);
        PointResult r;
        if (p.config.algorithm == Algorithm::eventgrad) {
          const CompareReport report = compare(p.config);
          write_arm(point_dir, p.config, report.event);
          r.final_loss = report.final_loss_event;
          r.message_pct = report.message_pct;
          r.messages = report.event.stats.messages;
        } else {
          const RunMetrics metrics = run(p.config);
          write_arm(point_dir, p.config, metrics);
          r.final_loss = metrics.final_loss;
          r.messages = metrics.stats.messages;
        }
        results[idx] = r;
      }
    };

    const int n_threads =
        std::min<int>(sweep_thread_cap(), static_cast<int>(points.size()));
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::ofstream csv(dir / "sweep.csv", std::ios::binary);
    csv << "point,horizon,topk_percent,n,gamma,final_loss,message_pct,messages_cum\n";
    for (size_t idx = 0; idx < points.size(); ++idx) {
      const SweepPoint& p = points[idx];
      const PointResult& r = results[idx];
      csv << idx << ',' << (p.has_horizon ? format_double(p.horizon) : "")
          << ',' << (p.has_topk ? format_double(p.topk) : "") << ',' << p.n << ','
          << format_double(p.gamma) << ',' << format_double(r.final_loss) << ','
          << format_double(r.message_pct) << ',' << r.messages << '\n';
    }
    out << "wrote " << (dir / "sweep.csv").string() << " (" << points.size()
        << " points)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_bound(const std::string& config_path, std::ostream& out, std::ostream& err) {
  BoundConfig config;
  try {
    config = load_bound_config(config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadConfig;
  }

  try {
    BoundInputs in;
    in.K = config.iterations;
    in.n = config.n;
    in.schedule = config.schedule;

    json constants;
    if (config.estimate_objective) {
      const ObjectiveSet objectives(*config.estimate_objective, config.n, config.seed);
      const EstimatedConstants est =
          estimate_constants(objectives, config.estimate_samples, config.seed);
      in.L = est.L;
      in.sigma = est.sigma;
      in.varsigma = est.varsigma;
      const double fstar = config.fstar_override.value_or(est.fstar);
      in.f0_minus_fstar = est.f0 - fstar;
      constants["estimated"] = true;
      constants["L_exact"] = est.L_exact;
      constants["fstar_exact"] = est.fstar_exact && !config.fstar_override;
    } else {
      constants["estimated"] = false;
    }
    if (config.L) in.L = *config.L;
    if (config.sigma) in.sigma = *config.sigma;
    if (config.varsigma) in.varsigma = *config.varsigma;
    if (config.f0_minus_fstar) in.f0_minus_fstar = *config.f0_minus_fstar;
    in.rho = config.rho ? *config.rho
                        : (config.n >= 3 ? build_ring_mixing(config.n).spectral_gap() : 0.0);

    const CorollaryReport corollary = [&] {
      BoundInputs c = in;
      c.gamma = 0;  // gamma_rule is derived inside
      return corollary1_rhs(c);
    }();
    in.gamma = config.gamma.value_or(corollary.gamma_rule);

    json report;
    report["constants"] = {{"gamma", in.gamma},
                           {"L", in.L},
                           {"sigma", in.sigma},
                           {"varsigma", in.varsigma},
                           {"rho", in.rho},
                           {"n", in.n},
                           {"K", in.K},
                           {"f0_minus_fstar", in.f0_minus_fstar}};
    for (auto& [k, v] : constants.items()) report["constants"][k] = v;
    report["schedule_G"] = schedule_sum_G(in.schedule, in.K - 1);
    report["schedule_Ghalf"] = schedule_sum_Ghalf(in.schedule, in.K - 1);

    const double c2 = in.c2();
    report["conditions"]["C2_positive"] = c2 > 0;
    report["conditions"]["K_noise_mix"] = corollary.conditions.k_noise_mix;
    report["conditions"]["K_spectral"] = corollary.conditions.k_spectral;
    report["conditions"]["K_stepsize"] = corollary.conditions.k_stepsize;
    // C2 <= 0 is reported as inapplicable, not a failure
    report["rhs_theorem1"] = c2 > 0 ? json(theorem1_rhs(in)) : json(nullptr);
    report["rhs_corollary1"] = corollary.rhs;
    report["gamma_rule"] = corollary.gamma_rule;

    out << report.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace eventgrad::cli
