#include "eventgrad/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace eventgrad {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& what) {
  throw ConfigError(origin + ": at '" + where + "': " + what);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& origin, const std::string& where) {
  if (!obj.is_object()) fail(origin, where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(origin, where, "unknown key '" + it.key() + "'");
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& origin,
          const std::string& where) {
  if (!obj.contains(key)) fail(origin, where, "missing required field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(origin, where + "." + key, "wrong type");
  }
}

template <typename T>
T optional_or(const json& obj, const std::string& key, T fallback,
              const std::string& origin, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(origin, where + "." + key, "wrong type");
  }
}

ObjectiveConfig parse_objective(const json& obj, const std::string& origin) {
  ObjectiveConfig cfg;
  cfg.kind = require<std::string>(obj, "kind", origin, "objective");

  std::set<std::string> allowed = {"kind", "samples_per_pe", "batch_size", "csv_path"};
  if (cfg.kind == "least_squares") {
    allowed.insert({"dim", "noise", "hetero_shift"});
  } else if (cfg.kind == "logistic") {
    allowed.insert({"features", "classes", "cluster_spread", "hetero_shift"});
  } else if (cfg.kind == "mlp") {
    allowed.insert({"features", "classes", "hidden", "cluster_spread", "hetero_shift"});
  } else {
    fail(origin, "objective.kind", "unknown objective kind '" + cfg.kind + "'");
  }
  check_keys(obj, allowed, origin, "objective");

  cfg.samples_per_pe = optional_or(obj, "samples_per_pe", cfg.samples_per_pe, origin, "objective");
  cfg.batch_size = optional_or(obj, "batch_size", cfg.batch_size, origin, "objective");
  cfg.csv_path = optional_or(obj, "csv_path", cfg.csv_path, origin, "objective");
  cfg.dim = optional_or(obj, "dim", cfg.dim, origin, "objective");
  cfg.features = optional_or(obj, "features", cfg.features, origin, "objective");
  cfg.classes = optional_or(obj, "classes", cfg.classes, origin, "objective");
  cfg.hidden = optional_or(obj, "hidden", cfg.hidden, origin, "objective");
  cfg.noise = optional_or(obj, "noise", cfg.noise, origin, "objective");
  cfg.cluster_spread = optional_or(obj, "cluster_spread", cfg.cluster_spread, origin, "objective");
  cfg.hetero_shift = optional_or(obj, "hetero_shift", cfg.hetero_shift, origin, "objective");

  if (cfg.samples_per_pe < 1) fail(origin, "objective.samples_per_pe", "must be >= 1");
  if (cfg.batch_size < 1) fail(origin, "objective.batch_size", "must be >= 1");
  return cfg;
}

ThresholdSchedule parse_schedule(const json& obj, const std::string& origin,
                                 const std::string& where) {
  check_keys(obj, {"kind", "alpha", "beta", "c"}, origin, where);
  ThresholdSchedule s;
  const auto kind = require<std::string>(obj, "kind", origin, where);
  if (kind == "none")
    s.kind = ThresholdSchedule::Kind::none;
  else if (kind == "constant_cap")
    s.kind = ThresholdSchedule::Kind::constant_cap;
  else if (kind == "geometric_cap")
    s.kind = ThresholdSchedule::Kind::geometric_cap;
  else
    fail(origin, where + ".kind", "unknown schedule kind '" + kind + "'");
  s.alpha = optional_or(obj, "alpha", 0.0, origin, where);
  s.beta = optional_or(obj, "beta", 0.0, origin, where);
  s.c = optional_or(obj, "c", 0.0, origin, where);
  return s;
}

TriggerConfig parse_trigger(const json& obj, const std::string& origin) {
  check_keys(obj, {"horizon", "history_len", "delta0", "schedule"}, origin, "trigger");
  TriggerConfig t;
  t.horizon = optional_or(obj, "horizon", 1.0, origin, "trigger");
  t.history_len = optional_or(obj, "history_len", 1, origin, "trigger");
  t.delta0 = optional_or(obj, "delta0", 0.0, origin, "trigger");
  if (obj.contains("schedule")) t.schedule = parse_schedule(obj.at("schedule"), origin, "trigger.schedule");
  return t;
}

RunConfig parse_run(const json& root, const std::string& origin) {
  check_keys(root,
             {"n", "seed", "algorithm", "gamma", "iterations", "objective", "mixing",
              "trigger", "sparsify", "staleness", "self_fresh", "init", "sweep"},
             origin, "<root>");

  RunConfig cfg;
  cfg.n = require<int>(root, "n", origin, "<root>");
  cfg.seed = require<std::uint64_t>(root, "seed", origin, "<root>");
  cfg.gamma = require<double>(root, "gamma", origin, "<root>");
  cfg.iterations = require<int>(root, "iterations", origin, "<root>");
  const auto algo = require<std::string>(root, "algorithm", origin, "<root>");
  if (algo == "regular")
    cfg.algorithm = Algorithm::regular;
  else if (algo == "eventgrad")
    cfg.algorithm = Algorithm::eventgrad;
  else
    fail(origin, "algorithm", "must be 'regular' or 'eventgrad'");

  if (!root.contains("objective")) fail(origin, "<root>", "missing required field 'objective'");
  cfg.objective = parse_objective(root.at("objective"), origin);

  if (root.contains("mixing")) {
    const json& mix = root.at("mixing");
    check_keys(mix, {"topology", "custom_matrix"}, origin, "mixing");
    const auto topology = optional_or<std::string>(mix, "topology", "ring", origin, "mixing");
    if (topology != "ring" && topology != "custom")
      fail(origin, "mixing.topology", "must be 'ring' or 'custom'");
    if (mix.contains("custom_matrix")) {
      std::vector<double> flat;
      try {
        flat = mix.at("custom_matrix").get<std::vector<double>>();
      } catch (const json::exception&) {
        fail(origin, "mixing.custom_matrix", "expected a flat list of reals");
      }
      if (static_cast<int>(flat.size()) != cfg.n * cfg.n)
        fail(origin, "mixing.custom_matrix", "expected n*n entries (row-major)");
      Eigen::MatrixXd w(cfg.n, cfg.n);
      for (int i = 0; i < cfg.n; ++i)
        for (int j = 0; j < cfg.n; ++j) w(i, j) = flat[i * cfg.n + j];
      cfg.custom_mixing = std::move(w);
    } else if (topology == "custom") {
      fail(origin, "mixing", "topology 'custom' requires custom_matrix");
    }
  }

  if (root.contains("trigger")) cfg.trigger = parse_trigger(root.at("trigger"), origin);
  if (root.contains("sparsify")) {
    const json& sp = root.at("sparsify");
    check_keys(sp, {"topk_percent"}, origin, "sparsify");
    cfg.topk_percent = require<double>(sp, "topk_percent", origin, "sparsify");
  }
  cfg.staleness = optional_or(root, "staleness", 0, origin, "<root>");
  cfg.self_fresh = optional_or(root, "self_fresh", false, origin, "<root>");
  if (root.contains("init")) {
    const json& init = root.at("init");
    check_keys(init, {"kind", "scale"}, origin, "init");
    const auto kind = optional_or<std::string>(init, "kind", "zero", origin, "init");
    if (kind == "zero")
      cfg.init = InitKind::zero;
    else if (kind == "random")
      cfg.init = InitKind::random;
    else
      fail(origin, "init.kind", "must be 'zero' or 'random'");
    cfg.init_scale = optional_or(init, "scale", 1.0, origin, "init");
  }

  // eventgrad runs default-construct their trigger config when omitted
  if (cfg.algorithm == Algorithm::eventgrad && !cfg.trigger) cfg.trigger = TriggerConfig{};

  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    fail(origin, "<root>", e.what());
  }
  return cfg;
}

json schedule_to_json(const ThresholdSchedule& s) {
  json out;
  switch (s.kind) {
    case ThresholdSchedule::Kind::none: out["kind"] = "none"; break;
    case ThresholdSchedule::Kind::constant_cap:
      out["kind"] = "constant_cap";
      out["c"] = s.c;
      break;
    case ThresholdSchedule::Kind::geometric_cap:
      out["kind"] = "geometric_cap";
      out["alpha"] = s.alpha;
      out["beta"] = s.beta;
      break;
  }
  return out;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  return parse_run(load_json(path), path);
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  try {
    return parse_run(json::parse(text), origin);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

std::string run_config_to_json(const RunConfig& config) {
  json root;
  root["n"] = config.n;
  root["seed"] = config.seed;
  root["algorithm"] = config.algorithm == Algorithm::regular ? "regular" : "eventgrad";
  root["gamma"] = config.gamma;
  root["iterations"] = config.iterations;

  json obj;
  obj["kind"] = config.objective.kind;
  obj["samples_per_pe"] = config.objective.samples_per_pe;
  obj["batch_size"] = config.objective.batch_size;
  if (!config.objective.csv_path.empty()) obj["csv_path"] = config.objective.csv_path;
  if (config.objective.kind == "least_squares") {
    obj["dim"] = config.objective.dim;
    obj["noise"] = config.objective.noise;
    obj["hetero_shift"] = config.objective.hetero_shift;
  } else {
    obj["features"] = config.objective.features;
    obj["classes"] = config.objective.classes;
    obj["cluster_spread"] = config.objective.cluster_spread;
    obj["hetero_shift"] = config.objective.hetero_shift;
    if (config.objective.kind == "mlp") obj["hidden"] = config.objective.hidden;
  }
  root["objective"] = std::move(obj);

  if (config.custom_mixing) {
    std::vector<double> flat;
    flat.reserve(config.n * config.n);
    for (int i = 0; i < config.n; ++i)
      for (int j = 0; j < config.n; ++j) flat.push_back((*config.custom_mixing)(i, j));
    root["mixing"] = {{"topology", "custom"}, {"custom_matrix", flat}};
  } else {
    root["mixing"] = {{"topology", "ring"}};
  }

  if (config.trigger) {
    json trig;
    trig["horizon"] = config.trigger->horizon;
    trig["history_len"] = config.trigger->history_len;
    trig["delta0"] = config.trigger->delta0;
    trig["schedule"] = schedule_to_json(config.trigger->schedule);
    root["trigger"] = std::move(trig);
  }
  if (config.topk_percent) root["sparsify"] = {{"topk_percent", *config.topk_percent}};
  root["staleness"] = config.staleness;
  root["self_fresh"] = config.self_fresh;
  root["init"] = {{"kind", config.init == InitKind::zero ? "zero" : "random"},
                  {"scale", config.init_scale}};
  return root.dump(2);
}

SweepConfig load_sweep_config(const std::string& path) {
  const json root = load_json(path);
  SweepConfig cfg;
  cfg.base = parse_run(root, path);
  if (!root.contains("sweep")) throw ConfigError(path + ": at 'sweep': missing sweep grid");
  const json& grid = root.at("sweep");
  check_keys(grid, {"horizon", "topk_percent", "n", "gamma"}, path, "sweep");
  cfg.grid.horizon = optional_or(grid, "horizon", std::vector<double>{}, path, "sweep");
  cfg.grid.topk_percent =
      optional_or(grid, "topk_percent", std::vector<double>{}, path, "sweep");
  cfg.grid.n = optional_or(grid, "n", std::vector<int>{}, path, "sweep");
  cfg.grid.gamma = optional_or(grid, "gamma", std::vector<double>{}, path, "sweep");
  if (cfg.grid.horizon.empty() && cfg.grid.topk_percent.empty() && cfg.grid.n.empty() &&
      cfg.grid.gamma.empty())
    throw ConfigError(path + ": at 'sweep': empty grid");
  if (cfg.base.algorithm == Algorithm::regular &&
      (!cfg.grid.horizon.empty() || !cfg.grid.topk_percent.empty()))
    throw ConfigError(path + ": at 'sweep': horizon/topk grids need an eventgrad base");
  return cfg;
}

BoundConfig load_bound_config(const std::string& path) {
  const json root = load_json(path);
  check_keys(root, {"iterations", "n", "schedule", "constants", "estimate"}, path, "<root>");

  BoundConfig cfg;
  cfg.iterations = require<int>(root, "iterations", path, "<root>");
  cfg.n = require<int>(root, "n", path, "<root>");
  if (cfg.iterations < 1) throw ConfigError(path + ": at 'iterations': must be >= 1");
  if (cfg.n < 1) throw ConfigError(path + ": at 'n': must be >= 1");
  if (root.contains("schedule"))
    cfg.schedule = parse_schedule(root.at("schedule"), path, "schedule");

  if (root.contains("constants")) {
    const json& c = root.at("constants");
    check_keys(c, {"gamma", "L", "sigma", "varsigma", "rho", "f0_minus_fstar"}, path,
               "constants");
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!c.contains(key)) return std::nullopt;
      return require<double>(c, key, path, "constants");
    };
    cfg.gamma = opt("gamma");
    cfg.L = opt("L");
    cfg.sigma = opt("sigma");
    cfg.varsigma = opt("varsigma");
    cfg.rho = opt("rho");
    cfg.f0_minus_fstar = opt("f0_minus_fstar");
  }

  if (root.contains("estimate")) {
    const json& e = root.at("estimate");
    check_keys(e, {"objective", "samples", "seed", "fstar"}, path, "estimate");
    if (!e.contains("objective"))
      throw ConfigError(path + ": at 'estimate': missing 'objective'");
    cfg.estimate_objective = parse_objective(e.at("objective"), path);
    cfg.estimate_samples = optional_or(e, "samples", 3, path, "estimate");
    cfg.seed = optional_or<std::uint64_t>(e, "seed", 0, path, "estimate");
    if (e.contains("fstar")) cfg.fstar_override = require<double>(e, "fstar", path, "estimate");
  }

  if (!cfg.estimate_objective &&
      (!cfg.L || !cfg.sigma || !cfg.varsigma || !cfg.f0_minus_fstar))
    throw ConfigError(path +
                      ": at 'constants': L, sigma, varsigma and f0_minus_fstar are "
                      "required unless 'estimate' is given");
  return cfg;
}

}  // namespace eventgrad
