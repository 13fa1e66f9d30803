#include "sampler/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "sampler/errors.hpp"

#ifndef SAMPLER_SOURCE_DIR
#define SAMPLER_SOURCE_DIR "."
#endif

namespace sampler {

std::string to_string(TargetKind kind) { return kind == TargetKind::gaussian ? "gaussian" : "logistic"; }

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::rwm:
      return "rwm";
    case KernelKind::mala:
      return "mala";
    case KernelKind::ideal_hmc:
      return "ideal-hmc";
    case KernelKind::hmc:
      return "hmc";
    case KernelKind::mhgj_demo:
      return "mhgj-demo";
  }
  return "unknown";
}

std::string to_string(TuningMode mode) { return mode == TuningMode::manual ? "explicit" : "auto"; }

namespace {

void check_keys(const toml::table& table, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : table) {
    bool known = false;
    for (auto a : allowed) known = known || key.str() == a;
    if (!known) throw ConfigError(where + ": unknown key '" + std::string(key.str()) + "'");
  }
}

std::optional<double> get_double(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (auto v = node->value<double>()) return *v;  // accepts integers too
  throw ConfigError(where + "." + std::string(key) + " must be a number");
}

std::optional<std::int64_t> get_int(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_integer()) return node->value<std::int64_t>();
  throw ConfigError(where + "." + std::string(key) + " must be an integer");
}

std::optional<std::string> get_string(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_string()) return node->value<std::string>();
  throw ConfigError(where + "." + std::string(key) + " must be a string");
}

std::optional<bool> get_bool(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_boolean()) return node->value<bool>();
  throw ConfigError(where + "." + std::string(key) + " must be true or false");
}

std::optional<std::vector<double>> get_numbers(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  const toml::array* array = node->as_array();
  if (!array) throw ConfigError(where + "." + std::string(key) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& element : *array) {
    auto v = element.value<double>();
    if (!v) throw ConfigError(where + "." + std::string(key) + " must contain only numbers");
    out.push_back(*v);
  }
  return out;
}

std::size_t to_count(std::int64_t v, const std::string& what) {
  if (v < 0) throw ConfigError(what + " must be non-negative");
  return static_cast<std::size_t>(v);
}

const toml::table& require_table(const toml::table& root, std::string_view key) {
  const toml::node* node = root.get(key);
  if (!node) throw ConfigError("config needs a [" + std::string(key) + "] table");
  const toml::table* table = node->as_table();
  if (!table) throw ConfigError("'" + std::string(key) + "' must be a table");
  return *table;
}

RunSpec parse_run_parameters(const toml::table& t, const std::string& where) {
  RunSpec run;
  run.step_size = get_double(t, "step_size", where);
  if (auto l = get_int(t, "num_steps", where)) {
    if (*l < 1 || *l > std::numeric_limits<int>::max()) throw ConfigError(where + ".num_steps must be >= 1");
    run.num_steps = static_cast<int>(*l);
  }
  run.trajectory_time = get_double(t, "trajectory_time", where);
  run.proposal_scale = get_double(t, "proposal_scale", where);
  return run;
}

KernelKind parse_kernel(const std::string& kind) {
  if (kind == "rwm") return KernelKind::rwm;
  if (kind == "mala") return KernelKind::mala;
  if (kind == "ideal-hmc") return KernelKind::ideal_hmc;
  if (kind == "hmc") return KernelKind::hmc;
  if (kind == "mhgj-demo") return KernelKind::mhgj_demo;
  throw ConfigError("unknown kernel kind '" + kind + "' (expected rwm, mala, ideal-hmc, hmc or mhgj-demo)");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config syntax error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  check_keys(root, "config", {"name", "description", "iterations", "seed", "initial", "target", "kernel", "tuning",
                              "runs", "output"});

  ExperimentConfig cfg;
  cfg.name = get_string(root, "name", "config").value_or("");
  cfg.description = get_string(root, "description", "config").value_or("");
  if (auto t = get_int(root, "iterations", "config")) cfg.iterations = to_count(*t, "iterations");
  if (auto s = get_int(root, "seed", "config")) {
    if (*s < 0) throw ConfigError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(*s);
  }
  cfg.initial = get_numbers(root, "initial", "config");

  const toml::table& target = require_table(root, "target");
  check_keys(target, "target", {"kind", "dim", "variances", "dataset", "response", "prior_variance"});
  const std::string target_kind = get_string(target, "kind", "target").value_or("");
  if (target_kind == "gaussian") {
    cfg.target.kind = TargetKind::gaussian;
  } else if (target_kind == "logistic") {
    cfg.target.kind = TargetKind::logistic;
  } else {
    throw ConfigError("target.kind must be 'gaussian' or 'logistic'");
  }
  if (auto d = get_int(target, "dim", "target")) cfg.target.dim = to_count(*d, "target.dim");
  if (auto v = get_numbers(target, "variances", "target")) cfg.target.variances = *v;
  if (auto path = get_string(target, "dataset", "target")) {
    std::filesystem::path p(*path);
    cfg.target.dataset = p.is_relative() && !base_dir.empty() ? (base_dir / p).lexically_normal() : p;
  }
  if (auto r = get_string(target, "response", "target")) cfg.target.response = *r;
  if (auto s2 = get_double(target, "prior_variance", "target")) cfg.target.prior_variance = *s2;

  const toml::table& kernel = require_table(root, "kernel");
  check_keys(kernel, "kernel", {"kind"});
  cfg.kernel = parse_kernel(get_string(kernel, "kind", "kernel").value_or(""));

  if (const toml::node* node = root.get("tuning")) {
    const toml::table* tuning = node->as_table();
    if (!tuning) throw ConfigError("'tuning' must be a table");
    check_keys(*tuning, "tuning", {"mode", "step_size", "num_steps", "trajectory_time", "proposal_scale", "mass",
                                   "mass_diagonal", "warmup", "mass_mode", "accept_target", "compare_baseline"});
    const std::string mode = get_string(*tuning, "mode", "tuning").value_or("explicit");
    if (mode == "explicit") {
      cfg.tuning.mode = TuningMode::manual;
    } else if (mode == "auto") {
      cfg.tuning.mode = TuningMode::automatic;
    } else {
      throw ConfigError("tuning.mode must be 'explicit' or 'auto'");
    }
    cfg.tuning.parameters = parse_run_parameters(*tuning, "tuning");
    if (auto m = get_string(*tuning, "mass", "tuning")) cfg.tuning.mass = *m;
    if (auto md = get_numbers(*tuning, "mass_diagonal", "tuning")) cfg.tuning.mass_diagonal = *md;
    if (auto w = get_int(*tuning, "warmup", "tuning")) cfg.tuning.warmup = to_count(*w, "tuning.warmup");
    if (auto mm = get_string(*tuning, "mass_mode", "tuning")) {
      if (*mm == "diagonal") {
        cfg.tuning.mass_mode = MassMode::diagonal;
      } else if (*mm == "dense") {
        cfg.tuning.mass_mode = MassMode::dense;
      } else {
        throw ConfigError("tuning.mass_mode must be 'diagonal' or 'dense'");
      }
    }
    cfg.tuning.accept_target = get_double(*tuning, "accept_target", "tuning");
    cfg.tuning.compare_baseline = get_bool(*tuning, "compare_baseline", "tuning").value_or(false);

    // Keys that only make sense for one mode are rejected in the other.
    const bool has_explicit = tuning->contains("step_size") || tuning->contains("mass") ||
                              tuning->contains("mass_diagonal") || tuning->contains("trajectory_time") ||
                              tuning->contains("proposal_scale");
    const bool has_auto = tuning->contains("warmup") || tuning->contains("mass_mode") ||
                          tuning->contains("accept_target") || tuning->contains("compare_baseline");
    if (cfg.tuning.mode == TuningMode::automatic && has_explicit) {
      throw ConfigError("tuning: explicit parameters (step_size, mass, ...) cannot be combined with mode = \"auto\"");
    }
    if (cfg.tuning.mode == TuningMode::manual && has_auto) {
      throw ConfigError("tuning: warmup settings require mode = \"auto\"");
    }
  }

  if (const toml::node* node = root.get("runs")) {
    const toml::array* runs = node->as_array();
    if (!runs) throw ConfigError("'runs' must be an array of tables ([[runs]])");
    std::size_t index = 0;
    for (const auto& element : *runs) {
      const toml::table* run = element.as_table();
      const std::string where = "runs[" + std::to_string(index++) + "]";
      if (!run) throw ConfigError(where + " must be a table");
      check_keys(*run, where, {"label", "step_size", "num_steps", "trajectory_time", "proposal_scale"});
      RunSpec spec = parse_run_parameters(*run, where);
      spec.label = get_string(*run, "label", where).value_or("");
      cfg.runs.push_back(std::move(spec));
    }
  }

  if (const toml::node* node = root.get("output")) {
    const toml::table* output = node->as_table();
    if (!output) throw ConfigError("'output' must be a table");
    check_keys(*output, "output", {"directory", "max_lag", "histogram_bins", "trajectory_start", "suggest_trajectory"});
    if (auto dir = get_string(*output, "directory", "output")) cfg.output.directory = *dir;
    if (auto lag = get_int(*output, "max_lag", "output")) cfg.output.max_lag = to_count(*lag, "output.max_lag");
    if (auto bins = get_int(*output, "histogram_bins", "output")) {
      cfg.output.histogram_bins = to_count(*bins, "output.histogram_bins");
    }
    if (auto start = get_numbers(*output, "trajectory_start", "output")) {
      if (start->size() != 2) throw ConfigError("output.trajectory_start must be [position, momentum]");
      cfg.output.trajectory_start = std::array<double, 2>{(*start)[0], (*start)[1]};
    }
    cfg.output.suggest_trajectory = get_bool(*output, "suggest_trajectory", "output").value_or(false);
  }

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig cfg = parse_config(text.str(), path.parent_path());
  if (cfg.name.empty()) cfg.name = path.stem().string();
  return cfg;
}

std::vector<RunSpec> ExperimentConfig::resolved_runs() const {
  if (runs.empty()) {
    RunSpec single = tuning.parameters;
    single.label.clear();
    return {single};
  }
  std::vector<RunSpec> out;
  for (const auto& run : runs) {
    RunSpec merged = tuning.parameters;
    merged.label = run.label;
    if (run.step_size) merged.step_size = run.step_size;
    if (run.num_steps) merged.num_steps = run.num_steps;
    if (run.trajectory_time) merged.trajectory_time = run.trajectory_time;
    if (run.proposal_scale) merged.proposal_scale = run.proposal_scale;
    out.push_back(std::move(merged));
  }
  return out;
}

namespace {

void require_positive(const std::optional<double>& value, const std::string& what) {
  if (!value) throw ConfigError(what + " is required");
  if (!std::isfinite(*value) || !(*value > 0.0)) throw ConfigError(what + " must be finite and positive");
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");

  const TargetSpec& t = cfg.target;
  if (t.kind == TargetKind::gaussian) {
    if (t.dim < 1) throw ConfigError("target.dim must be >= 1");
    if (!t.variances.empty()) {
      if (t.variances.size() != t.dim) throw ConfigError("target.variances must have target.dim entries");
      for (double v : t.variances) {
        if (!std::isfinite(v) || !(v > 0.0)) throw ConfigError("target.variances must be positive");
      }
    }
    if (!t.dataset.empty()) throw ConfigError("target.dataset only applies to the logistic target");
  } else {
    if (t.dataset.empty()) throw ConfigError("the logistic target needs target.dataset");
    if (!std::isfinite(t.prior_variance) || !(t.prior_variance > 0.0)) {
      throw ConfigError("target.prior_variance must be positive");
    }
  }

  const std::size_t dim = t.kind == TargetKind::gaussian ? t.dim : 0;
  if (cfg.initial && dim != 0 && cfg.initial->size() != dim) {
    throw ConfigError("initial must have target.dim entries");
  }

  if (cfg.kernel == KernelKind::ideal_hmc) {
    const bool standard = std::all_of(t.variances.begin(), t.variances.end(), [](double v) { return v == 1.0; });
    if (t.kind != TargetKind::gaussian || t.dim != 1 || !standard) {
      throw ConfigError("ideal-hmc needs the one-dimensional standard gaussian target");
    }
  }

  const bool leapfrog_kernel = cfg.kernel == KernelKind::hmc || cfg.kernel == KernelKind::mhgj_demo;
  if (cfg.output.trajectory_start && (!leapfrog_kernel || t.kind != TargetKind::gaussian || t.dim != 1)) {
    throw ConfigError("output.trajectory_start needs a leapfrog kernel on a one-dimensional gaussian");
  }
  if (cfg.output.suggest_trajectory && !leapfrog_kernel) {
    throw ConfigError("output.suggest_trajectory needs a leapfrog kernel");
  }

  std::set<std::string> labels;
  for (const auto& run : cfg.runs) {
    if (run.label.empty()) throw ConfigError("every [[runs]] entry needs a label");
    if (run.label.find_first_of("/\\") != std::string::npos || run.label == "." || run.label == "..") {
      throw ConfigError("run label '" + run.label + "' is not a valid directory name");
    }
    if (!labels.insert(run.label).second) throw ConfigError("duplicate run label '" + run.label + "'");
  }

  if (cfg.tuning.mode == TuningMode::automatic) {
    if (cfg.kernel != KernelKind::hmc) throw ConfigError("automatic tuning is only available for the hmc kernel");
    if (cfg.tuning.warmup < 1000) throw ConfigError("tuning.warmup must be at least 1000 iterations");
    if (cfg.tuning.accept_target &&
        !(*cfg.tuning.accept_target > 0.05 && *cfg.tuning.accept_target < 1.0)) {
      throw ConfigError("tuning.accept_target must lie in (0.05, 1)");
    }
    if (!cfg.runs.empty()) throw ConfigError("[[runs]] variants cannot be combined with automatic tuning");
    return;
  }

  if (cfg.tuning.mass != "identity" && cfg.tuning.mass != "diagonal") {
    throw ConfigError("tuning.mass must be 'identity' or 'diagonal' in a config file");
  }
  if (cfg.tuning.mass == "diagonal") {
    if (cfg.tuning.mass_diagonal.empty()) throw ConfigError("tuning.mass = \"diagonal\" needs tuning.mass_diagonal");
    if (dim != 0 && cfg.tuning.mass_diagonal.size() != dim) {
      throw ConfigError("tuning.mass_diagonal must have target.dim entries");
    }
    for (double m : cfg.tuning.mass_diagonal) {
      if (!std::isfinite(m) || !(m > 0.0)) throw ConfigError("tuning.mass_diagonal entries must be positive");
    }
  } else if (!cfg.tuning.mass_diagonal.empty()) {
    throw ConfigError("tuning.mass_diagonal requires tuning.mass = \"diagonal\"");
  }

  for (const auto& run : cfg.resolved_runs()) {
    const std::string where = run.label.empty() ? std::string("tuning") : "run '" + run.label + "'";
    switch (cfg.kernel) {
      case KernelKind::rwm:
      case KernelKind::mala:
        require_positive(run.proposal_scale, where + ": proposal_scale");
        break;
      case KernelKind::ideal_hmc:
        require_positive(run.trajectory_time, where + ": trajectory_time");
        break;
      case KernelKind::hmc:
      case KernelKind::mhgj_demo:
        require_positive(run.step_size, where + ": step_size");
        if (!run.num_steps) throw ConfigError(where + ": num_steps is required");
        break;
    }
  }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  auto run_json = [](const RunSpec& r) {
    json j = json::object();
    if (!r.label.empty()) j["label"] = r.label;
    if (r.step_size) j["step_size"] = *r.step_size;
    if (r.num_steps) j["num_steps"] = *r.num_steps;
    if (r.trajectory_time) j["trajectory_time"] = *r.trajectory_time;
    if (r.proposal_scale) j["proposal_scale"] = *r.proposal_scale;
    return j;
  };

  json target = {{"kind", to_string(cfg.target.kind)}};
  if (cfg.target.kind == TargetKind::gaussian) {
    target["dim"] = cfg.target.dim;
    if (!cfg.target.variances.empty()) target["variances"] = cfg.target.variances;
  } else {
    target["dataset"] = cfg.target.dataset.generic_string();
    target["response"] = cfg.target.response;
    target["prior_variance"] = cfg.target.prior_variance;
  }

  json tuning = run_json(cfg.tuning.parameters);
  tuning["mode"] = to_string(cfg.tuning.mode);
  if (cfg.tuning.mode == TuningMode::manual) {
    tuning["mass"] = cfg.tuning.mass;
    if (!cfg.tuning.mass_diagonal.empty()) tuning["mass_diagonal"] = cfg.tuning.mass_diagonal;
  } else {
    tuning["warmup"] = cfg.tuning.warmup;
    tuning["mass_mode"] = to_string(cfg.tuning.mass_mode);
    if (cfg.tuning.accept_target) tuning["accept_target"] = *cfg.tuning.accept_target;
    tuning["compare_baseline"] = cfg.tuning.compare_baseline;
  }

  json runs = json::array();
  for (const auto& r : cfg.runs) runs.push_back(run_json(r));

  json output = {{"max_lag", cfg.output.max_lag},
                 {"histogram_bins", cfg.output.histogram_bins},
                 {"suggest_trajectory", cfg.output.suggest_trajectory}};
  if (cfg.output.trajectory_start) output["trajectory_start"] = *cfg.output.trajectory_start;

  json j = {{"name", cfg.name},     {"description", cfg.description}, {"iterations", cfg.iterations},
            {"seed", cfg.seed},     {"target", target},              {"kernel", to_string(cfg.kernel)},
            {"tuning", tuning},     {"runs", runs},                  {"output", output}};
  if (cfg.initial) j["initial"] = *cfg.initial;
  return j;
}

std::vector<std::string> list_experiments() {
  return {"table1", "ideal_hmc_acf", "leapfrog_eps_sweep_s1", "leapfrog_eps_sweep_s10", "gaussian_period",
          "pima_two_stage"};
}

std::filesystem::path bundled_config_dir() {
  if (const char* dir = std::getenv("SAMPLER_CONFIG_DIR")) return dir;
  return std::filesystem::path(SAMPLER_SOURCE_DIR) / "configs";
}

std::filesystem::path resolve_config_path(const std::string& name_or_path) {
  const auto names = list_experiments();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return bundled_config_dir() / (name_or_path + ".toml");
  }
  std::filesystem::path path(name_or_path);
  if (std::filesystem::exists(path)) return path;
  std::string available;
  for (const auto& n : names) available += (available.empty() ? "" : ", ") + n;
  throw ConfigError("unknown experiment '" + name_or_path + "'; available: " + available);
}

}  // namespace sampler
