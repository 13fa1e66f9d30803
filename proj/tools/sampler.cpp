#include <cstdint>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sampler/config.hpp"
#include "sampler/errors.hpp"
#include "sampler/experiment.hpp"
#include "sampler/random.hpp"
#include "sampler/targets.hpp"

using namespace sampler;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

int cmd_list() {
  for (const auto& name : list_experiments()) {
    std::string description;
    try {
      description = load_config(resolve_config_path(name)).description;
    } catch (const std::exception& e) {
      description = std::string("(unreadable: ") + e.what() + ")";
    }
    std::cout << std::left << std::setw(26) << name << description << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& name) {
  const ExperimentConfig cfg = load_config(resolve_config_path(name));
  std::cout << cfg.name << ": ok (" << to_string(cfg.kernel) << " on " << to_string(cfg.target.kind) << ", "
            << (cfg.tuning.mode == TuningMode::automatic ? 1 + cfg.tuning.compare_baseline : cfg.resolved_runs().size())
            << " run(s))\n";
  return 0;
}

int cmd_run(const std::string& name, std::optional<std::uint64_t> seed, std::optional<std::string> out, bool verbose) {
  const ExperimentConfig cfg = load_config(resolve_config_path(name));
  RunOptions options;
  options.seed = seed;
  if (out) options.out_dir = *out;
  if (verbose) options.log = &std::clog;
  const ExperimentResult result = run_experiment(cfg, options);
  if (!result.success) {
    std::cerr << "error: " << result.message << '\n';
    std::cerr << "tuning history written to " << (result.directory / "meta.json").string() << '\n';
    return kExitFailure;
  }
  std::cout << std::left << std::setw(16) << "run" << std::setw(12) << "acceptance" << std::setw(13)
            << "divergences" << "min_ess\n";
  for (const auto& r : result.runs) {
    const auto min_ess = r.summary.min_ess();
    std::cout << std::left << std::setw(16) << (r.label.empty() ? cfg.name : r.label) << std::setw(12)
              << std::fixed << std::setprecision(4) << r.chain.acceptance_rate() << std::setw(13)
              << r.chain.divergences.size() << std::setprecision(0);
    if (min_ess) {
      std::cout << *min_ess << '\n';
    } else {
      std::cout << "-\n";
    }
  }
  std::cout << "output: " << result.directory.string() << '\n';
  return 0;
}

int cmd_check_gradient(const std::string& name, std::size_t dim, std::size_t points, std::uint64_t seed,
                       std::optional<double> scale, double tolerance) {
  std::unique_ptr<TargetDensity> target;
  if (name == "gaussian") {
    target = std::make_unique<GaussianTarget>(standard_gaussian(dim));
  } else if (name == "pima") {
    TargetSpec spec;
    spec.kind = TargetKind::logistic;
    spec.dataset = bundled_config_dir().parent_path() / "data" / "pima.csv";
    target = make_target(spec);
  } else {
    target = make_target(load_config(resolve_config_path(name)).target);
  }
  const double spread = scale.value_or(target->name() == "logistic" ? 0.1 : 1.0);
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const Vector x = spread * rng.normal_vector(static_cast<Eigen::Index>(target->dim()));
    worst = std::max(worst, check_gradient(*target, x));
  }
  const bool ok = worst <= tolerance;
  std::cout << target->name() << " (d = " << target->dim() << "): max relative error " << std::setprecision(3)
            << worst << " over " << points << " points, tolerance " << tolerance << " -> "
            << (ok ? "ok" : "FAILED") << '\n';
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian Monte Carlo sampler and reproduction experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the bundled experiments");

  std::string run_name;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "Run an experiment (bundled name or config path)");
  run->add_option("config", run_name, "Experiment name or TOML path")->required();
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--verbose,-v", verbose, "Print progress");

  std::string validate_name;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("config", validate_name, "Experiment name or TOML path")->required();

  std::string grad_name;
  std::size_t grad_dim = 5;
  std::size_t grad_points = 100;
  std::uint64_t grad_seed = 1;
  std::optional<double> grad_scale;
  double grad_tolerance = 1e-5;
  auto* grad = app.add_subcommand("check-gradient", "Compare analytic and finite-difference gradients");
  grad->add_option("target", grad_name, "gaussian, pima, or an experiment name / config path")->required();
  grad->add_option("--dim", grad_dim, "Dimension of the gaussian target");
  grad->add_option("--points", grad_points, "Number of random points");
  grad->add_option("--seed", grad_seed, "Seed for the random points");
  grad->add_option("--scale", grad_scale, "Standard deviation of the random points");
  grad->add_option("--tolerance", grad_tolerance, "Largest acceptable relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) return cmd_list();
    if (*validate_cmd) return cmd_validate(validate_name);
    if (*run) return cmd_run(run_name, run_seed, run_out, verbose);
    if (*grad) return cmd_check_gradient(grad_name, grad_dim, grad_points, grad_seed, grad_scale, grad_tolerance);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
