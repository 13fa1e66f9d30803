#include "sampler/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>

#include "sampler/errors.hpp"
#include "sampler/hmc.hpp"
#include "sampler/kernels.hpp"
#include "sampler/output.hpp"

namespace sampler {

std::unique_ptr<TargetDensity> make_target(const TargetSpec& spec) {
  if (spec.kind == TargetKind::gaussian) {
    Vector variances = Vector::Ones(static_cast<Eigen::Index>(spec.dim));
    if (!spec.variances.empty()) {
      variances = Eigen::Map<const Vector>(spec.variances.data(), static_cast<Eigen::Index>(spec.variances.size()));
    }
    return std::make_unique<GaussianTarget>(variances);
  }
  return std::make_unique<LogisticPosterior>(load_dataset(spec.dataset, spec.response), spec.prior_variance);
}

std::filesystem::path output_directory(const ExperimentConfig& config, const RunOptions& options) {
  if (options.out_dir) return *options.out_dir;
  if (config.output.directory) return *config.output.directory;
  if (const char* root = std::getenv("SAMPLER_OUT"); root && *root) return std::filesystem::path(root) / config.name;
  return std::filesystem::path("out") / config.name;
}

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json chain_config_json(const ChainConfig& c) {
  json j = {{"kernel", c.kernel}, {"target", c.target}, {"mass", c.mass_form}};
  if (c.step_size) j["step_size"] = *c.step_size;
  if (c.num_steps) j["num_steps"] = *c.num_steps;
  if (c.trajectory_time) j["trajectory_time"] = *c.trajectory_time;
  if (c.proposal_scale) j["proposal_scale"] = *c.proposal_scale;
  return j;
}

json tuning_json(const StepSizeReport& report) {
  json probes = json::array();
  for (const auto& p : report.probes) {
    probes.push_back({{"step_size", p.step_size}, {"acceptance", p.acceptance}, {"divergences", p.divergences}});
  }
  return {{"step_size", report.step_size},
          {"target_acceptance", report.target_acceptance},
          {"success", report.success},
          {"message", report.message},
          {"probes", probes}};
}

json mass_json(const MassMatrix& mass) {
  json j = {{"form", to_string(mass.form())}};
  const Vector diag = mass.diagonal_entries();
  j["diagonal"] = std::vector<double>(diag.data(), diag.data() + diag.size());
  if (mass.form() == MassMatrix::Form::dense) {
    const Matrix m = mass.matrix();
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      rows.push_back(row);
    }
    j["matrix"] = rows;
  }
  return j;
}

json run_json(const RunRecord& r) {
  json j = {{"label", r.label},
            {"config", chain_config_json(r.chain.config)},
            {"stream_seed", r.chain.seed},
            {"iterations", r.chain.iterations()},
            {"acceptance", r.chain.acceptance_rate()},
            {"divergences", r.chain.divergences.size()},
            {"min_ess", optional_json(r.summary.min_ess())},
            {"wall_seconds", r.wall_seconds}};
  if (r.suggestion) {
    j["trajectory_suggestion"] = {{"num_steps", r.suggestion->num_steps},
                                  {"uturn_time", r.suggestion->uturn_time},
                                  {"truncated", r.suggestion->truncated}};
  }
  return j;
}

void write_runs_csv(const std::filesystem::path& path, const std::vector<RunRecord>& runs) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto opt = [](const auto& v) { return v ? format_double(static_cast<double>(*v)) : std::string(); };
  out << "label,kernel,mass,s,step_size,num_steps,proposal_scale,acceptance,divergences,min_ess\n";
  for (const auto& r : runs) {
    const ChainConfig& c = r.chain.config;
    std::optional<double> s = c.trajectory_time;
    if (!s && c.step_size && c.num_steps) s = *c.step_size * *c.num_steps;
    out << r.label << ',' << c.kernel << ',' << c.mass_form << ',' << opt(s) << ','
        << opt(c.step_size) << ',' << (c.num_steps ? std::to_string(*c.num_steps) : "") << ','
        << opt(c.proposal_scale) << ',' << format_double(r.chain.acceptance_rate()) << ','
        << r.chain.divergences.size() << ',' << opt(r.summary.min_ess()) << '\n';
  }
}

ProgressFn progress_for(std::ostream* log, const std::string& label, std::size_t total) {
  if (!log) return {};
  return [log, label, total](std::size_t done) { *log << "[" << label << "] " << done << "/" << total << '\n'; };
}

void write_leapfrog_path(const std::filesystem::path& path, const TargetDensity& target, const MassMatrix& mass,
                         double step_size, int num_steps, const std::array<double, 2>& start) {
  PhaseState z{Vector::Constant(1, start[0]), Vector::Constant(1, start[1])};
  std::vector<PhaseState> states{z};
  std::vector<double> energies{hamiltonian(target, mass, z)};
  for (int k = 0; k < num_steps; ++k) {
    LeapfrogResult step = leapfrog(target, mass, z, {step_size, 1});
    if (step.divergent()) break;
    z = step.state;
    states.push_back(z);
    energies.push_back(hamiltonian(target, mass, z));
  }
  write_trajectory_csv(path, states, energies, step_size);
}

RunRecord execute_run(const ExperimentConfig& cfg, const TargetDensity& target, const RunSpec& run,
                      const MassMatrix& mass, const Vector& x0, Rng& rng, std::ostream* log) {
  RunRecord record;
  record.label = run.label;
  const ProgressFn progress = progress_for(log, cfg.name + (run.label.empty() ? "" : "/" + run.label), cfg.iterations);
  const auto start = Clock::now();
  switch (cfg.kernel) {
    case KernelKind::rwm:
      record.chain = run_mh_chain(target, *rwm_proposal(*run.proposal_scale), cfg.iterations, x0, rng, progress);
      break;
    case KernelKind::mala:
      record.chain =
          run_mh_chain(target, *mala_proposal(target, *run.proposal_scale), cfg.iterations, x0, rng, progress);
      break;
    case KernelKind::ideal_hmc:
      record.chain = ideal_hmc_chain(*run.trajectory_time, cfg.iterations, x0[0], rng, progress);
      break;
    case KernelKind::hmc:
      record.chain = run_chain(target, mass, {*run.step_size, *run.num_steps}, cfg.iterations, x0, rng, progress);
      break;
    case KernelKind::mhgj_demo: {
      const GaussianMomentum aux(mass);
      const LeapfrogInvolution g(target, mass, {*run.step_size, *run.num_steps});
      record.chain = run_mhgj_chain(target, aux, g, cfg.iterations, x0, rng, progress);
      record.chain.config.step_size = *run.step_size;
      record.chain.config.num_steps = *run.num_steps;
      record.chain.config.mass_form = to_string(mass.form());
      break;
    }
  }
  record.wall_seconds = seconds_since(start);
  record.summary = summarize(record.chain, cfg.output.max_lag);
  return record;
}

void write_run_files(const std::filesystem::path& dir, const RunRecord& r, std::size_t bins) {
  write_samples_csv(dir / "samples.csv", r.chain);
  write_summary_csv(dir / "summary.csv", r.summary);
  write_acf_csv(dir / "acf.csv", r.summary);
  write_density_csv(dir / "density.csv", r.chain, bins);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate(cfg);
  const auto started = Clock::now();
  const std::uint64_t seed = options.seed.value_or(cfg.seed);
  const std::unique_ptr<TargetDensity> target = make_target(cfg.target);
  const auto d = static_cast<Eigen::Index>(target->dim());

  Vector x0 = Vector::Zero(d);
  if (cfg.initial) {
    if (static_cast<Eigen::Index>(cfg.initial->size()) != d) {
      throw ConfigError("initial has " + std::to_string(cfg.initial->size()) + " entries, target has " +
                        std::to_string(d) + " coordinates");
    }
    x0 = Eigen::Map<const Vector>(cfg.initial->data(), d);
  }

  ExperimentResult result;
  result.directory = output_directory(cfg, options);
  json meta = {{"experiment", cfg.name}, {"seed", seed}, {"config", to_json(cfg)}};
  meta["coordinate_names"] = target->coordinate_names();

  if (cfg.tuning.mode == TuningMode::automatic) {
    const double accept_target = cfg.tuning.accept_target.value_or(default_accept_target(target->dim()));
    WarmupOptions wopts;
    wopts.num_steps = cfg.tuning.parameters.num_steps;
    wopts.x0 = x0;
    wopts.progress = progress_for(options.log, cfg.name + "/warmup", cfg.tuning.warmup);
    Rng rng = Rng::stream(seed, 0);
    if (options.log) *options.log << "[" << cfg.name << "] warmup\n";
    WarmupResult warm = warmup_pipeline(*target, cfg.tuning.warmup, cfg.tuning.mass_mode, accept_target, rng, wopts);

    json tuning = {{"accept_target", accept_target},
                   {"stage1", tuning_json(warm.stage1_tuning)},
                   {"stage2", tuning_json(warm.stage2_tuning)},
                   {"stage1_num_steps", warm.stage1_config.num_steps},
                   {"warmup_acceptance", warm.warmup.acceptance_rate()},
                   {"warmup_divergences", warm.warmup.divergences.size()},
                   {"ridge", warm.estimate.ridge},
                   {"mass", mass_json(warm.mass)},
                   {"step_size", warm.config.step_size},
                   {"num_steps", warm.config.num_steps}};
    if (warm.trajectory) {
      tuning["trajectory_suggestion"] = {{"num_steps", warm.trajectory->num_steps},
                                         {"uturn_time", warm.trajectory->uturn_time},
                                         {"truncated", warm.trajectory->truncated}};
    }
    meta["tuning"] = tuning;

    if (!warm.success()) {
      result.success = false;
      result.message = "automatic tuning failed: " +
                       (warm.stage1_tuning.success ? warm.stage2_tuning.message : warm.stage1_tuning.message);
      meta["success"] = false;
      meta["message"] = result.message;
      meta["wall_seconds"] = seconds_since(started);
      if (options.write_outputs) write_json(result.directory / "meta.json", meta);
      result.meta = std::move(meta);
      result.warmup = std::move(warm);
      return result;
    }

    const Vector restart = warm.warmup.samples.bottomRows(1).transpose();
    RunSpec tuned{cfg.tuning.compare_baseline ? "stage2" : "", warm.config.step_size, warm.config.num_steps, {}, {}};
    Rng final_rng = Rng::stream(seed, 1);
    result.runs.push_back(execute_run(cfg, *target, tuned, warm.mass, restart, final_rng, options.log));
    if (cfg.tuning.compare_baseline) {
      RunSpec naive{"stage1", warm.stage1_config.step_size, warm.stage1_config.num_steps, {}, {}};
      Rng base_rng = Rng::stream(seed, 2);
      result.runs.push_back(execute_run(cfg, *target, naive, MassMatrix::identity(target->dim()), restart, base_rng,
                                        options.log));
    }
    result.warmup = std::move(warm);
  } else {
    const MassMatrix mass =
        cfg.tuning.mass == "diagonal"
            ? MassMatrix::diagonal(Eigen::Map<const Vector>(cfg.tuning.mass_diagonal.data(), d))
            : MassMatrix::identity(target->dim());
    const auto runs = cfg.resolved_runs();
    for (std::size_t k = 0; k < runs.size(); ++k) {
      Rng rng = Rng::stream(seed, k);
      RunRecord record = execute_run(cfg, *target, runs[k], mass, x0, rng, options.log);
      if (cfg.output.suggest_trajectory) {
        const Vector from = cfg.output.trajectory_start ? Vector::Constant(1, (*cfg.output.trajectory_start)[0]) : x0;
        record.suggestion = suggest_trajectory(*target, mass, *runs[k].step_size, 1000, from);
      }
      result.runs.push_back(std::move(record));
    }
    if (options.write_outputs && cfg.output.trajectory_start) {
      for (const auto& r : result.runs) {
        const std::filesystem::path dir = result.runs.size() > 1 ? result.directory / r.label : result.directory;
        write_leapfrog_path(dir / "trajectory.csv", *target, mass, *r.chain.config.step_size,
                            *r.chain.config.num_steps, *cfg.output.trajectory_start);
      }
    }
  }

  json runs = json::array();
  for (const auto& r : result.runs) runs.push_back(run_json(r));
  meta["runs"] = runs;
  meta["success"] = true;
  meta["wall_seconds"] = seconds_since(started);

  if (options.write_outputs) {
    for (const auto& r : result.runs) {
      write_run_files(result.runs.size() > 1 ? result.directory / r.label : result.directory, r,
                      cfg.output.histogram_bins);
    }
    write_runs_csv(result.directory / "runs.csv", result.runs);
    write_json(result.directory / "meta.json", meta);
  }
  result.meta = std::move(meta);
  return result;
}

}  // namespace sampler
