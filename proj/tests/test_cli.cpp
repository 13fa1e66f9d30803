#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include "sampler/config.hpp"
#include "sampler/errors.hpp"
#include "sampler/experiment.hpp"
#include "sampler/output.hpp"
#include "support.hpp"

using namespace sampler;
using testing::TempDir;

namespace {

const char* kSmallConfig = R"(
name = "small"
iterations = 1500
seed = 7

[target]
kind = "gaussian"
dim = 2

[kernel]
kind = "hmc"

[tuning]
step_size = 0.3
num_steps = 6
)";

const char* kVariantConfig = R"(
name = "variants"
iterations = 1200
seed = 3

[target]
kind = "gaussian"
dim = 1

[kernel]
kind = "rwm"

[[runs]]
label = "narrow"
proposal_scale = 0.1

[[runs]]
label = "wide"
proposal_scale = 4.0
)";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  FAIL("expected a ConfigError for:\n" << text);
  return {};
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string command = std::string(SAMPLER_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("bundled experiments are listed and valid") {
  const auto names = list_experiments();
  CHECK(names == std::vector<std::string>{"table1", "ideal_hmc_acf", "leapfrog_eps_sweep_s1",
                                          "leapfrog_eps_sweep_s10", "gaussian_period", "pima_two_stage"});
  for (const auto& name : names) {
    const ExperimentConfig cfg = load_config(resolve_config_path(name));
    CHECK(cfg.name == name);
    CHECK_NOTHROW(validate(cfg));
  }
}

TEST_CASE("table1 config holds six step-size settings") {
  const ExperimentConfig cfg = load_config(resolve_config_path("table1"));
  CHECK(cfg.iterations == 10000);
  const auto runs = cfg.resolved_runs();
  REQUIRE(runs.size() == 6);
  const double eps[] = {0.01, 0.1, 1.0, 0.1, 1.0, 10.0};
  const int steps[] = {100, 10, 1, 100, 10, 1};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(*runs[i].step_size == eps[i]);
    CHECK(*runs[i].num_steps == steps[i]);
  }
}

TEST_CASE("unknown experiment names list the alternatives") {
  try {
    resolve_config_path("no_such_experiment");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string message = e.what();
    CHECK(message.find("no_such_experiment") != std::string::npos);
    CHECK(message.find("pima_two_stage") != std::string::npos);
  }
}

TEST_CASE("explicit and automatic tuning are exclusive") {
  const std::string message = expect_config_error(R"(
[target]
kind = "gaussian"
[kernel]
kind = "hmc"
[tuning]
mode = "auto"
warmup = 2000
step_size = 0.1
)");
  CHECK(message.find("auto") != std::string::npos);
}

TEST_CASE("config validation errors") {
  expect_config_error("[kernel]\nkind = \"hmc\"\n");
  expect_config_error("[target]\nkind = \"gaussian\"\n");
  expect_config_error("[target]\nkind = \"cauchy\"\n[kernel]\nkind = \"hmc\"\n");
  expect_config_error("[target]\nkind = \"gaussian\"\n[kernel]\nkind = \"nuts\"\n");
  expect_config_error("[target]\nkind = \"gaussian\"\n[kernel]\nkind = \"hmc\"\n[tuning]\nnum_steps = 5\n");
  expect_config_error("[target]\nkind = \"gaussian\"\n[kernel]\nkind = \"hmc\"\n[tuning]\nstep_size = -1\nnum_steps = 5\n");
  expect_config_error("[target]\nkind = \"gaussian\"\ndim = 2\n[kernel]\nkind = \"ideal-hmc\"\n[tuning]\ntrajectory_time = 1\n");
  expect_config_error("[target]\nkind = \"logistic\"\n[kernel]\nkind = \"hmc\"\n[tuning]\nstep_size = 0.1\nnum_steps = 5\n");
  expect_config_error("[target]\nkind = \"gaussian\"\n[kernel]\nkind = \"rwm\"\n[tuning]\nproposal_scale = 1\n"
                      "[[runs]]\nlabel = \"a\"\n[[runs]]\nlabel = \"a\"\n");
  expect_config_error("[target]\nkind = \"gaussian\"\n[kernel]\nkind = \"mala\"\n[tuning]\nmode = \"auto\"\nwarmup = 5000\n");
  expect_config_error("[target]\nkind = \"gaussian\"\n[kernel]\nkind = \"hmc\"\n[tuning]\nmode = \"auto\"\nwarmup = 10\n");
  expect_config_error("iterations = 0\n[target]\nkind = \"gaussian\"\n[kernel]\nkind = \"rwm\"\n[tuning]\nproposal_scale = 1\n");
}

TEST_CASE("typos and syntax errors are reported") {
  const std::string typo = expect_config_error(std::string(kSmallConfig) + "stepsize = 0.1\n");
  CHECK(typo.find("stepsize") != std::string::npos);
  const std::string syntax = expect_config_error("[target\nkind = \"gaussian\"\n");
  CHECK(syntax.find("line 1") != std::string::npos);
}

TEST_CASE("dataset paths resolve against the config directory") {
  const ExperimentConfig cfg = load_config(resolve_config_path("pima_two_stage"));
  CHECK(std::filesystem::exists(cfg.target.dataset));
  CHECK(cfg.tuning.mode == TuningMode::automatic);
  CHECK(*cfg.tuning.parameters.num_steps == 20);
}

TEST_CASE("float formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("a single run writes samples, summary and meta") {
  TempDir dir;
  const ExperimentConfig cfg = parse_config(kSmallConfig);
  RunOptions options;
  options.out_dir = dir.path() / "out";
  const ExperimentResult result = run_experiment(cfg, options);
  CHECK(result.success);
  REQUIRE(result.runs.size() == 1);
  const auto out = dir.path() / "out";
  for (const char* file : {"samples.csv", "summary.csv", "acf.csv", "density.csv", "runs.csv", "meta.json"}) {
    CHECK(std::filesystem::exists(out / file));
  }
  const std::string samples = testing::read_file(out / "samples.csv");
  CHECK(samples.rfind("x0,x1\n", 0) == 0);
  CHECK(std::count(samples.begin(), samples.end(), '\n') == 1501);

  const auto meta = nlohmann::json::parse(testing::read_file(out / "meta.json"));
  CHECK(meta["seed"] == 7);
  CHECK(meta["config"]["name"] == "small");
  CHECK(meta["runs"][0]["iterations"] == 1500);
  CHECK(meta["runs"][0]["acceptance"].get<double>() == result.runs[0].chain.acceptance_rate());
  CHECK(meta.contains("wall_seconds"));
}

TEST_CASE("same seed gives identical bytes, other seeds differ") {
  TempDir dir;
  const ExperimentConfig cfg = parse_config(kVariantConfig);
  RunOptions a;
  a.out_dir = dir.path() / "a";
  RunOptions b;
  b.out_dir = dir.path() / "b";
  RunOptions c;
  c.out_dir = dir.path() / "c";
  c.seed = 4;
  run_experiment(cfg, a);
  run_experiment(cfg, b);
  run_experiment(cfg, c);
  for (const char* run : {"narrow", "wide"}) {
    for (const char* file : {"samples.csv", "summary.csv", "acf.csv", "density.csv"}) {
      CHECK(testing::read_file(dir.path() / "a" / run / file) == testing::read_file(dir.path() / "b" / run / file));
    }
    CHECK(testing::read_file(dir.path() / "a" / run / "samples.csv") !=
          testing::read_file(dir.path() / "c" / run / "samples.csv"));
  }
  CHECK(testing::read_file(dir.path() / "a" / "runs.csv") == testing::read_file(dir.path() / "b" / "runs.csv"));
}

TEST_CASE("variants run on their own streams") {
  const ExperimentConfig cfg = parse_config(kVariantConfig);
  RunOptions options;
  options.write_outputs = false;
  const ExperimentResult result = run_experiment(cfg, options);
  REQUIRE(result.runs.size() == 2);
  CHECK(result.runs[0].chain.seed == Rng::stream(3, 0).seed());
  CHECK(result.runs[1].chain.seed == Rng::stream(3, 1).seed());
  CHECK(result.runs[0].chain.acceptance_rate() > result.runs[1].chain.acceptance_rate());
}

TEST_CASE("output directory precedence") {
  ExperimentConfig cfg = parse_config(kSmallConfig);
  ::unsetenv("SAMPLER_OUT");
  CHECK(output_directory(cfg) == std::filesystem::path("out") / "small");
  ::setenv("SAMPLER_OUT", "/tmp/sampler-root", 1);
  CHECK(output_directory(cfg) == std::filesystem::path("/tmp/sampler-root") / "small");
  cfg.output.directory = "/tmp/from-config";
  CHECK(output_directory(cfg) == std::filesystem::path("/tmp/from-config"));
  RunOptions options;
  options.out_dir = "/tmp/from-flag";
  CHECK(output_directory(cfg, options) == std::filesystem::path("/tmp/from-flag"));
  ::unsetenv("SAMPLER_OUT");
}

TEST_CASE("leapfrog path and trajectory suggestion outputs") {
  TempDir dir;
  ExperimentConfig cfg = load_config(resolve_config_path("gaussian_period"));
  cfg.iterations = 500;
  RunOptions options;
  options.out_dir = dir.path();
  const ExperimentResult result = run_experiment(cfg, options);
  REQUIRE(result.runs.size() == 3);
  for (const auto& r : result.runs) {
    REQUIRE(r.suggestion.has_value());
    CHECK(std::abs(r.suggestion->num_steps - 31) <= 3);
  }
  const std::string path = testing::read_file(dir.path() / "half_L31" / "trajectory.csv");
  CHECK(path.rfind("step,time,x0,p0,hamiltonian\n", 0) == 0);
  CHECK(std::count(path.begin(), path.end(), '\n') == 33);
}

TEST_CASE("command line interface") {
  TempDir dir;
  const auto config = dir.write("small.toml", kSmallConfig);
  const auto log = dir.path() / "log.txt";

  CHECK(run_cli("list", log) == 0);
  CHECK(testing::read_file(log).find("pima_two_stage") != std::string::npos);

  CHECK(run_cli("validate " + config.string(), log) == 0);
  CHECK(run_cli("validate no_such_experiment", log) == 2);
  CHECK(testing::read_file(log).find("table1") != std::string::npos);

  const auto bad = dir.write("bad.toml", std::string(kSmallConfig) + "[extra]\n");
  CHECK(run_cli("validate " + bad.string(), log) == 2);
  CHECK(run_cli("run " + bad.string(), log) == 2);

  CHECK(run_cli("run " + config.string() + " --out " + (dir.path() / "r1").string(), log) == 0);
  CHECK(run_cli("run " + config.string() + " --out " + (dir.path() / "r2").string(), log) == 0);
  CHECK(run_cli("run " + config.string() + " --seed 99 --out " + (dir.path() / "r3").string(), log) == 0);
  const std::string s1 = testing::read_file(dir.path() / "r1" / "samples.csv");
  CHECK_FALSE(s1.empty());
  CHECK(s1 == testing::read_file(dir.path() / "r2" / "samples.csv"));
  CHECK(s1 != testing::read_file(dir.path() / "r3" / "samples.csv"));
  const auto meta = nlohmann::json::parse(testing::read_file(dir.path() / "r3" / "meta.json"));
  CHECK(meta["seed"] == 99);

  CHECK(run_cli("check-gradient gaussian", log) == 0);
  CHECK(run_cli("check-gradient pima", log) == 0);
  CHECK(run_cli("bogus", log) != 0);
}
