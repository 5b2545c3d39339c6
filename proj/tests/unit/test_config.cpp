#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "spdelab/config.hpp"
#include "spdelab/error.hpp"

using namespace spdelab;

namespace {

const char* kMinimal = R"(
[model]
theta0 = 1.0
beta = 0.6
gamma = 0.6
sigma = 1.0
dimension = 1

[grid]
N = 20
M = 10000
T = 5.0
)";

std::string with_model(const std::string& model_lines, const std::string& rest = "") {
  return "[model]\n" + model_lines + "\n[grid]\nN = 4\nM = 10\nT = 1\n" + rest;
}

}  // namespace

TEST_CASE("minimal config gets documented defaults") {
  const auto cli = parse_config_string(kMinimal);
  const auto& c = cli.experiment;
  CHECK(c.oversample == 8);
  CHECK(c.replications == 100);
  CHECK(c.estimator == EstimatorSelection::Discrete);
  CHECK(c.kind == ExperimentKind::Normality);
  CHECK(c.numerator == NumeratorMode::ItoIdentity);
  REQUIRE(c.sweep.size() == 1);
  CHECK(c.sweep[0] == SweepPoint{20, 10000, 5.0});
  CHECK(cli.warnings.empty());
}

TEST_CASE("full config parses every key") {
  const auto cli = parse_config_string(R"(
# comment line
[model]
theta0 = 2.5   # trailing comment
beta = 1
gamma = 2
sigma = 0.5
dimension = 2
initial_modes = [1.0, -0.5]

[grid]
sweep = [[10, 100, 1.0], [20, 400, 2.0]]
oversample = 4

[experiment]
id = "run_1"
kind = "consistency"
replications = 50
seed = 99
replication = 3
estimator = "both"
numerator = "fine_riemann"
decomposition = true
threads = 2
memory_budget_mb = 64

[output]
dir = "results"
)");
  const auto& c = cli.experiment;
  CHECK(c.model.theta0 == 2.5);
  CHECK(c.model.dimension == 2);
  CHECK(c.model.initial_modes == std::vector<double>{1.0, -0.5});
  CHECK(c.sweep.size() == 2);
  CHECK(c.sweep[1] == SweepPoint{20, 400, 2.0});
  CHECK(c.oversample == 4);
  CHECK(c.id == "run_1");
  CHECK(c.kind == ExperimentKind::Consistency);
  CHECK(c.replications == 50);
  CHECK(c.master_seed == 99);
  CHECK(cli.replication == 3);
  CHECK(c.estimator == EstimatorSelection::Both);
  CHECK(c.numerator == NumeratorMode::FineRiemann);
  CHECK(c.decomposition);
  CHECK(c.threads == 2);
  CHECK(c.memory_budget_bytes == std::size_t{64} << 20);
  CHECK(c.output_dir == "results");
}

TEST_CASE("m ladder expands into a rate sweep") {
  const auto cli = parse_config_string(R"(
[model]
theta0 = 1
beta = 0.6
gamma = 0.6
sigma = 1
dimension = 1
[grid]
N = 10
T = 2
m_ladder = [16, 32, 64, 128]
fine_steps = 1024
[experiment]
kind = "rates"
)");
  const auto& c = cli.experiment;
  REQUIRE(c.sweep.size() == 4);
  CHECK(c.sweep[2] == SweepPoint{10, 64, 2.0});
  CHECK(c.rate_fine_steps() == 1024);
}

TEST_CASE("validation errors name the field") {
  CHECK_THROWS_WITH_AS(parse_config_string(with_model("theta0 = -1\nbeta = 0.6\ngamma = 0.6\nsigma = 1\ndimension = 1")),
                       doctest::Contains("model.theta0"), Error);
  CHECK_THROWS_WITH_AS(parse_config_string(with_model("beta = 0.6\ngamma = 0.6\nsigma = 1\ndimension = 1")),
                       doctest::Contains("model.theta0"), Error);
  CHECK_THROWS_WITH_AS(parse_config_string(with_model("theta0 = 1\nbeta = 0.6\ngamma = 0.6\nsigma = 1\ndimension = 1.5")),
                       doctest::Contains("model.dimension"), Error);
}

TEST_CASE("hypothesis violations are warnings") {
  const auto cli = parse_config_string(with_model("theta0 = 1\nbeta = 0.4\ngamma = 0.6\nsigma = 1\ndimension = 1"));
  REQUIRE(cli.warnings.size() == 1);
  CHECK(cli.warnings[0].find("beta > 1/2") != std::string::npos);
}

TEST_CASE("unknown keys and sections are rejected with their path") {
  const std::string model = "theta0 = 1\nbeta = 0.6\ngamma = 0.6\nsigma = 1\ndimension = 1";
  CHECK_THROWS_WITH_AS(parse_config_string(with_model(model + "\nthetta = 2")),
                       doctest::Contains("model.thetta"), Error);
  CHECK_THROWS_WITH_AS(parse_config_string(with_model(model, "[extra]\nx = 1\n")),
                       doctest::Contains("extra"), Error);
}

TEST_CASE("parse errors carry line numbers") {
  try {
    parse_config_string("[model]\ntheta0 = 1\nthis line is broken\n", {}, "c.toml");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("c.toml:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_string("[model]\ntheta0 = [1, 2\n"), Error);
  CHECK_THROWS_AS(parse_config_string("[model]\nid = \"open\n"), Error);
}

TEST_CASE("missing file is an io error") {
  try {
    parse_config("/nonexistent/spdelab.toml");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("overrides take precedence over file values") {
  const std::string text =
      std::string(kMinimal) + "[experiment]\nseed = 1\nthreads = 2\nkind = \"normality\"\n[output]\ndir = \"from_file\"\n";
  ConfigOverrides o;
  o.seed = 7;
  o.threads = 8;
  o.output_dir = "from_cli";
  o.kind = ExperimentKind::Consistency;
  const auto cli = parse_config_string(text, o);
  CHECK(cli.experiment.master_seed == 7);
  CHECK(cli.experiment.threads == 8);
  CHECK(cli.experiment.output_dir == "from_cli");
  CHECK(cli.experiment.kind == ExperimentKind::Consistency);
  const auto plain = parse_config_string(text);
  CHECK(plain.experiment.master_seed == 1);
  CHECK(plain.experiment.output_dir == "from_file");
}

TEST_CASE("environment variable sets the default output directory") {
  ::setenv(kOutputDirEnv, "from_env", 1);
  CHECK(parse_config_string(kMinimal).experiment.output_dir == "from_env");
  ::unsetenv(kOutputDirEnv);
  CHECK(parse_config_string(kMinimal).experiment.output_dir == "spdelab_out");
}

TEST_CASE("config files load from disk") {
  const auto path = std::filesystem::temp_directory_path() / "spdelab_config_test.toml";
  { std::ofstream(path) << kMinimal; }
  CHECK(parse_config(path).experiment.sweep.size() == 1);
  std::filesystem::remove(path);
}
