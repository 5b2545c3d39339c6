#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdelab/spdelab.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Deleter {
  void operator()(spdelab_eigs* p) const { spdelab_eigs_destroy(p); }
  void operator()(spdelab_ensemble* p) const { spdelab_ensemble_destroy(p); }
  void operator()(spdelab_observations* p) const { spdelab_observations_destroy(p); }
  void operator()(spdelab_config* p) const { spdelab_config_destroy(p); }
  void operator()(spdelab_report* p) const { spdelab_report_destroy(p); }
};
template <typename T>
using Handle = std::unique_ptr<T, Deleter>;

class Failure {
 public:
  Failure(spdelab_status status, int exit_code) : status_(status), exit_code_(exit_code) {}
  spdelab_status status() const { return status_; }
  int exit_code() const { return exit_code_; }

 private:
  spdelab_status status_;
  int exit_code_;
};

int exit_code_for(spdelab_status status) {
  switch (status) {
    case SPDELAB_OK: return kExitOk;
    case SPDELAB_E_INVALID_ARGUMENT:
    case SPDELAB_E_UNSUPPORTED:
    case SPDELAB_E_PARSE: return kExitValidation;
    default: return kExitRuntime;
  }
}

void check(spdelab_status status) {
  if (status != SPDELAB_OK) throw Failure(status, exit_code_for(status));
}

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Experiment config file")->required();
  cmd->add_option("--seed", flags.seed, "Override the master seed");
  cmd->add_option("--threads", flags.threads, "Override the worker thread count");
  cmd->add_option("--out", flags.out_dir, "Override the output directory");
}

Handle<spdelab_config> load_config(const CommonFlags& flags, const char* kind = nullptr) {
  spdelab_overrides o{};
  if (flags.seed) {
    o.has_seed = 1;
    o.seed = *flags.seed;
  }
  if (flags.threads) {
    o.has_threads = 1;
    o.threads = *flags.threads;
  }
  o.output_dir = flags.out_dir.empty() ? nullptr : flags.out_dir.c_str();
  o.kind = kind;
  spdelab_config* raw = nullptr;
  const auto status = spdelab_config_load(flags.config_path.c_str(), &o, &raw);
  // Any failure before compute starts is a configuration error.
  if (status != SPDELAB_OK) throw Failure(status, kExitValidation);
  Handle<spdelab_config> config(raw);
  for (size_t i = 0; i < spdelab_config_warning_count(config.get()); ++i) {
    std::fprintf(stderr, "warning: %s\n", spdelab_config_warning(config.get(), i));
  }
  return config;
}

Handle<spdelab_eigs> make_eigs(int dimension, size_t count) {
  spdelab_eigs* raw = nullptr;
  check(spdelab_eigs_create(dimension, count, &raw));
  return Handle<spdelab_eigs>(raw);
}

std::filesystem::path confined_path(const std::string& dir, const std::string& name) {
  const std::filesystem::path file(name);
  if (name.empty() || file.has_parent_path() || file.is_absolute() || name == "." ||
      name == "..") {
    std::fprintf(stderr, "error: dump name '%s' must be a plain file name\n", name.c_str());
    throw Failure(SPDELAB_E_INVALID_ARGUMENT, kExitValidation);
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create output directory '%s': %s\n", dir.c_str(),
                 ec.message().c_str());
    throw Failure(SPDELAB_E_IO, kExitRuntime);
  }
  return std::filesystem::path(dir) / file;
}

void print_estimate(const char* label, const spdelab_estimate& e) {
  std::printf("%s = %.10g  z = %.6f  (N=%zu M=%zu T=%g, sd=%.6g)\n", label, e.theta_hat,
              e.z_score, e.modes, e.observations, e.horizon, e.theoretical_std);
}

int run_eigs(int dimension, size_t count) {
  const auto eigs = make_eigs(dimension, count);
  std::vector<double> values(count);
  check(spdelab_eigs_values(eigs.get(), values.data(), count));
  for (size_t k = 0; k < count; ++k) {
    std::printf("%s%.5f", k ? " " : "", values[k]);
  }
  std::printf("\n");
  const double varpi = spdelab_eigs_varpi(eigs.get());
  const double last = values.back();
  const double ratio =
      last * last * std::pow(static_cast<double>(count), -2.0 / dimension) / varpi;
  std::printf("weyl ratio lambda_N^2 N^(-2/d) / varpi = %.6f (varpi = %.6f)\n", ratio, varpi);
  return kExitOk;
}

struct Simulated {
  spdelab_model model{};
  Handle<spdelab_eigs> eigs;
  Handle<spdelab_ensemble> ensemble;
};

Simulated simulate_from(const spdelab_config* config) {
  Simulated s;
  check(spdelab_config_model(config, &s.model));
  size_t modes = 0;
  spdelab_grid grid{};
  check(spdelab_config_point(config, &modes, &grid));
  s.eigs = make_eigs(s.model.dimension, modes);
  spdelab_ensemble* raw = nullptr;
  check(spdelab_simulate(&s.model, s.eigs.get(), &grid, modes, spdelab_config_seed(config),
                         spdelab_config_replication(config), &raw));
  s.ensemble.reset(raw);
  return s;
}

Handle<spdelab_observations> observations_of(const spdelab_ensemble* ensemble) {
  spdelab_observations* raw = nullptr;
  check(spdelab_ensemble_observations(ensemble, &raw));
  return Handle<spdelab_observations>(raw);
}

int run_simulate(const CommonFlags& flags, const std::string& dump_name) {
  const auto config = load_config(flags);
  const auto sim = simulate_from(config.get());
  const auto obs = observations_of(sim.ensemble.get());
  const std::string name =
      dump_name.empty() ? std::string(spdelab_config_id(config.get())) + "_observations.bin"
                        : dump_name;
  const auto path = confined_path(spdelab_config_output_dir(config.get()), name);
  check(spdelab_observations_write(obs.get(), path.string().c_str()));
  size_t n = 0, m = 0;
  double t = 0.0;
  check(spdelab_observations_shape(obs.get(), &n, &m, &t));
  std::printf("wrote %s (N=%zu M=%zu T=%g)\n", path.string().c_str(), n, m, t);
  return kExitOk;
}

int run_estimate(const CommonFlags& flags, const std::string& dump_path) {
  const auto config = load_config(flags);
  if (!dump_path.empty()) {
    spdelab_model model{};
    check(spdelab_config_model(config.get(), &model));
    spdelab_observations* raw = nullptr;
    check(spdelab_observations_read(dump_path.c_str(), &raw));
    const Handle<spdelab_observations> obs(raw);
    size_t n = 0;
    check(spdelab_observations_shape(obs.get(), &n, nullptr, nullptr));
    const auto eigs = make_eigs(model.dimension, n);
    spdelab_estimate est{};
    check(spdelab_estimate_discrete(obs.get(), &model, eigs.get(), &est));
    print_estimate("theta_tilde", est);
    return kExitOk;
  }
  const auto sim = simulate_from(config.get());
  const auto obs = observations_of(sim.ensemble.get());
  spdelab_estimate discrete{};
  check(spdelab_estimate_discrete(obs.get(), &sim.model, sim.eigs.get(), &discrete));
  spdelab_estimate continuous{};
  check(spdelab_estimate_continuous(sim.ensemble.get(), &sim.model, sim.eigs.get(),
                                    SPDELAB_NUMERATOR_ITO_IDENTITY, &continuous));
  print_estimate("theta_tilde", discrete);
  print_estimate("theta_hat  ", continuous);
  return kExitOk;
}

int run_experiment(const CommonFlags& flags, const std::string& kind) {
  const auto config = load_config(flags, kind.c_str());
  spdelab_report* raw = nullptr;
  check(spdelab_experiment_run(config.get(), &raw));
  const Handle<spdelab_report> report(raw);
  std::printf("%s\n", spdelab_report_summary_json(report.get()));
  std::fprintf(stderr, "records: %s\nsummary: %s\n", spdelab_report_records_path(report.get()),
               spdelab_report_summary_path(report.get()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spdelab: drift estimation for fractional stochastic heat equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spdelab_version()));

  int dimension = 1;
  size_t count = 10;
  auto* eigs_cmd = app.add_subcommand("eigs", "Print Dirichlet Laplacian eigenvalues");
  eigs_cmd->add_option("--dim", dimension, "Spatial dimension (1-4)")->required();
  eigs_cmd->add_option("--count", count, "Number of eigenvalues")->required()->check(
      CLI::PositiveNumber);

  CommonFlags sim_flags;
  std::string dump_name;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate and dump an observation matrix");
  add_common(sim_cmd, sim_flags);
  sim_cmd->add_option("--dump", dump_name, "Dump file name inside the output directory");

  CommonFlags est_flags;
  std::string dump_path;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate the drift from a dump or a fresh run");
  add_common(est_cmd, est_flags);
  est_cmd->add_option("--dump", dump_path, "Observation dump to read");

  CommonFlags exp_flags;
  std::string kind;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte Carlo study");
  exp_cmd->add_option("kind", kind,
                      "normality, consistency, consistency_fixed_MT, rates or fisher")
      ->required();
  add_common(exp_cmd, exp_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*eigs_cmd) return run_eigs(dimension, count);
    if (*sim_cmd) return run_simulate(sim_flags, dump_name);
    if (*est_cmd) return run_estimate(est_flags, dump_path);
    if (*exp_cmd) return run_experiment(exp_flags, kind);
  } catch (const Failure& f) {
    if (f.status() != SPDELAB_OK && *spdelab_last_error()) {
      std::fprintf(stderr, "error (%s): %s\n", spdelab_status_name(f.status()),
                   spdelab_last_error());
    }
    return f.exit_code();
  }
  return kExitValidation;
}
