#include "spdelab/spdelab.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "spdelab/config.hpp"
#include "spdelab/error.hpp"
#include "spdelab/estimators.hpp"
#include "spdelab/experiments.hpp"
#include "spdelab/simulator.hpp"
#include "spdelab/spectral_model.hpp"

struct spdelab_eigs {
  spdelab::EigenSequence value;
};
struct spdelab_ensemble {
  spdelab::PathEnsemble value;
};
struct spdelab_observations {
  spdelab::ObservationMatrix value;
};
struct spdelab_config {
  spdelab::CliConfig value;
};
struct spdelab_report {
  std::string summary_json;
  std::string records_path;
  std::string summary_path;
};

namespace {

thread_local std::string g_last_error;

spdelab_status to_status(spdelab::ErrorCode code) {
  using spdelab::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return SPDELAB_E_INVALID_ARGUMENT;
    case ErrorCode::Unsupported: return SPDELAB_E_UNSUPPORTED;
    case ErrorCode::ZeroDenominator: return SPDELAB_E_ZERO_DENOMINATOR;
    case ErrorCode::MissingProvenance: return SPDELAB_E_MISSING_PROVENANCE;
    case ErrorCode::Parse: return SPDELAB_E_PARSE;
    case ErrorCode::Io: return SPDELAB_E_IO;
    case ErrorCode::Runtime: return SPDELAB_E_RUNTIME;
  }
  return SPDELAB_E_RUNTIME;
}

template <typename Fn>
spdelab_status guard(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SPDELAB_OK;
  } catch (const spdelab::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SPDELAB_E_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPDELAB_E_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return SPDELAB_E_RUNTIME;
  }
}

void require(const void* p, const char* name) {
  if (!p) spdelab::fail(spdelab::ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

spdelab::ModelParams to_model(const spdelab_model* m) {
  require(m, "model");
  spdelab::ModelParams p;
  p.theta0 = m->theta0;
  p.beta = m->beta;
  p.gamma = m->gamma;
  p.sigma = m->sigma;
  p.dimension = m->dimension;
  if (m->initial_mode_count > 0) {
    require(m->initial_modes, "model->initial_modes");
    p.initial_modes.assign(m->initial_modes, m->initial_modes + m->initial_mode_count);
  }
  p.validate();
  return p;
}

void fill(const spdelab::EstimateRecord& r, spdelab_estimate* out) {
  out->theta_hat = r.theta_hat;
  out->z_score = r.z_score;
  out->theoretical_std = r.theoretical_std;
  out->modes = r.modes;
  out->observations = r.observations;
  out->horizon = r.horizon;
}

spdelab::ConfigOverrides to_overrides(const spdelab_overrides* o) {
  spdelab::ConfigOverrides out;
  if (!o) return out;
  if (o->has_seed) out.seed = o->seed;
  if (o->has_threads) out.threads = o->threads;
  if (o->output_dir) out.output_dir = o->output_dir;
  if (o->kind) {
    const auto kind = spdelab::parse_experiment_kind(o->kind);
    if (!kind) {
      spdelab::fail(spdelab::ErrorCode::InvalidArgument,
                    std::string("unknown experiment kind '") + o->kind + "'");
    }
    out.kind = kind;
  }
  return out;
}

}  // namespace

extern "C" {

const char* spdelab_version(void) { return "0.1.0"; }

const char* spdelab_last_error(void) { return g_last_error.c_str(); }

const char* spdelab_status_name(spdelab_status status) {
  switch (status) {
    case SPDELAB_OK: return "OK";
    case SPDELAB_E_INVALID_ARGUMENT: return "InvalidArgument";
    case SPDELAB_E_UNSUPPORTED: return "Unsupported";
    case SPDELAB_E_ZERO_DENOMINATOR: return "ZeroDenominator";
    case SPDELAB_E_MISSING_PROVENANCE: return "MissingProvenance";
    case SPDELAB_E_PARSE: return "ParseError";
    case SPDELAB_E_IO: return "IoError";
    case SPDELAB_E_RUNTIME: return "RuntimeError";
  }
  return "Unknown";
}

spdelab_status spdelab_model_validate(const spdelab_model* model, char* buffer,
                                      size_t buffer_size) {
  return guard([&] {
    const auto warnings = to_model(model).validate();
    std::string text;
    for (const auto& w : warnings) text += w + "\n";
    if (buffer && buffer_size > 0) {
      const size_t n = std::min(text.size(), buffer_size - 1);
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
  });
}

spdelab_status spdelab_eigs_create(int dimension, size_t count, spdelab_eigs** out) {
  return guard([&] {
    require(out, "out");
    *out = new spdelab_eigs{spdelab::build_eigensequence(dimension, count)};
  });
}

void spdelab_eigs_destroy(spdelab_eigs* eigs) { delete eigs; }

size_t spdelab_eigs_size(const spdelab_eigs* eigs) { return eigs ? eigs->value.size() : 0; }

spdelab_status spdelab_eigs_values(const spdelab_eigs* eigs, double* out, size_t count) {
  return guard([&] {
    require(eigs, "eigs");
    require(out, "out");
    if (count > eigs->value.size()) {
      spdelab::fail(spdelab::ErrorCode::InvalidArgument, "count exceeds the eigensequence length");
    }
    std::copy_n(eigs->value.lambdas.begin(), count, out);
  });
}

double spdelab_eigs_varpi(const spdelab_eigs* eigs) { return eigs ? eigs->value.varpi : 0.0; }

spdelab_status spdelab_weyl_constant(int dimension, double* out) {
  return guard([&] {
    require(out, "out");
    *out = spdelab::weyl_constant(dimension);
  });
}

spdelab_status spdelab_fisher_information(const spdelab_model* model, const spdelab_eigs* eigs,
                                          size_t modes, double horizon, double* out) {
  return guard([&] {
    require(eigs, "eigs");
    require(out, "out");
    *out = spdelab::fisher_information(to_model(model), eigs->value, modes, horizon);
  });
}

spdelab_status spdelab_simulate(const spdelab_model* model, const spdelab_eigs* eigs,
                                const spdelab_grid* grid, size_t modes, uint64_t master_seed,
                                uint64_t replication, spdelab_ensemble** out) {
  return guard([&] {
    require(eigs, "eigs");
    require(grid, "grid");
    require(out, "out");
    const spdelab::SimGrid g{grid->horizon, grid->observations, grid->oversample};
    *out = new spdelab_ensemble{
        spdelab::simulate_ensemble(to_model(model), eigs->value, g, modes, master_seed, replication)};
  });
}

void spdelab_ensemble_destroy(spdelab_ensemble* ensemble) { delete ensemble; }

spdelab_status spdelab_ensemble_observations(const spdelab_ensemble* ensemble,
                                             spdelab_observations** out) {
  return guard([&] {
    require(ensemble, "ensemble");
    require(out, "out");
    *out = new spdelab_observations{spdelab::subsample(ensemble->value)};
  });
}

void spdelab_observations_destroy(spdelab_observations* obs) { delete obs; }

spdelab_status spdelab_observations_shape(const spdelab_observations* obs, size_t* modes,
                                          size_t* observations, double* horizon) {
  return guard([&] {
    require(obs, "obs");
    if (modes) *modes = obs->value.modes;
    if (observations) *observations = obs->value.observations;
    if (horizon) *horizon = obs->value.horizon;
  });
}

spdelab_status spdelab_observations_values(const spdelab_observations* obs, double* out,
                                           size_t count) {
  return guard([&] {
    require(obs, "obs");
    require(out, "out");
    if (count != obs->value.values.size()) {
      spdelab::fail(spdelab::ErrorCode::InvalidArgument, "count must equal N * (M + 1)");
    }
    std::copy(obs->value.values.begin(), obs->value.values.end(), out);
  });
}

spdelab_status spdelab_observations_write(const spdelab_observations* obs, const char* path) {
  return guard([&] {
    require(obs, "obs");
    require(path, "path");
    spdelab::write_observations(obs->value, path);
  });
}

spdelab_status spdelab_observations_read(const char* path, spdelab_observations** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new spdelab_observations{spdelab::read_observations(path)};
  });
}

spdelab_status spdelab_estimate_discrete(const spdelab_observations* obs,
                                         const spdelab_model* model, const spdelab_eigs* eigs,
                                         spdelab_estimate* out) {
  return guard([&] {
    require(obs, "obs");
    require(eigs, "eigs");
    require(out, "out");
    fill(spdelab::mle_discrete(obs->value, to_model(model), eigs->value), out);
  });
}

spdelab_status spdelab_estimate_continuous(const spdelab_ensemble* ensemble,
                                           const spdelab_model* model, const spdelab_eigs* eigs,
                                           spdelab_numerator numerator, spdelab_estimate* out) {
  return guard([&] {
    require(ensemble, "ensemble");
    require(eigs, "eigs");
    require(out, "out");
    const auto mode = numerator == SPDELAB_NUMERATOR_FINE_RIEMANN
                          ? spdelab::NumeratorMode::FineRiemann
                          : spdelab::NumeratorMode::ItoIdentity;
    fill(spdelab::mle_continuous(ensemble->value, to_model(model), eigs->value, mode), out);
  });
}

spdelab_status spdelab_decomposition_terms(const spdelab_ensemble* ensemble,
                                           const spdelab_model* model, const spdelab_eigs* eigs,
                                           spdelab_terms* out) {
  return guard([&] {
    require(ensemble, "ensemble");
    require(eigs, "eigs");
    require(out, "out");
    const auto t = spdelab::decomposition_terms(ensemble->value, to_model(model), eigs->value);
    *out = {t.y_coarse, t.y_fine, t.i_coarse, t.i_fine, t.v};
  });
}

spdelab_status spdelab_config_load(const char* path, const spdelab_overrides* overrides,
                                   spdelab_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new spdelab_config{spdelab::parse_config(path, to_overrides(overrides))};
  });
}

spdelab_status spdelab_config_parse(const char* text, const spdelab_overrides* overrides,
                                    spdelab_config** out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    *out = new spdelab_config{spdelab::parse_config_string(text, to_overrides(overrides))};
  });
}

void spdelab_config_destroy(spdelab_config* config) { delete config; }

size_t spdelab_config_warning_count(const spdelab_config* config) {
  return config ? config->value.warnings.size() : 0;
}

const char* spdelab_config_warning(const spdelab_config* config, size_t index) {
  if (!config || index >= config->value.warnings.size()) return nullptr;
  return config->value.warnings[index].c_str();
}

spdelab_status spdelab_config_model(const spdelab_config* config, spdelab_model* out) {
  return guard([&] {
    require(config, "config");
    require(out, "out");
    const auto& m = config->value.experiment.model;
    *out = {m.theta0, m.beta, m.gamma, m.sigma, m.dimension,
            m.initial_modes.empty() ? nullptr : m.initial_modes.data(), m.initial_modes.size()};
  });
}

spdelab_status spdelab_config_point(const spdelab_config* config, size_t* modes,
                                    spdelab_grid* grid) {
  return guard([&] {
    require(config, "config");
    const auto& cfg = config->value.experiment;
    if (cfg.sweep.empty()) spdelab::fail(spdelab::ErrorCode::InvalidArgument, "config has no sweep point");
    const auto& p = cfg.sweep.front();
    if (modes) *modes = p.modes;
    if (grid) *grid = {p.horizon, p.observations, cfg.oversample};
  });
}

uint64_t spdelab_config_seed(const spdelab_config* config) {
  return config ? config->value.experiment.master_seed : 0;
}

uint64_t spdelab_config_replication(const spdelab_config* config) {
  return config ? config->value.replication : 0;
}

const char* spdelab_config_output_dir(const spdelab_config* config) {
  static thread_local std::string dir;
  dir = config ? config->value.experiment.output_dir.string() : std::string();
  return dir.c_str();
}

const char* spdelab_config_id(const spdelab_config* config) {
  return config ? config->value.experiment.id.c_str() : "";
}

spdelab_status spdelab_experiment_run(const spdelab_config* config, spdelab_report** out) {
  return guard([&] {
    require(config, "config");
    require(out, "out");
    const auto& cfg = config->value.experiment;
    const auto result = spdelab::run_experiment(cfg);
    const auto files = spdelab::write_outputs(result.records, result.summary, cfg.output_dir);
    *out = new spdelab_report{spdelab::summary_to_json(result.summary), files.records_csv.string(),
                              files.summary_json.string()};
  });
}

void spdelab_report_destroy(spdelab_report* report) { delete report; }

const char* spdelab_report_summary_json(const spdelab_report* report) {
  return report ? report->summary_json.c_str() : "";
}

const char* spdelab_report_records_path(const spdelab_report* report) {
  return report ? report->records_path.c_str() : "";
}

const char* spdelab_report_summary_path(const spdelab_report* report) {
  return report ? report->summary_path.c_str() : "";
}

}  // extern "C"
