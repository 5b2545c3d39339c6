/* C interface to the spdelab drift-estimation library.
 *
 * All functions return an spdelab_status. On failure the message for the
 * calling thread is available from spdelab_last_error() until the next call
 * on that thread. Handles are opaque and owned by the caller; release them
 * with the matching *_destroy function (NULL is accepted).
 */
#ifndef SPDELAB_SPDELAB_H_
#define SPDELAB_SPDELAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPDELAB_BUILDING_LIBRARY)
#    define SPDELAB_API __declspec(dllexport)
#  else
#    define SPDELAB_API __declspec(dllimport)
#  endif
#else
#  define SPDELAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spdelab_status {
  SPDELAB_OK = 0,
  SPDELAB_E_INVALID_ARGUMENT = 1,
  SPDELAB_E_UNSUPPORTED = 2,
  SPDELAB_E_ZERO_DENOMINATOR = 3,
  SPDELAB_E_MISSING_PROVENANCE = 4,
  SPDELAB_E_PARSE = 5,
  SPDELAB_E_IO = 6,
  SPDELAB_E_RUNTIME = 7
} spdelab_status;

typedef struct spdelab_model {
  double theta0;
  double beta;
  double gamma;
  double sigma;
  int dimension;
  /* Optional u_k(0) values; may be NULL when count is 0. */
  const double* initial_modes;
  size_t initial_mode_count;
} spdelab_model;

typedef struct spdelab_grid {
  double horizon;     /* T */
  size_t observations; /* M */
  size_t oversample;  /* fine steps per observation step */
} spdelab_grid;

typedef struct spdelab_estimate {
  double theta_hat;
  double z_score;
  double theoretical_std;
  size_t modes;
  size_t observations;
  double horizon;
} spdelab_estimate;

typedef struct spdelab_terms {
  double y_coarse;
  double y_fine;
  double i_coarse;
  double i_fine;
  double v;
} spdelab_terms;

typedef enum spdelab_numerator {
  SPDELAB_NUMERATOR_ITO_IDENTITY = 0,
  SPDELAB_NUMERATOR_FINE_RIEMANN = 1
} spdelab_numerator;

typedef struct spdelab_eigs spdelab_eigs;
typedef struct spdelab_ensemble spdelab_ensemble;
typedef struct spdelab_observations spdelab_observations;
typedef struct spdelab_config spdelab_config;
typedef struct spdelab_report spdelab_report;

SPDELAB_API const char* spdelab_version(void);
SPDELAB_API const char* spdelab_last_error(void);
SPDELAB_API const char* spdelab_status_name(spdelab_status status);

/* Model validation: warnings are written one per line into `buffer`. */
SPDELAB_API spdelab_status spdelab_model_validate(const spdelab_model* model, char* buffer,
                                                  size_t buffer_size);

/* Spectrum of the Dirichlet Laplacian on (0, pi)^d. */
SPDELAB_API spdelab_status spdelab_eigs_create(int dimension, size_t count, spdelab_eigs** out);
SPDELAB_API void spdelab_eigs_destroy(spdelab_eigs* eigs);
SPDELAB_API size_t spdelab_eigs_size(const spdelab_eigs* eigs);
SPDELAB_API spdelab_status spdelab_eigs_values(const spdelab_eigs* eigs, double* out, size_t count);
SPDELAB_API double spdelab_eigs_varpi(const spdelab_eigs* eigs);
SPDELAB_API spdelab_status spdelab_weyl_constant(int dimension, double* out);
SPDELAB_API spdelab_status spdelab_fisher_information(const spdelab_model* model,
                                                      const spdelab_eigs* eigs, size_t modes,
                                                      double horizon, double* out);

/* Exact simulation of the first `modes` Fourier modes. */
SPDELAB_API spdelab_status spdelab_simulate(const spdelab_model* model, const spdelab_eigs* eigs,
                                            const spdelab_grid* grid, size_t modes,
                                            uint64_t master_seed, uint64_t replication,
                                            spdelab_ensemble** out);
SPDELAB_API void spdelab_ensemble_destroy(spdelab_ensemble* ensemble);
SPDELAB_API spdelab_status spdelab_ensemble_observations(const spdelab_ensemble* ensemble,
                                                         spdelab_observations** out);

SPDELAB_API void spdelab_observations_destroy(spdelab_observations* obs);
SPDELAB_API spdelab_status spdelab_observations_shape(const spdelab_observations* obs,
                                                      size_t* modes, size_t* observations,
                                                      double* horizon);
/* Copies row-major N x (M + 1) values. */
SPDELAB_API spdelab_status spdelab_observations_values(const spdelab_observations* obs,
                                                       double* out, size_t count);
SPDELAB_API spdelab_status spdelab_observations_write(const spdelab_observations* obs,
                                                      const char* path);
SPDELAB_API spdelab_status spdelab_observations_read(const char* path,
                                                     spdelab_observations** out);

SPDELAB_API spdelab_status spdelab_estimate_discrete(const spdelab_observations* obs,
                                                     const spdelab_model* model,
                                                     const spdelab_eigs* eigs,
                                                     spdelab_estimate* out);
SPDELAB_API spdelab_status spdelab_estimate_continuous(const spdelab_ensemble* ensemble,
                                                       const spdelab_model* model,
                                                       const spdelab_eigs* eigs,
                                                       spdelab_numerator numerator,
                                                       spdelab_estimate* out);
SPDELAB_API spdelab_status spdelab_decomposition_terms(const spdelab_ensemble* ensemble,
                                                       const spdelab_model* model,
                                                       const spdelab_eigs* eigs,
                                                       spdelab_terms* out);

/* Configuration files. The has_* flags and non-NULL strings select overrides. */
typedef struct spdelab_overrides {
  int has_seed;
  uint64_t seed;
  int has_threads;
  unsigned threads;
  const char* output_dir; /* NULL when not set */
  const char* kind;       /* NULL when not set */
} spdelab_overrides;

SPDELAB_API spdelab_status spdelab_config_load(const char* path,
                                               const spdelab_overrides* overrides,
                                               spdelab_config** out);
SPDELAB_API spdelab_status spdelab_config_parse(const char* text,
                                                const spdelab_overrides* overrides,
                                                spdelab_config** out);
SPDELAB_API void spdelab_config_destroy(spdelab_config* config);
SPDELAB_API size_t spdelab_config_warning_count(const spdelab_config* config);
SPDELAB_API const char* spdelab_config_warning(const spdelab_config* config, size_t index);
SPDELAB_API spdelab_status spdelab_config_model(const spdelab_config* config, spdelab_model* out);
/* First sweep point as (N, grid). */
SPDELAB_API spdelab_status spdelab_config_point(const spdelab_config* config, size_t* modes,
                                                spdelab_grid* grid);
SPDELAB_API uint64_t spdelab_config_seed(const spdelab_config* config);
SPDELAB_API uint64_t spdelab_config_replication(const spdelab_config* config);
SPDELAB_API const char* spdelab_config_output_dir(const spdelab_config* config);
SPDELAB_API const char* spdelab_config_id(const spdelab_config* config);

/* Runs the configured experiment and writes {id}_records.csv and
 * {id}_summary.json into the configured output directory. */
SPDELAB_API spdelab_status spdelab_experiment_run(const spdelab_config* config,
                                                  spdelab_report** out);
SPDELAB_API void spdelab_report_destroy(spdelab_report* report);
SPDELAB_API const char* spdelab_report_summary_json(const spdelab_report* report);
SPDELAB_API const char* spdelab_report_records_path(const spdelab_report* report);
SPDELAB_API const char* spdelab_report_summary_path(const spdelab_report* report);

#ifdef __cplusplus
}
#endif

#endif /* SPDELAB_SPDELAB_H_ */
