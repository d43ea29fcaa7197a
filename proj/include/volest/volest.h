#ifndef VOLEST_H
#define VOLEST_H

/* C interface to the traffic volume estimation toolkit.
 *
 * Every fallible call returns a volest_status. On failure the message is
 * available from volest_last_error() on the same thread until the next call. */

#include <stddef.h>

#if defined(VOLEST_BUILDING_LIBRARY)
#define VOLEST_API __attribute__((visibility("default")))
#else
#define VOLEST_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum volest_status {
  VOLEST_OK = 0,
  VOLEST_ERR_INTERNAL = 1,
  VOLEST_ERR_CONFIG = 2,
  VOLEST_ERR_DATA = 3,
  VOLEST_ERR_NUMERIC = 4,
  VOLEST_ERR_IO = 5,
  VOLEST_ERR_MODEL_FORMAT = 6,
  VOLEST_ERR_MODEL_VERSION = 7,
  VOLEST_ERR_MODEL_TRUNCATED = 8,
  VOLEST_ERR_MODEL_SHAPE = 9,
  VOLEST_ERR_INVALID_ARGUMENT = 10
} volest_status;

typedef struct volest_config volest_config;
typedef struct volest_model volest_model;

typedef struct volest_metrics {
  double r_squared;
  double mape; /* percent, zero-volume hours excluded */
  double etcr; /* percent of lane capacity */
  double emfr; /* percent of the largest observed volume */
  size_t n_points;
  size_t n_excluded_zero_targets;
} volest_metrics;

VOLEST_API const char* volest_version(void);
VOLEST_API const char* volest_status_name(volest_status status);
VOLEST_API const char* volest_last_error(void);

/* Run configuration: flat key/value settings. */
VOLEST_API volest_status volest_config_new(volest_config** out);
VOLEST_API void volest_config_free(volest_config* config);
VOLEST_API volest_status volest_config_set(volest_config* config, const char* key, const char* value);
VOLEST_API volest_status volest_config_load(volest_config* config, const char* path);
/* Number of settings, and the name and help text of setting `index`. */
VOLEST_API size_t volest_config_key_count(void);
VOLEST_API volest_status volest_config_key(size_t index, const char** name, const char** help);

/* Runs generate | train | predict | cv | compare | quintiles | study. The run
 * directory is copied into `run_dir` (NUL-terminated) when it fits; a
 * too-small buffer gives VOLEST_ERR_INVALID_ARGUMENT after the run. */
VOLEST_API volest_status volest_run(const volest_config* config, const char* command, char* run_dir,
                                    size_t run_dir_size);

/* Trained models. Rows passed to predict are raw 84-column feature vectors. */
VOLEST_API volest_status volest_model_load(const char* path, volest_model** out);
VOLEST_API void volest_model_free(volest_model* model);
VOLEST_API size_t volest_model_input_dim(const volest_model* model);
VOLEST_API volest_status volest_model_predict(const volest_model* model, const double* rows, size_t n_rows,
                                              size_t n_cols, double* out);

/* Accuracy measures for one carriageway. */
VOLEST_API volest_status volest_evaluate(const double* actual, const double* predicted, size_t n,
                                         double capacity_per_lane, int lanes, volest_metrics* out);
/* Per-lane capacity for a free-flow speed; facility 0 = freeway, 1 = multilane. */
VOLEST_API volest_status volest_capacity(double free_flow_speed, int facility, double* out);
/* Two-sided signed-rank test on paired differences. */
VOLEST_API volest_status volest_wilcoxon(const double* differences, size_t n, double* statistic, double* p_value);

#ifdef __cplusplus
}
#endif

#endif
