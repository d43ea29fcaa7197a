#include "volest/volest.h"

#include <cstring>
#include <string>

#include "volest/error.hpp"
#include "volest/metrics.hpp"
#include "volest/model_io.hpp"
#include "volest/workflows.hpp"

struct volest_config {
  volest::workflows::RunConfig config;
};

struct volest_model {
  volest::AnnModel model;
};

namespace {

thread_local std::string last_error;

volest_status status_of(volest::ErrorKind kind) {
  using volest::ErrorKind;
  switch (kind) {
    case ErrorKind::Config: return VOLEST_ERR_CONFIG;
    case ErrorKind::Data: return VOLEST_ERR_DATA;
    case ErrorKind::Numeric: return VOLEST_ERR_NUMERIC;
    case ErrorKind::Structural: return VOLEST_ERR_DATA;
    case ErrorKind::Io: return VOLEST_ERR_IO;
    case ErrorKind::Format: return VOLEST_ERR_MODEL_FORMAT;
    case ErrorKind::Version: return VOLEST_ERR_MODEL_VERSION;
    case ErrorKind::Truncated: return VOLEST_ERR_MODEL_TRUNCATED;
    case ErrorKind::Shape: return VOLEST_ERR_MODEL_SHAPE;
  }
  return VOLEST_ERR_INTERNAL;
}

volest_status fail(volest_status s, const std::string& message) {
  last_error = message;
  return s;
}

template <class F>
volest_status guarded(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const volest::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(VOLEST_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VOLEST_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VOLEST_ERR_INTERNAL, "unknown failure");
  }
}

}  // namespace

extern "C" {

const char* volest_version(void) { return "1.0.0"; }

const char* volest_status_name(volest_status status) {
  switch (status) {
    case VOLEST_OK: return "ok";
    case VOLEST_ERR_INTERNAL: return "internal error";
    case VOLEST_ERR_CONFIG: return "configuration error";
    case VOLEST_ERR_DATA: return "data error";
    case VOLEST_ERR_NUMERIC: return "numeric error";
    case VOLEST_ERR_IO: return "i/o error";
    case VOLEST_ERR_MODEL_FORMAT: return "not a model file";
    case VOLEST_ERR_MODEL_VERSION: return "unsupported model version";
    case VOLEST_ERR_MODEL_TRUNCATED: return "truncated model file";
    case VOLEST_ERR_MODEL_SHAPE: return "inconsistent model file";
    case VOLEST_ERR_INVALID_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

const char* volest_last_error(void) { return last_error.c_str(); }

volest_status volest_config_new(volest_config** out) {
  if (!out) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null output pointer");
  return guarded([&] {
    *out = new volest_config{};
    return VOLEST_OK;
  });
}

void volest_config_free(volest_config* config) { delete config; }

volest_status volest_config_set(volest_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    volest::workflows::set(config->config, key, value);
    return VOLEST_OK;
  });
}

volest_status volest_config_load(volest_config* config, const char* path) {
  if (!config || !path) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    volest::workflows::load_config_file(config->config, path);
    return VOLEST_OK;
  });
}

size_t volest_config_key_count(void) { return volest::workflows::config_keys().size(); }

volest_status volest_config_key(size_t index, const char** name, const char** help) {
  static const auto keys = volest::workflows::config_keys();
  if (index >= keys.size() || !name || !help) return fail(VOLEST_ERR_INVALID_ARGUMENT, "no such setting");
  // the key table holds string literals, so these stay NUL-terminated
  *name = keys[index].key.data();
  *help = keys[index].help.data();
  return VOLEST_OK;
}

volest_status volest_run(const volest_config* config, const char* command, char* run_dir, size_t run_dir_size) {
  if (!config || !command) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto dir = volest::workflows::run(config->config, volest::workflows::parse_command(command)).string();
    if (run_dir) {
      if (dir.size() + 1 > run_dir_size) {
        if (run_dir_size > 0) run_dir[0] = '\0';
        return fail(VOLEST_ERR_INVALID_ARGUMENT, "run directory path does not fit the buffer: " + dir);
      }
      std::memcpy(run_dir, dir.c_str(), dir.size() + 1);
    }
    return VOLEST_OK;
  });
}

volest_status volest_model_load(const char* path, volest_model** out) {
  if (!path || !out) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new volest_model{volest::load_model(path)};
    return VOLEST_OK;
  });
}

void volest_model_free(volest_model* model) { delete model; }

size_t volest_model_input_dim(const volest_model* model) { return model ? model->model.spec.input_dim : 0; }

volest_status volest_model_predict(const volest_model* model, const double* rows, size_t n_rows, size_t n_cols,
                                   double* out) {
  if (!model || (n_rows > 0 && (!rows || !out))) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null argument");
  if (n_cols != model->model.spec.input_dim)
    return fail(VOLEST_ERR_INVALID_ARGUMENT,
                "rows have " + std::to_string(n_cols) + " columns, the model expects " +
                    std::to_string(model->model.spec.input_dim));
  return guarded([&] {
    const Eigen::Map<const volest::RowMatrix> x(rows, static_cast<Eigen::Index>(n_rows),
                                                static_cast<Eigen::Index>(n_cols));
    const auto y = model->model.predict(x);
    std::memcpy(out, y.data(), y.size() * sizeof(double));
    return VOLEST_OK;
  });
}

volest_status volest_evaluate(const double* actual, const double* predicted, size_t n, double capacity_per_lane,
                              int lanes, volest_metrics* out) {
  if (!actual || !predicted || !out) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto r = volest::metrics::evaluate({actual, n}, {predicted, n}, capacity_per_lane, lanes);
    *out = {r.r_squared, r.mape, r.etcr, r.emfr, r.n_points, r.n_excluded_zero_targets};
    return VOLEST_OK;
  });
}

volest_status volest_capacity(double free_flow_speed, int facility, double* out) {
  if (!out || (facility != 0 && facility != 1)) return fail(VOLEST_ERR_INVALID_ARGUMENT, "bad facility or null output");
  return guarded([&] {
    *out = volest::metrics::capacity_lookup(free_flow_speed, facility == 0 ? volest::metrics::Facility::Freeway
                                                                           : volest::metrics::Facility::Multilane);
    return VOLEST_OK;
  });
}

volest_status volest_wilcoxon(const double* differences, size_t n, double* statistic, double* p_value) {
  if (!differences || !statistic || !p_value) return fail(VOLEST_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto r = volest::metrics::wilcoxon_signed_rank(std::vector<double>(differences, differences + n));
    *statistic = r.statistic;
    *p_value = r.p_value;
    return VOLEST_OK;
  });
}

}  // extern "C"
