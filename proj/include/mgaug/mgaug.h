/*
 * Copyright 2026 The MGAug Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MGAUG_H_
#define MGAUG_H_

/*
 * C interface to libmgaug. Every function that can fail returns an
 * mgaug_status; on failure mgaug_last_error() describes the cause. The
 * message is thread-local and valid until the next failing call on the same
 * thread. Handles are opaque and owned by the caller.
 */

#include <stddef.h>

#if defined(_WIN32)
#define MGAUG_API __declspec(dllexport)
#else
#define MGAUG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mgaug_status {
    MGAUG_OK = 0,
    MGAUG_ERR_DIMENSION = 1,
    MGAUG_ERR_DOMAIN = 2,
    MGAUG_ERR_CONTRACT = 3,
    MGAUG_ERR_NUMERIC = 4,
    MGAUG_ERR_CONFIG = 5,
    MGAUG_ERR_IO = 6,
    MGAUG_ERR_ARGUMENT = 7, /* null handle or output pointer */
    MGAUG_ERR_BUFFER = 8,   /* caller buffer too small; see *needed */
    MGAUG_ERR_INTERNAL = 9
} mgaug_status;

typedef struct mgaug_config mgaug_config;
typedef struct mgaug_model mgaug_model;

typedef struct mgaug_bound_terms {
    double empirical;
    double environment;
    double task;
    double total;
} mgaug_bound_terms;

MGAUG_API const char* mgaug_version(void);
MGAUG_API const char* mgaug_last_error(void);
MGAUG_API const char* mgaug_status_name(mgaug_status status);

/* Configuration. Defaults are materialized at creation. */
MGAUG_API mgaug_status mgaug_config_create(mgaug_config** out);
MGAUG_API mgaug_status mgaug_config_load(const char* path, mgaug_config** out);
MGAUG_API mgaug_status mgaug_config_set(mgaug_config* cfg, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buf; *needed receives the size
 * including the terminator. Returns MGAUG_ERR_BUFFER if cap is too small. */
MGAUG_API mgaug_status mgaug_config_get(const mgaug_config* cfg, const char* key, char* buf, size_t cap,
                                        size_t* needed);
MGAUG_API mgaug_status mgaug_config_echo(const mgaug_config* cfg, char* buf, size_t cap, size_t* needed);
MGAUG_API mgaug_status mgaug_config_validate(const mgaug_config* cfg);
MGAUG_API void mgaug_config_destroy(mgaug_config* cfg);

/* Training writes its artifacts into the configured `out` directory. */
MGAUG_API mgaug_status mgaug_train(const mgaug_config* cfg);
MGAUG_API mgaug_status mgaug_resume(const mgaug_config* cfg, const char* checkpoint_path);

/* Models (meta-initializations). */
MGAUG_API mgaug_status mgaug_model_init(const mgaug_config* cfg, mgaug_model** out);
MGAUG_API mgaug_status mgaug_model_load(const char* checkpoint_path, mgaug_model** out);
MGAUG_API mgaug_status mgaug_model_save(const mgaug_model* model, const char* checkpoint_path);
MGAUG_API mgaug_status mgaug_model_num_params(const mgaug_model* model, size_t* out);
MGAUG_API void mgaug_model_destroy(mgaug_model* model);

/* Fine-tunes on `episodes` episodes of split "train", "val" or "test". */
MGAUG_API mgaug_status mgaug_evaluate(const mgaug_model* model, const mgaug_config* cfg, const char* split,
                                      size_t episodes, double* mean_acc, double* stderr_acc);

/* Writes the per-step fine-tuning profile (full and pruned) as CSV. */
MGAUG_API mgaug_status mgaug_probe(const mgaug_model* model, const mgaug_config* cfg, const char* csv_path);

MGAUG_API mgaug_status mgaug_bound_from_file(const char* path, mgaug_bound_terms* out);
MGAUG_API mgaug_status mgaug_bound_compute(size_t tasks, const size_t* samples, double delta, double kl_hyper,
                                           const double* theta_norms_sq, double rho, const double* empirical_errors,
                                           mgaug_bound_terms* out);

#ifdef __cplusplus
}
#endif

#endif /* MGAUG_H_ */
