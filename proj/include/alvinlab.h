/* Copyright (C) 2026 The alvinlab Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
 * with the License. You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the License
 * is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
 * or implied. See the License for the specific language governing permissions and limitations under the License.
 */

/* C interface to alvinlab. Every call returns an alab_status; on failure the
 * message is available from alab_last_error() on the same thread. */

#ifndef ALVINLAB_H_
#define ALVINLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(ALVINLAB_BUILDING)
#define ALAB_API __declspec(dllexport)
#else
#define ALAB_API __declspec(dllimport)
#endif
#else
#define ALAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum alab_status {
    ALAB_OK = 0,
    ALAB_ERR_USAGE = 1,      /* bad argument or precondition */
    ALAB_ERR_CONFIG = 2,     /* malformed or invalid experiment config */
    ALAB_ERR_RUNTIME = 3,    /* failure while running */
    ALAB_ERR_PARSE = 4,      /* malformed data file */
    ALAB_ERR_DEGENERATE = 5, /* degenerate numeric input */
} alab_status;

typedef struct alab_config alab_config;
typedef struct alab_bench alab_bench;

ALAB_API const char* alab_version(void);
/* Message of the last failed call on this thread; "" if none. */
ALAB_API const char* alab_last_error(void);
/* Process exit code for a status: 0 ok, 2 config or usage, 3 everything else. */
ALAB_API int alab_exit_code(alab_status status);

ALAB_API alab_status alab_config_from_file(const char* path, alab_config** out);
ALAB_API alab_status alab_config_from_json(const char* json, alab_config** out);
ALAB_API void alab_config_free(alab_config* cfg);
ALAB_API alab_status alab_config_set_strategy(alab_config* cfg, const char* strategy);
ALAB_API alab_status alab_config_set_seeds(alab_config* cfg, const uint64_t* seeds, size_t count);
ALAB_API alab_status alab_config_set_output_dir(alab_config* cfg, const char* dir);
ALAB_API size_t alab_config_seed_count(const alab_config* cfg);
ALAB_API alab_status alab_config_seed(const alab_config* cfg, size_t i, uint64_t* out);
/* Canonical JSON of the config; release with alab_string_free. */
ALAB_API alab_status alab_config_to_json(const alab_config* cfg, char** out);
ALAB_API void alab_string_free(char* s);

/* Writes train/id_test/ood_test CSVs with schema sidecars for the config's
 * synthetic dataset, drawn exactly as `run` draws it for `seed`. */
ALAB_API alab_status alab_generate_data(const alab_config* cfg, uint64_t seed, const char* out_dir);

/* Runs every configured seed; results land under <output_dir>/<strategy>/. */
ALAB_API alab_status alab_run_experiment(const alab_config* cfg);

/* Times one selection of n instances for each strategy (NULL/0 means all). */
ALAB_API alab_status alab_bench_select(const alab_config* cfg, const char* const* strategies, size_t strategy_count,
                                       size_t n, size_t labeled, size_t repeats, alab_bench** out);
ALAB_API size_t alab_bench_count(const alab_bench* bench);
ALAB_API const char* alab_bench_strategy(const alab_bench* bench, size_t i);
ALAB_API double alab_bench_seconds(const alab_bench* bench, size_t i);
ALAB_API void alab_bench_free(alab_bench* bench);

/* Reads results below in_dir and writes summary CSVs to out_dir. */
ALAB_API alab_status alab_report(const char* in_dir, const char* out_dir);

/* bits is row-major, n_examples x epochs, 1 = correct. out_minority[i] is
 * set to 1 for minority, 0 for majority. */
ALAB_API alab_status alab_infer_min_maj(const uint8_t* bits, size_t n_examples, size_t epochs,
                                        uint8_t* out_minority);

#ifdef __cplusplus
}
#endif

#endif /* ALVINLAB_H_ */
