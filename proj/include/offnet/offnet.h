// Copyright (c) 2026 The offnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the offnet offensive-language toolkit.
 *
 * Every function returns an offnet_status; on failure a message is available
 * from offnet_last_error() on the calling thread until the next call.
 * Handles are opaque and must be released with their matching destroy call.
 */
#ifndef OFFNET_OFFNET_H_
#define OFFNET_OFFNET_H_

#include <stddef.h>

#if defined(OFFNET_BUILDING_LIBRARY)
#define OFFNET_API __attribute__((visibility("default")))
#else
#define OFFNET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum offnet_status {
  OFFNET_OK = 0,
  OFFNET_ERR_USAGE = 1,   /* bad arguments or configuration */
  OFFNET_ERR_DATA = 2,    /* malformed or missing input data */
  OFFNET_ERR_NUMERIC = 3  /* non-finite values during training */
} offnet_status;

typedef struct offnet_config offnet_config;
typedef struct offnet_lexicon offnet_lexicon;
typedef struct offnet_model offnet_model;

/* Receives `len` bytes of text; the buffer is only valid during the call. */
typedef void (*offnet_text_fn)(const char* text, size_t len, void* user);

OFFNET_API const char* offnet_last_error(void);
OFFNET_API const char* offnet_version(void);

/* Run configuration: defaults, then a `key = value` file, then overrides. */
OFFNET_API offnet_status offnet_config_create(offnet_config** out);
OFFNET_API void offnet_config_destroy(offnet_config* cfg);
OFFNET_API offnet_status offnet_config_set(offnet_config* cfg, const char* key,
                                           const char* value);
OFFNET_API offnet_status offnet_config_load_file(offnet_config* cfg, const char* path);
/* Writes the resolved configuration, one `key = value` per line. */
OFFNET_API offnet_status offnet_config_echo(const offnet_config* cfg, offnet_text_fn out,
                                            void* user);

/* Runs one of: prepare, train, evaluate, predict, baseline.  Progress goes to
 * `log`, results meant for the terminal go to `out`; either may be NULL. */
OFFNET_API offnet_status offnet_run_command(const offnet_config* cfg, const char* command,
                                            offnet_text_fn out, offnet_text_fn log,
                                            void* user);

/* Obfuscation-aware normalizer built from the config's preprocessing keys. */
OFFNET_API offnet_status offnet_lexicon_create(const offnet_config* cfg,
                                               offnet_lexicon** out);
OFFNET_API void offnet_lexicon_destroy(offnet_lexicon* lex);
OFFNET_API size_t offnet_lexicon_size(const offnet_lexicon* lex);
/* Emits the normalized tokens of `text` joined by single spaces. */
OFFNET_API offnet_status offnet_lexicon_normalize(const offnet_lexicon* lex, const char* text,
                                                  offnet_text_fn out, void* user);

/* Trained model from a checkpoint; `cfg` may be NULL or redirect the
 * embeddings / sentence_vectors files. */
OFFNET_API offnet_status offnet_model_load(const char* path, const offnet_config* cfg,
                                           offnet_model** out);
OFFNET_API void offnet_model_destroy(offnet_model* model);
/* Class names are written into `labels` (e.g. "NOT"/"OFF") as static strings. */
OFFNET_API offnet_status offnet_model_predict(const offnet_model* model,
                                              const char* const* texts, size_t n,
                                              int* labels, double* probabilities);
OFFNET_API const char* offnet_model_class_name(const offnet_model* model, int label);

/* Per-class precision/recall/F1, macro-F1 and accuracy as JSON. */
OFFNET_API offnet_status offnet_metrics_report(const int* gold, const int* pred, size_t n,
                                               int n_classes, offnet_text_fn out,
                                               void* user);

#ifdef __cplusplus
}
#endif

#endif  /* OFFNET_OFFNET_H_ */
