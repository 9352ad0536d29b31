/*
 * Copyright 2026 The nli-heads Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NLI_NLI_H
#define NLI_NLI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef NLI_BUILDING_LIBRARY
#    define NLI_API __declspec(dllexport)
#  else
#    define NLI_API __declspec(dllimport)
#  endif
#else
#  define NLI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes for the command-line tool. */
typedef enum nli_status {
  NLI_OK = 0,
  NLI_ERR_USAGE = 1,    /* bad argument, configuration or combination */
  NLI_ERR_DATA = 2,     /* unreadable, malformed or mismatched input; training divergence */
  NLI_ERR_VERIFY = 3,   /* a self-verification check failed */
  NLI_ERR_INTERNAL = 4  /* unexpected failure */
} nli_status;

typedef struct nli_dataset nli_dataset;
typedef struct nli_vocab nli_vocab;
typedef struct nli_model nli_model;
typedef struct nli_report nli_report;

/* Message of the last failed call on this thread ("" if none). */
NLI_API const char* nli_last_error(void);
NLI_API const char* nli_version(void);
/* Frees strings returned through char** out-parameters. */
NLI_API void nli_string_free(char* s);

/* ---- datasets ---- */

typedef struct nli_synth_options {
  size_t nouns;
  size_t verbs;
  size_t adverbs;
  size_t per_label;
  int label_mode;
  double negation_fraction;
  uint64_t seed;
} nli_synth_options;

NLI_API void nli_synth_options_default(nli_synth_options* opts);
NLI_API nli_status nli_dataset_generate(const nli_synth_options* opts, nli_dataset** out);
/* JSON-lines, or tab-separated for a .tsv path. dropped_other may be NULL. */
NLI_API nli_status nli_dataset_load(const char* path, int label_mode, nli_dataset** out, size_t* dropped_other);
NLI_API nli_status nli_dataset_save(const nli_dataset* ds, const char* path);
NLI_API nli_status nli_dataset_split(const nli_dataset* ds, double train, double dev, double test, uint64_t seed,
                                     nli_dataset** train_out, nli_dataset** dev_out, nli_dataset** test_out);
NLI_API size_t nli_dataset_size(const nli_dataset* ds);
/* counts[4] indexed entailment, contradiction, neutral, other. */
NLI_API nli_status nli_dataset_label_counts(const nli_dataset* ds, size_t counts[4]);
NLI_API void nli_dataset_free(nli_dataset* ds);

/* ---- vocabulary ---- */

NLI_API nli_status nli_vocab_train(const nli_dataset* ds, size_t merges, nli_vocab** out);
NLI_API nli_status nli_vocab_load(const char* path, nli_vocab** out);
NLI_API nli_status nli_vocab_save(const nli_vocab* vocab, const char* path);
NLI_API size_t nli_vocab_size(const nli_vocab* vocab);
/* Longest encoded pair ([CLS] + both sides + two [SEP]) in the dataset. */
NLI_API nli_status nli_vocab_max_pair_length(const nli_vocab* vocab, const nli_dataset* ds, size_t* out);
NLI_API void nli_vocab_free(nli_vocab* vocab);

/* ---- models ---- */

typedef struct nli_model_options {
  const char* head;         /* "cnn" or "bilstm" */
  const char* embed;        /* "contextual" or "static" */
  const char* vectors_path; /* static word vectors; NULL for a random table */
  int label_mode;           /* 3 or 4 */
  size_t max_len;
  int hypothesis_first;     /* nonzero: [CLS] hypothesis [SEP] premise [SEP] */
  size_t layers;
  size_t attention_heads;
  size_t d_model;
  size_t d_ff;
  size_t static_dim;
  int static_trainable;
  size_t width;             /* static path: pooled vector projected to this width */
  size_t head_input_width;
  size_t cnn_filters;
  size_t lstm_hidden;
  size_t lstm_layers;
  double dropout;
  uint64_t seed;
} nli_model_options;

NLI_API void nli_model_options_default(nli_model_options* opts);
NLI_API nli_status nli_model_create(const nli_model_options* opts, const nli_vocab* vocab, nli_model** out);
NLI_API nli_status nli_model_load(const char* path, nli_model** out);
NLI_API nli_status nli_model_save(nli_model* model, const char* path);
NLI_API int nli_model_label_mode(const nli_model* model);
NLI_API size_t nli_model_parameter_count(nli_model* model);
NLI_API nli_status nli_model_config_json(const nli_model* model, char** out);
NLI_API void nli_model_free(nli_model* model);

/* ---- training ---- */

typedef struct nli_train_options {
  double learning_rate;
  size_t batch_size;
  size_t epochs;
  uint64_t seed;
  double beta1;
  double beta2;
  double epsilon;
  int freeze_encoder;
} nli_train_options;

/* Called once per epoch with that epoch's log as one JSON object. */
typedef void (*nli_epoch_callback)(const char* epoch_json, void* user);

NLI_API void nli_train_options_default(nli_train_options* opts);
/* dev may be NULL. summary (may be NULL) receives a JSON object. */
NLI_API nli_status nli_train(nli_model* model, const nli_dataset* train, const nli_dataset* dev,
                             const nli_train_options* opts, nli_epoch_callback on_epoch, void* user, char** summary);

/* ---- evaluation ---- */

NLI_API nli_status nli_evaluate(nli_model* model, const nli_dataset* ds, nli_report** out);
NLI_API double nli_report_accuracy(const nli_report* report);
NLI_API double nli_report_plain_accuracy(const nli_report* report);
NLI_API double nli_report_f1_macro(const nli_report* report);
NLI_API nli_status nli_report_json(const nli_report* report, char** out);
NLI_API nli_status nli_report_text(const nli_report* report, char** out);
NLI_API nli_status nli_report_confusion_csv(const nli_report* report, char** out);
/* One predicted label name per evaluated pair, newline-terminated. */
NLI_API nli_status nli_report_predictions(const nli_report* report, char** out);
NLI_API void nli_report_free(nli_report* report);

/* ---- self-verification and hashing ---- */

/* Runs gradient, metric and dropout checks; NLI_ERR_VERIFY if any fails.
   report (may be NULL) receives the JSON summary in either case. */
NLI_API nli_status nli_verify(uint64_t seed, int inject_fault, char** report);
/* Lowercase hex SHA-256 of a file's bytes into hex[65]. */
NLI_API nli_status nli_sha256_file(const char* path, char hex[65]);

#ifdef __cplusplus
}
#endif

#endif /* NLI_NLI_H */
