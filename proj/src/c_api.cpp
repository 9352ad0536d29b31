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

#include "nli/nli.h"

#include <openssl/evp.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "nli/checkpoint.hpp"
#include "nli/data.hpp"
#include "nli/error.hpp"
#include "nli/metrics.hpp"
#include "nli/model.hpp"
#include "nli/synth.hpp"
#include "nli/tokenizer.hpp"
#include "nli/training.hpp"
#include "nli/verify.hpp"

struct nli_dataset {
  nli::Dataset pairs;
};

struct nli_vocab {
  nli::Vocab vocab;
};

struct nli_model {
  std::unique_ptr<nli::NliModel> model;
};

struct nli_report {
  nli::Evaluation eval;
};

namespace {

thread_local std::string g_last_error;

nli_status status_of(nli::Error::Kind kind) {
  using K = nli::Error::Kind;
  switch (kind) {
    case K::config:
    case K::dimension:
      return NLI_ERR_USAGE;
    case K::parse:
    case K::label:
    case K::io:
    case K::schema:
    case K::numeric:
    case K::training:
      return NLI_ERR_DATA;
    case K::internal:
      break;
  }
  return NLI_ERR_INTERNAL;
}

template <typename F>
nli_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const nli::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return NLI_ERR_INTERNAL;
}

nli_status usage(const char* what) {
  g_last_error = what;
  return NLI_ERR_USAGE;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* nli_last_error(void) { return g_last_error.c_str(); }
const char* nli_version(void) { return "1.0.0"; }
void nli_string_free(char* s) { std::free(s); }

void nli_synth_options_default(nli_synth_options* o) {
  if (!o) return;
  const nli::SynthConfig d;
  *o = {d.nouns, d.verbs, d.adverbs, d.per_label, d.label_mode, d.negation_fraction, d.seed};
}

nli_status nli_dataset_generate(const nli_synth_options* o, nli_dataset** out) {
  if (!o || !out) return usage("nli_dataset_generate: null argument");
  return guarded([&] {
    nli::SynthConfig c;
    c.nouns = o->nouns;
    c.verbs = o->verbs;
    c.adverbs = o->adverbs;
    c.per_label = o->per_label;
    c.label_mode = o->label_mode;
    c.negation_fraction = o->negation_fraction;
    c.seed = o->seed;
    *out = new nli_dataset{nli::synth_generate(c)};
    return NLI_OK;
  });
}

nli_status nli_dataset_load(const char* path, int label_mode, nli_dataset** out, size_t* dropped_other) {
  if (!path || !out) return usage("nli_dataset_load: null argument");
  return guarded([&] {
    nli::LoadResult r = nli::load_dataset(path, nli::LabelSchema(label_mode));
    if (dropped_other) *dropped_other = r.dropped_other;
    *out = new nli_dataset{std::move(r.pairs)};
    return NLI_OK;
  });
}

nli_status nli_dataset_save(const nli_dataset* ds, const char* path) {
  if (!ds || !path) return usage("nli_dataset_save: null argument");
  return guarded([&] {
    nli::save_dataset(path, ds->pairs);
    return NLI_OK;
  });
}

nli_status nli_dataset_split(const nli_dataset* ds, double train, double dev, double test, uint64_t seed,
                             nli_dataset** train_out, nli_dataset** dev_out, nli_dataset** test_out) {
  if (!ds || !train_out || !dev_out || !test_out) return usage("nli_dataset_split: null argument");
  return guarded([&] {
    nli::Splits s = nli::split(ds->pairs, {train, dev, test}, seed);
    auto a = std::make_unique<nli_dataset>(nli_dataset{std::move(s.train)});
    auto b = std::make_unique<nli_dataset>(nli_dataset{std::move(s.dev)});
    auto c = std::make_unique<nli_dataset>(nli_dataset{std::move(s.test)});
    *train_out = a.release();
    *dev_out = b.release();
    *test_out = c.release();
    return NLI_OK;
  });
}

size_t nli_dataset_size(const nli_dataset* ds) { return ds ? ds->pairs.size() : 0; }

nli_status nli_dataset_label_counts(const nli_dataset* ds, size_t counts[4]) {
  if (!ds || !counts) return usage("nli_dataset_label_counts: null argument");
  const auto c = nli::label_counts(ds->pairs);
  for (int i = 0; i < 4; ++i) counts[i] = c[i];
  return NLI_OK;
}

void nli_dataset_free(nli_dataset* ds) { delete ds; }

nli_status nli_vocab_train(const nli_dataset* ds, size_t merges, nli_vocab** out) {
  if (!ds || !out) return usage("nli_vocab_train: null argument");
  return guarded([&] {
    const auto sentences = nli::sentences_of(ds->pairs);
    *out = new nli_vocab{nli::Vocab::train_bpe(sentences, merges)};
    return NLI_OK;
  });
}

nli_status nli_vocab_load(const char* path, nli_vocab** out) {
  if (!path || !out) return usage("nli_vocab_load: null argument");
  return guarded([&] {
    *out = new nli_vocab{nli::Vocab::load(path)};
    return NLI_OK;
  });
}

nli_status nli_vocab_save(const nli_vocab* v, const char* path) {
  if (!v || !path) return usage("nli_vocab_save: null argument");
  return guarded([&] {
    v->vocab.save(path);
    return NLI_OK;
  });
}

size_t nli_vocab_size(const nli_vocab* v) { return v ? v->vocab.size() : 0; }

nli_status nli_vocab_max_pair_length(const nli_vocab* v, const nli_dataset* ds, size_t* out) {
  if (!v || !ds || !out) return usage("nli_vocab_max_pair_length: null argument");
  return guarded([&] {
    *out = nli::corpus_max_length(v->vocab, ds->pairs);
    return NLI_OK;
  });
}

void nli_vocab_free(nli_vocab* v) { delete v; }

void nli_model_options_default(nli_model_options* o) {
  if (!o) return;
  const nli::ModelConfig d;
  o->head = "cnn";
  o->embed = "contextual";
  o->vectors_path = nullptr;
  o->label_mode = d.label_mode;
  o->max_len = d.max_len;
  o->hypothesis_first = d.order == nli::PairOrder::hypothesis_first;
  o->layers = d.encoder.layers;
  o->attention_heads = d.encoder.heads;
  o->d_model = d.encoder.d_model;
  o->d_ff = d.encoder.d_ff;
  o->static_dim = d.static_dim;
  o->static_trainable = d.static_trainable;
  o->width = d.width;
  o->head_input_width = d.cnn.input_width;
  o->cnn_filters = d.cnn.filters_per_window;
  o->lstm_hidden = d.bilstm.hidden_dim;
  o->lstm_layers = d.bilstm.layers;
  o->dropout = d.cnn.dropout_rate;
  o->seed = d.seed;
}

nli_status nli_model_create(const nli_model_options* o, const nli_vocab* v, nli_model** out) {
  if (!o || !v || !out || !o->head || !o->embed) return usage("nli_model_create: null argument");
  return guarded([&] {
    nli::ModelConfig c;
    c.head = nli::parse_head_kind(o->head);
    c.embed = nli::parse_embed_kind(o->embed);
    c.label_mode = o->label_mode;
    c.max_len = o->max_len;
    c.order = o->hypothesis_first ? nli::PairOrder::hypothesis_first : nli::PairOrder::premise_first;
    c.encoder.layers = o->layers;
    c.encoder.heads = o->attention_heads;
    c.encoder.d_model = o->d_model;
    c.encoder.d_ff = o->d_ff;
    c.encoder.max_len = o->max_len;
    c.static_dim = o->static_dim;
    c.static_trainable = o->static_trainable != 0;
    c.width = o->width;
    c.cnn.input_width = o->head_input_width;
    c.cnn.filters_per_window = o->cnn_filters;
    c.cnn.dropout_rate = o->dropout;
    c.bilstm.input_width = o->head_input_width;
    c.bilstm.hidden_dim = o->lstm_hidden;
    c.bilstm.layers = o->lstm_layers;
    c.bilstm.dropout_rate = o->dropout;
    c.seed = o->seed;
    std::optional<nli::StaticEmbeddingTable> vectors;
    if (o->vectors_path) {
      if (c.embed != nli::EmbedKind::static_mean)
        throw nli::ConfigError("word vectors only apply to the static embedding path");
      vectors = nli::StaticEmbeddingTable::load(o->vectors_path, c.static_trainable);
    }
    *out = new nli_model{std::make_unique<nli::NliModel>(c, v->vocab, std::move(vectors))};
    return NLI_OK;
  });
}

nli_status nli_model_load(const char* path, nli_model** out) {
  if (!path || !out) return usage("nli_model_load: null argument");
  return guarded([&] {
    *out = new nli_model{nli::load_checkpoint(path)};
    return NLI_OK;
  });
}

nli_status nli_model_save(nli_model* m, const char* path) {
  if (!m || !path) return usage("nli_model_save: null argument");
  return guarded([&] {
    nli::save_checkpoint(path, *m->model);
    return NLI_OK;
  });
}

int nli_model_label_mode(const nli_model* m) { return m ? m->model->config().label_mode : 0; }

size_t nli_model_parameter_count(nli_model* m) {
  if (!m) return 0;
  size_t n = 0;
  for (const nli::Parameter* p : m->model->parameters()) n += p->value.size();
  return n;
}

nli_status nli_model_config_json(const nli_model* m, char** out) {
  if (!m || !out) return usage("nli_model_config_json: null argument");
  return guarded([&] {
    *out = dup(nli::to_json(m->model->config()).dump());
    return NLI_OK;
  });
}

void nli_model_free(nli_model* m) { delete m; }

void nli_train_options_default(nli_train_options* o) {
  if (!o) return;
  const nli::TrainConfig d;
  *o = {d.learning_rate, d.batch_size, d.epochs, d.seed, d.beta1, d.beta2, d.epsilon, d.freeze_encoder};
}

nli_status nli_train(nli_model* m, const nli_dataset* train, const nli_dataset* dev, const nli_train_options* o,
                     nli_epoch_callback on_epoch, void* user, char** summary) {
  if (!m || !train || !o) return usage("nli_train: null argument");
  return guarded([&] {
    nli::TrainConfig c;
    c.learning_rate = o->learning_rate;
    c.batch_size = o->batch_size;
    c.epochs = o->epochs;
    c.seed = o->seed;
    c.beta1 = o->beta1;
    c.beta2 = o->beta2;
    c.epsilon = o->epsilon;
    c.freeze_encoder = o->freeze_encoder != 0;
    std::span<const nli::ExamplePair> dev_pairs;
    if (dev) dev_pairs = dev->pairs;
    nli::EpochCallback cb;
    if (on_epoch)
      cb = [on_epoch, user](const nli::EpochLog& e) { on_epoch(nli::to_json(e).dump().c_str(), user); };
    const nli::TrainResult r = nli::train(*m->model, train->pairs, dev_pairs, c, cb);
    if (summary) {
      nlohmann::ordered_json j;
      j["epochs_run"] = r.log.size();
      j["best_epoch"] = r.best_epoch;
      j["config"] = nli::to_json(c);
      *summary = dup(j.dump());
    }
    return NLI_OK;
  });
}

nli_status nli_evaluate(nli_model* m, const nli_dataset* ds, nli_report** out) {
  if (!m || !ds || !out) return usage("nli_evaluate: null argument");
  return guarded([&] {
    *out = new nli_report{nli::evaluate(*m->model, ds->pairs)};
    return NLI_OK;
  });
}

double nli_report_accuracy(const nli_report* r) { return r ? r->eval.report.macro.accuracy : 0.0; }
double nli_report_plain_accuracy(const nli_report* r) { return r ? r->eval.report.plain_accuracy : 0.0; }
double nli_report_f1_macro(const nli_report* r) { return r ? r->eval.report.macro.f1 : 0.0; }

nli_status nli_report_json(const nli_report* r, char** out) {
  if (!r || !out) return usage("nli_report_json: null argument");
  return guarded([&] {
    *out = dup(nli::to_json(r->eval.report).dump(2) + "\n");
    return NLI_OK;
  });
}

nli_status nli_report_text(const nli_report* r, char** out) {
  if (!r || !out) return usage("nli_report_text: null argument");
  return guarded([&] {
    *out = dup(nli::to_text(r->eval.report));
    return NLI_OK;
  });
}

nli_status nli_report_confusion_csv(const nli_report* r, char** out) {
  if (!r || !out) return usage("nli_report_confusion_csv: null argument");
  return guarded([&] {
    *out = dup(r->eval.report.confusion.to_csv());
    return NLI_OK;
  });
}

nli_status nli_report_predictions(const nli_report* r, char** out) {
  if (!r || !out) return usage("nli_report_predictions: null argument");
  return guarded([&] {
    std::string s;
    const auto& labels = r->eval.report.confusion.labels();
    for (std::size_t p : r->eval.predictions) s += labels[p] + "\n";
    *out = dup(s);
    return NLI_OK;
  });
}

void nli_report_free(nli_report* r) { delete r; }

nli_status nli_verify(uint64_t seed, int inject_fault, char** report) {
  return guarded([&] {
    nli::VerifyOptions o;
    o.seed = seed;
    o.inject_fault = inject_fault != 0;
    const nli::VerifyReport r = nli::run_verify(o);
    if (report) *report = dup(nli::to_json(r).dump(2) + "\n");
    if (!r.passed()) {
      g_last_error = "verification failed";
      return NLI_ERR_VERIFY;
    }
    return NLI_OK;
  });
}

nli_status nli_sha256_file(const char* path, char hex[65]) {
  if (!path || !hex) return usage("nli_sha256_file: null argument");
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nli::IoError(std::string("cannot open ") + path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
      throw nli::Error(nli::Error::Kind::internal, "sha256 init failed");
    char buf[1 << 16];
    while (in) {
      in.read(buf, sizeof buf);
      if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    for (unsigned int i = 0; i < len; ++i) std::snprintf(hex + 2 * i, 3, "%02x", digest[i]);
    hex[2 * len] = '\0';
    return NLI_OK;
  });
}

}  // extern "C"
