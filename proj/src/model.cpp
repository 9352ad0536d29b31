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

#include "nli/model.hpp"

#include <algorithm>

#include "nli/error.hpp"

namespace nli {

std::string_view embed_kind_name(EmbedKind kind) { return kind == EmbedKind::contextual ? "contextual" : "static"; }

EmbedKind parse_embed_kind(std::string_view name) {
  if (name == "contextual") return EmbedKind::contextual;
  if (name == "static") return EmbedKind::static_mean;
  throw ConfigError("unknown embedding kind '" + std::string(name) + "' (expected contextual or static)");
}

nlohmann::ordered_json to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["head"] = head_kind_name(c.head);
  j["embed"] = embed_kind_name(c.embed);
  j["label_mode"] = c.label_mode;
  j["max_len"] = c.max_len;
  j["order"] = c.order == PairOrder::hypothesis_first ? "hypothesis_first" : "premise_first";
  j["encoder"] = {{"layers", c.encoder.layers},   {"heads", c.encoder.heads},     {"d_model", c.encoder.d_model},
                  {"d_ff", c.encoder.d_ff},       {"max_len", c.encoder.max_len}, {"vocab_size", c.encoder.vocab_size}};
  j["static_dim"] = c.static_dim;
  j["static_trainable"] = c.static_trainable;
  j["width"] = c.width;
  j["cnn"] = {{"input_width", c.cnn.input_width},
              {"windows", c.cnn.windows},
              {"filters_per_window", c.cnn.filters_per_window},
              {"num_branches", c.cnn.num_branches},
              {"num_labels", c.cnn.num_labels},
              {"dropout_rate", c.cnn.dropout_rate}};
  j["bilstm"] = {{"input_width", c.bilstm.input_width}, {"hidden_dim", c.bilstm.hidden_dim},
                 {"layers", c.bilstm.layers},           {"num_branches", c.bilstm.num_branches},
                 {"num_labels", c.bilstm.num_labels},   {"dropout_rate", c.bilstm.dropout_rate}};
  j["seed"] = c.seed;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.head = parse_head_kind(j.at("head").get<std::string>());
    c.embed = parse_embed_kind(j.at("embed").get<std::string>());
    c.label_mode = j.at("label_mode").get<int>();
    c.max_len = j.at("max_len").get<std::size_t>();
    const auto order = j.at("order").get<std::string>();
    if (order != "hypothesis_first" && order != "premise_first") throw ConfigError("unknown pair order " + order);
    c.order = order == "hypothesis_first" ? PairOrder::hypothesis_first : PairOrder::premise_first;
    const auto& e = j.at("encoder");
    c.encoder = {e.at("layers"), e.at("heads"), e.at("d_model"), e.at("d_ff"), e.at("max_len"), e.at("vocab_size")};
    c.static_dim = j.at("static_dim");
    c.static_trainable = j.at("static_trainable");
    c.width = j.at("width");
    const auto& k = j.at("cnn");
    c.cnn.input_width = k.at("input_width");
    c.cnn.windows = k.at("windows").get<std::vector<std::size_t>>();
    c.cnn.filters_per_window = k.at("filters_per_window");
    c.cnn.num_branches = k.at("num_branches");
    c.cnn.num_labels = k.at("num_labels");
    c.cnn.dropout_rate = k.at("dropout_rate");
    const auto& b = j.at("bilstm");
    c.bilstm.input_width = b.at("input_width");
    c.bilstm.hidden_dim = b.at("hidden_dim");
    c.bilstm.layers = b.at("layers");
    c.bilstm.num_branches = b.at("num_branches");
    c.bilstm.num_labels = b.at("num_labels");
    c.bilstm.dropout_rate = b.at("dropout_rate");
    c.seed = j.at("seed");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed model configuration: ") + e.what());
  }
}

NliModel::NliModel(ModelConfig config, Vocab vocab, std::optional<StaticEmbeddingTable> vectors)
    : config_(std::move(config)), vocab_(std::move(vocab)), schema_(config_.label_mode) {
  if (config_.max_len < 5) throw ConfigError("model max_len must be at least 5");
  const auto labels = static_cast<std::size_t>(config_.label_mode);
  config_.cnn.num_labels = labels;
  config_.bilstm.num_labels = labels;

  Rng rng(config_.seed);
  std::size_t context_width = 0;
  if (config_.embed == EmbedKind::contextual) {
    config_.encoder.vocab_size = vocab_.size();
    config_.encoder.max_len = std::max(config_.encoder.max_len, config_.max_len);
    encoder_ = std::make_unique<EncoderModel>(config_.encoder, rng);
    context_width = config_.encoder.d_model;
  } else {
    if (vectors) {
      table_ = std::make_unique<StaticEmbeddingTable>(std::move(*vectors));
      table_->matrix.trainable = config_.static_trainable;
      config_.static_dim = table_->dim();
    } else {
      table_ = std::make_unique<StaticEmbeddingTable>(
          StaticEmbeddingTable::random(vocab_.tokens(), config_.static_dim, rng));
      table_->matrix.trainable = config_.static_trainable;
    }
    row_of_id_ = table_->row_map(vocab_);
    if (config_.width == 0) throw ConfigError("static projection width must be positive");
    width_projection_ = std::make_unique<Linear>("static.projection", table_->dim(), config_.width, rng);
    context_width = config_.width;
  }

  if (config_.head == HeadKind::cnn)
    head_ = std::make_unique<CnnHead>(context_width, config_.cnn, rng);
  else
    head_ = std::make_unique<BilstmHead>(context_width, config_.bilstm, rng);
}

TokenSequence NliModel::encode(const ExamplePair& pair) const {
  return encode_pair(vocab_, pair.hypothesis, pair.premise, config_.max_len, config_.order);
}

Var NliModel::context(Tape& tape, const TokenSequence& seq) {
  if (encoder_) return encoder_->encode(tape, seq);
  Var pooled = mean_pool_encode(tape, *table_, row_of_id_, seq);
  Var projected = project_to_width(tape, *width_projection_, pooled);
  return ops::repeat_rows(projected, head_->static_rows());
}

std::size_t NliModel::context_length(const TokenSequence& seq) const {
  return encoder_ ? seq.length : head_->static_rows();
}

Var NliModel::logits(Tape& tape, const TokenSequence& seq, ops::Mode mode, Rng& rng) {
  Var ctx = context(tape, seq);
  return head_->forward(tape, ctx, context_length(seq), mode, rng);
}

std::vector<std::size_t> NliModel::predict(std::span<const ExamplePair> pairs) {
  std::vector<std::size_t> out;
  out.reserve(pairs.size());
  Rng unused(0);
  for (const auto& p : pairs) {
    Tape tape(false);
    const Tensor& z = logits(tape, encode(p), ops::Mode::eval, unused).value();
    std::size_t best = 0;
    for (std::size_t k = 1; k < z.size(); ++k)
      if (z[k] > z[best]) best = k;
    out.push_back(best);
  }
  return out;
}

ParameterList NliModel::parameters() {
  ParameterList out;
  if (encoder_) encoder_->collect(out);
  if (table_) {
    out.push_back(&table_->matrix);
    width_projection_->collect(out);
  }
  head_->collect(out);
  return out;
}

ParameterList NliModel::encoder_parameters() {
  ParameterList out;
  if (encoder_) encoder_->collect(out);
  return out;
}

void NliModel::set_encoder_frozen(bool frozen) {
  for (Parameter* p : encoder_parameters()) p->trainable = !frozen;
}

}  // namespace nli
