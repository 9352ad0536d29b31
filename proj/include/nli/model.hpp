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

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nli/data.hpp"
#include "nli/embeddings.hpp"
#include "nli/encoder.hpp"
#include "nli/heads.hpp"
#include "nli/tokenizer.hpp"

namespace nli {

enum class EmbedKind { contextual, static_mean };
std::string_view embed_kind_name(EmbedKind kind);
EmbedKind parse_embed_kind(std::string_view name);

struct ModelConfig {
  HeadKind head = HeadKind::cnn;
  EmbedKind embed = EmbedKind::contextual;
  int label_mode = 3;
  std::size_t max_len = 32;  // padded pair length fed to the model
  PairOrder order = PairOrder::hypothesis_first;

  EncoderConfig encoder;  // contextual only; vocab_size and max_len are filled in
  std::size_t static_dim = 64;  // random static table width (ignored with loaded vectors)
  bool static_trainable = false;
  std::size_t width = 64;  // static path: pooled vector projected to this width

  CnnHeadConfig cnn;
  BilstmHeadConfig bilstm;
  std::uint64_t seed = 1;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::ordered_json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Contextual encoder (or static mean-pooled vectors) feeding a CNN or
// BiLSTM head. Owns its vocabulary. Not copyable: parameters are referenced
// by address while a forward pass is recorded.
class NliModel {
 public:
  /// `vectors` supplies a pre-trained static table; without it the static
  /// path uses a random table over the vocabulary.
  NliModel(ModelConfig config, Vocab vocab, std::optional<StaticEmbeddingTable> vectors = std::nullopt);
  NliModel(const NliModel&) = delete;
  NliModel& operator=(const NliModel&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  const Vocab& vocab() const noexcept { return vocab_; }
  const LabelSchema& schema() const noexcept { return schema_; }
  Head& head() { return *head_; }
  EncoderModel* encoder() { return encoder_.get(); }
  StaticEmbeddingTable* static_table() { return table_.get(); }

  TokenSequence encode(const ExamplePair& pair) const;

  /// Logits [1 x labels] for one encoded pair.
  Var logits(Tape& tape, const TokenSequence& seq, ops::Mode mode, Rng& rng);
  /// The head's input for one pair: the encoder's token matrix, or the
  /// projected pooled vector repeated head().static_rows() times.
  Var context(Tape& tape, const TokenSequence& seq);
  std::size_t context_length(const TokenSequence& seq) const;

  /// Eval-mode argmax (ties to the lowest index) per pair.
  std::vector<std::size_t> predict(std::span<const ExamplePair> pairs);

  /// Every parameter in a fixed order (checkpoint order).
  ParameterList parameters();
  ParameterList encoder_parameters();
  void set_encoder_frozen(bool frozen);

 private:
  ModelConfig config_;
  Vocab vocab_;
  LabelSchema schema_;
  std::unique_ptr<EncoderModel> encoder_;
  std::unique_ptr<StaticEmbeddingTable> table_;
  std::vector<std::size_t> row_of_id_;
  std::unique_ptr<Linear> width_projection_;
  std::unique_ptr<Head> head_;
};

}  // namespace nli
