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

#include <cstddef>
#include <vector>

#include "nli/layers.hpp"
#include "nli/tokenizer.hpp"

namespace nli {

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t d_model = 64;
  std::size_t d_ff = 128;
  std::size_t max_len = 64;
  std::size_t vocab_size = 0;

  /// Throws ConfigError unless d_model % heads == 0, max_len >= 5 and every
  /// size is positive.
  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Small pre-norm transformer encoder trained from scratch: token, learned
// position and segment embeddings, then `layers` blocks of multi-head
// self-attention and a ReLU feed-forward, each with a residual connection.
class EncoderModel {
 public:
  EncoderModel(const EncoderConfig& config, Rng& rng);

  const EncoderConfig& config() const noexcept { return config_; }
  void collect(ParameterList& out);

  /// Token matrix [seq.ids.size() x d_model]. Only the first seq.length rows
  /// are computed; padding rows are exactly zero. Throws ConfigError when
  /// seq.length > max_len.
  Var encode(Tape& tape, const TokenSequence& seq);

 private:
  struct Block {
    LayerNorm attn_norm;
    Linear query, key, value, output;
    LayerNorm ff_norm;
    Linear ff_in, ff_out;
  };

  EncoderConfig config_;
  Parameter token_embedding_;
  Parameter position_embedding_;
  Parameter segment_embedding_;
  std::vector<Block> blocks_;
  LayerNorm final_norm_;
};

inline Var encode_contextual(Tape& tape, EncoderModel& model, const TokenSequence& seq) {
  return model.encode(tape, seq);
}

}  // namespace nli
