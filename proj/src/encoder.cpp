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

#include "nli/encoder.hpp"

#include <numeric>
#include <string>

#include "nli/error.hpp"

namespace nli {

void EncoderConfig::validate() const {
  if (layers == 0 || heads == 0 || d_model == 0 || d_ff == 0 || vocab_size == 0)
    throw ConfigError("encoder sizes must be positive");
  if (d_model % heads != 0)
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  if (max_len < 5) throw ConfigError("encoder max_len must be at least 5");
}

EncoderModel::EncoderModel(const EncoderConfig& config, Rng& rng)
    : config_(config),
      token_embedding_("encoder.token_embedding", Tensor({config.vocab_size, config.d_model})),
      position_embedding_("encoder.position_embedding", Tensor({config.max_len, config.d_model})),
      segment_embedding_("encoder.segment_embedding", Tensor({2, config.d_model})),
      final_norm_("encoder.final_norm", config.d_model) {
  config_.validate();
  init_uniform(token_embedding_.value, 0.1, rng);
  init_uniform(position_embedding_.value, 0.1, rng);
  init_uniform(segment_embedding_.value, 0.1, rng);
  const std::size_t d = config.d_model;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l) + ".";
    blocks_.push_back(Block{LayerNorm(p + "attn_norm", d), Linear(p + "query", d, d, rng), Linear(p + "key", d, d, rng),
                            Linear(p + "value", d, d, rng), Linear(p + "output", d, d, rng),
                            LayerNorm(p + "ff_norm", d), Linear(p + "ff_in", d, config.d_ff, rng),
                            Linear(p + "ff_out", config.d_ff, d, rng)});
  }
}

void EncoderModel::collect(ParameterList& out) {
  out.push_back(&token_embedding_);
  out.push_back(&position_embedding_);
  out.push_back(&segment_embedding_);
  for (Block& b : blocks_) {
    b.attn_norm.collect(out);
    b.query.collect(out);
    b.key.collect(out);
    b.value.collect(out);
    b.output.collect(out);
    b.ff_norm.collect(out);
    b.ff_in.collect(out);
    b.ff_out.collect(out);
  }
  final_norm_.collect(out);
}

Var EncoderModel::encode(Tape& tape, const TokenSequence& seq) {
  const std::size_t n = seq.length;
  if (n == 0) throw ConfigError("cannot encode an empty sequence");
  if (n > config_.max_len)
    throw ConfigError("sequence of " + std::to_string(n) + " tokens exceeds encoder max_len " +
                      std::to_string(config_.max_len) + "; truncate with encode_pair first");
  if (seq.ids.size() < n || seq.segment.size() < n) throw DimensionError("malformed token sequence");

  std::vector<std::size_t> tokens(seq.ids.begin(), seq.ids.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  std::vector<std::size_t> segments(seq.segment.begin(), seq.segment.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t t : tokens)
    if (t >= config_.vocab_size) throw DimensionError("token id " + std::to_string(t) + " outside the vocabulary");

  Var x = ops::add(ops::add(ops::gather_rows(tape.parameter(token_embedding_), tokens),
                            ops::gather_rows(tape.parameter(position_embedding_), positions)),
                   ops::gather_rows(tape.parameter(segment_embedding_), segments));

  // Padding rows are never computed, so attention needs no key mask here:
  // every key it sees is a real position.
  const std::size_t dh = config_.d_model / config_.heads;
  for (Block& b : blocks_) {
    Var h = b.attn_norm.forward(tape, x);
    Var q = b.query.forward(tape, h);
    Var k = b.key.forward(tape, h);
    Var v = b.value.forward(tape, h);
    std::vector<Var> heads;
    heads.reserve(config_.heads);
    for (std::size_t i = 0; i < config_.heads; ++i)
      heads.push_back(ops::attention(ops::slice_cols(q, i * dh, dh), ops::slice_cols(k, i * dh, dh),
                                     ops::slice_cols(v, i * dh, dh)));
    x = ops::add(x, b.output.forward(tape, ops::concat_cols(heads)));
    Var f = b.ff_out.forward(tape, ops::relu(b.ff_in.forward(tape, b.ff_norm.forward(tape, x))));
    x = ops::add(x, f);
  }
  x = final_norm_.forward(tape, x);
  return ops::pad_rows(x, seq.ids.size());
}

}  // namespace nli
