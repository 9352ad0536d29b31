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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nli/layers.hpp"
#include "nli/tokenizer.hpp"

namespace nli {

/// Width every head input is projected to in the original setup.
inline constexpr std::size_t kFullHeadWidth = 1024;
/// Dimension of the published static word vectors.
inline constexpr std::size_t kFullStaticDim = 300;

// Non-contextual word vectors. Tables read from a word-vector file get one
// extra trailing row, the mean of all loaded rows, used for unknown tokens.
class StaticEmbeddingTable {
 public:
  StaticEmbeddingTable() = default;

  /// One row per token, uniform in [-limit, limit]; trainable.
  static StaticEmbeddingTable random(std::vector<std::string> tokens, std::size_t dim, Rng& rng,
                                     double limit = 0.1);

  /// Zero-filled table with the given word rows (plus a trailing unknown row
  /// when `mean_unknown_row`); used when restoring checkpoints.
  static StaticEmbeddingTable shaped(std::vector<std::string> tokens, std::size_t dim, bool mean_unknown_row);

  /// Plain-text word vectors: header "V d", then V lines of a token and d
  /// numbers. Frozen unless `trainable`. Errors name the 1-based line.
  static StaticEmbeddingTable read(std::istream& in, bool trainable = false);
  static StaticEmbeddingTable load(const std::filesystem::path& path, bool trainable = false);
  /// Writes the word rows (not the synthesized unknown row).
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  std::size_t word_rows() const noexcept { return tokens_.size(); }
  std::size_t dim() const { return matrix.value.dim(1); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::optional<std::size_t> row_of(std::string_view token) const;
  /// Row used for tokens the table does not know.
  std::size_t unknown_row() const noexcept { return unknown_row_; }
  bool has_mean_unknown_row() const noexcept { return mean_unknown_; }

  /// For every vocabulary id, the table row it reads. Tokens are matched
  /// exactly, then with the end-of-word marker stripped.
  std::vector<std::size_t> row_map(const Vocab& vocab) const;

  Parameter matrix{"static.table", Tensor()};

 private:
  void index();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> rows_;
  std::size_t unknown_row_ = 0;
  bool mean_unknown_ = false;
};

/// Rows of the real, non-special tokens of `seq`. Throws ConfigError when
/// there are none.
std::vector<std::size_t> pooled_rows(const TokenSequence& seq, std::span<const std::size_t> row_of_id);

/// Mean of the embeddings of the real non-special tokens -> [1 x d].
Var mean_pool_encode(Tape& tape, StaticEmbeddingTable& table, std::span<const std::size_t> row_of_id,
                     const TokenSequence& seq);

/// Affine projection to the shared head width; throws DimensionError when x
/// does not have proj.in() columns.
Var project_to_width(Tape& tape, Linear& proj, Var x);

}  // namespace nli
