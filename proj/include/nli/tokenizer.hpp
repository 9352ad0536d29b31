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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nli/data.hpp"

namespace nli {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kSepId = 3;
inline constexpr std::size_t kReservedTokens = 4;
inline constexpr std::string_view kEndOfWord = "</w>";

// Subword vocabulary learned by byte-pair merging over whitespace-separated
// words. Words are split into UTF-8 code points plus an end-of-word marker.
// Immutable once built.
class Vocab {
 public:
  using Merge = std::pair<std::string, std::string>;

  /// Greedy highest-count pair merging; ties go to the lexicographically
  /// smallest merged token (then the smallest pair). Stops early when no
  /// adjacent pair remains. Throws ConfigError on an empty corpus.
  static Vocab train_bpe(std::span<const std::string> corpus, std::size_t merges);

  /// Text format: one token per line in id order, then a "#merges" line,
  /// then one "left right" merge per line.
  static Vocab read(std::istream& in);
  static Vocab load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  /// Rebuild from parts, validating the invariants (reserved tokens first,
  /// unique tokens, every merge output present).
  static Vocab from_parts(std::vector<std::string> tokens, std::vector<Merge> merges);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  const std::vector<Merge>& merges() const noexcept { return merges_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::optional<TokenId> find(std::string_view token) const;
  static bool is_special(TokenId id) noexcept { return id < kReservedTokens; }

  std::vector<TokenId> encode_word(std::string_view word) const;
  /// Whitespace-split `text` and encode every word.
  std::vector<TokenId> encode(std::string_view text) const;
  /// Inverse of encode() for in-vocabulary text: specials are skipped and
  /// words are rejoined with single spaces.
  std::string decode(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_ && a.merges_ == b.merges_;
  }

 private:
  Vocab() = default;
  void index();

  std::vector<std::string> tokens_;
  std::vector<Merge> merges_;
  std::unordered_map<std::string, TokenId> ids_;
  std::map<Merge, std::size_t> rank_;
};

/// Split UTF-8 text into code points (invalid bytes become single units).
std::vector<std::string> utf8_chars(std::string_view word);
std::vector<std::string_view> split_whitespace(std::string_view text);

enum class PairOrder { hypothesis_first, premise_first };

// [CLS] first [SEP] second [SEP] followed by padding.
struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> segment;  // 0 up to and including the first [SEP], 1 for the second side
  std::vector<std::uint8_t> mask;     // 1 for real positions, 0 for padding
  std::size_t length = 0;             // real positions

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Encode a pair into exactly `max_len` positions. When the untruncated
/// sequence is too long, tokens are dropped from the end of the longer side;
/// on equal lengths the second side loses the token. Throws ConfigError when
/// max_len < 5.
TokenSequence encode_pair(const Vocab& vocab, std::string_view hypothesis, std::string_view premise,
                          std::size_t max_len, PairOrder order = PairOrder::hypothesis_first);

/// Lower-level form over already-encoded sides.
TokenSequence assemble_pair(std::vector<TokenId> first, std::vector<TokenId> second, std::size_t max_len);

/// Untruncated encoded length (both sides plus three specials).
std::size_t encoded_pair_length(const Vocab& vocab, std::string_view hypothesis, std::string_view premise);

/// Longest untruncated encoding over the dataset; using it as max_len means
/// no pair is ever truncated. Throws ConfigError on an empty dataset.
std::size_t corpus_max_length(const Vocab& vocab, std::span<const ExamplePair> dataset);

/// Every sentence (premise and hypothesis) of the dataset, for BPE training.
std::vector<std::string> sentences_of(std::span<const ExamplePair> dataset);

}  // namespace nli
