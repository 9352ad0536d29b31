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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nli {

// Index order follows the three-label convention (entailment, contradiction,
// neutral) with "other" appended for the four-label schema.
enum class Label : std::uint8_t { entailment = 0, contradiction = 1, neutral = 2, other = 3 };

inline constexpr std::array<std::string_view, 4> kLabelNames = {"entailment", "contradiction", "neutral", "other"};

std::string_view label_name(Label label);
/// Case-insensitive; throws LabelError for anything else.
Label parse_label(std::string_view name);

class LabelSchema {
 public:
  /// mode is 3 or 4; throws ConfigError otherwise.
  explicit LabelSchema(int mode = 3);

  int mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(mode_); }
  bool contains(Label label) const noexcept { return static_cast<int>(label) < mode_; }
  /// Dense index of a label in this schema; throws LabelError when excluded.
  std::size_t index(Label label) const;
  Label label(std::size_t index) const;
  std::vector<std::string> names() const;

  friend bool operator==(const LabelSchema&, const LabelSchema&) = default;

 private:
  int mode_;
};

struct ExamplePair {
  std::string premise;
  std::string hypothesis;
  Label label = Label::entailment;
  std::optional<std::string> topic;

  friend bool operator==(const ExamplePair&, const ExamplePair&) = default;
};

using Dataset = std::vector<ExamplePair>;

struct LoadResult {
  Dataset pairs;
  std::size_t dropped_other = 0;  // "other" rows skipped in three-label mode
};

/// Reads JSON-lines ({"premise", "hypothesis", "label", "topic"?} per line) or,
/// for a .tsv path, tab-separated rows under a header naming those columns.
/// Errors carry the offending 1-based line number.
LoadResult load_dataset(const std::filesystem::path& path, const LabelSchema& schema);
LoadResult parse_jsonl(std::string_view text, const LabelSchema& schema);
LoadResult parse_tsv(std::string_view text, const LabelSchema& schema);

/// JSON-lines, one object per pair, fields in canonical order.
void save_dataset(const std::filesystem::path& path, std::span<const ExamplePair> pairs);
std::string to_jsonl(std::span<const ExamplePair> pairs);

struct Splits {
  Dataset train, dev, test;
};

/// Stratified seeded split: each label is shuffled and cut by `ratios`
/// (train, dev, test), then each split is shuffled again. Ratios must be
/// non-negative and sum to 1.
Splits split(std::span<const ExamplePair> pairs, std::array<double, 3> ratios, std::uint64_t seed);

/// Count of pairs per label, indexed by Label value (size 4).
std::array<std::size_t, 4> label_counts(std::span<const ExamplePair> pairs);

}  // namespace nli
