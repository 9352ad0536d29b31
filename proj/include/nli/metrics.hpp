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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace nli {

// counts[gold][predicted].
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::uint64_t at(std::size_t gold, std::size_t pred) const { return counts_[gold * size() + pred]; }
  void add(std::size_t gold, std::size_t pred);
  std::uint64_t total() const noexcept { return total_; }

  std::uint64_t row_total(std::size_t gold) const;
  std::uint64_t column_total(std::size_t pred) const;
  std::uint64_t tp(std::size_t i) const { return at(i, i); }
  std::uint64_t fn(std::size_t i) const { return row_total(i) - tp(i); }
  std::uint64_t fp(std::size_t i) const { return column_total(i) - tp(i); }
  std::uint64_t tn(std::size_t i) const { return total_ - tp(i) - fp(i) - fn(i); }

  /// Header row of predicted labels, then one row per gold label.
  std::string to_csv() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Throws LabelError on a length mismatch or a label >= labels.size().
ConfusionMatrix confusion(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                          std::vector<std::string> labels);

struct MacroMetrics {
  double accuracy = 0.0;   // mean over classes of (tp + tn) / total
  double precision = 0.0;  // mean of tp / (tp + fp), 0 for an empty column
  double recall = 0.0;     // mean of tp / (tp + fn), 0 for an empty row
  double f1 = 0.0;         // 2PR / (P + R) of the macro values
};

/// Throws ConfigError for an empty matrix.
MacroMetrics macro_metrics(const ConfusionMatrix& cm);
/// Fraction of pairs on the diagonal.
double plain_accuracy(const ConfusionMatrix& cm);

/// Recall per gold label; nullopt where the label never occurs.
std::vector<std::optional<double>> per_label_accuracy(const ConfusionMatrix& cm);

struct TopicAccuracy {
  std::string topic;
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

/// Fraction correct per topic, in order of first appearance. Pairs without
/// a topic are left out.
std::vector<TopicAccuracy> per_topic_accuracy(std::span<const std::optional<std::string>> topics,
                                              std::span<const std::size_t> gold, std::span<const std::size_t> pred);

struct EvalReport {
  ConfusionMatrix confusion{{}};
  MacroMetrics macro;
  double plain_accuracy = 0.0;
  std::vector<std::optional<double>> per_label;
  std::vector<TopicAccuracy> per_topic;
};

EvalReport make_report(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                       std::vector<std::string> labels, std::span<const std::optional<std::string>> topics);

nlohmann::ordered_json to_json(const EvalReport& report);
/// Aligned-column plain text.
std::string to_text(const EvalReport& report);

}  // namespace nli
