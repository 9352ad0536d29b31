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
#include <string_view>

#include <json.hpp>

#include "nli/data.hpp"

namespace nli {

inline constexpr std::string_view kNegationToken = "không";

/// Topic tags attached to generated pairs.
inline constexpr std::array<std::string_view, 13> kSynthTopics = {
    "Technology", "Tourism", "Education", "Entertainment", "Science", "Business", "Law",
    "Health",     "World",   "Sports",    "News",          "Vehicles", "Life"};

// Rule-based subject-verb-object pairs.
//   entailment:    the hypothesis restates the premise's triple
//   contradiction: subject and object swapped, or (with probability
//                  negation_fraction) the negation token inserted before the verb
//   neutral:       same subject, another verb and object
//   other:         words drawn from a disjoint vocabulary
// Entailment and contradiction pairs are built together from one triple, so
// every swapped contradiction has exactly the tokens of an entailment pair.
struct SynthConfig {
  std::size_t nouns = 24;
  std::size_t verbs = 12;
  std::size_t adverbs = 6;  // 0 disables the optional trailing adverb
  std::size_t per_label = 100;
  int label_mode = 3;
  double negation_fraction = 0.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError.
  void validate() const;
};

nlohmann::ordered_json to_json(const SynthConfig& config);

/// per_label pairs for every label of the schema, shuffled.
Dataset synth_generate(const SynthConfig& config);

}  // namespace nli
