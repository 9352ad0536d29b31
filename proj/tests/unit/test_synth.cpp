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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "nli/error.hpp"
#include "nli/synth.hpp"
#include "nli/tokenizer.hpp"

using nli::Label;

namespace {

std::multiset<std::string_view> bag(const nli::ExamplePair& p) {
  std::multiset<std::string_view> words;
  for (auto w : nli::split_whitespace(p.premise)) words.insert(w);
  for (auto w : nli::split_whitespace(p.hypothesis)) words.insert(w);
  return words;
}

bool has_negation(const nli::ExamplePair& p) {
  for (auto w : nli::split_whitespace(p.hypothesis))
    if (w == nli::kNegationToken) return true;
  return false;
}

}  // namespace

TEST(Synth, ExactBalanceAndDeterminism) {
  nli::SynthConfig cfg;
  cfg.per_label = 100;
  cfg.label_mode = 4;
  const auto a = nli::synth_generate(cfg);
  EXPECT_EQ(a.size(), 400u);
  for (std::size_t c : nli::label_counts(a)) EXPECT_EQ(c, 100u);
  EXPECT_EQ(a, nli::synth_generate(cfg));
  cfg.seed = 2;
  EXPECT_NE(a, nli::synth_generate(cfg));
}

TEST(Synth, ThreeLabelModeHasNoOther) {
  nli::SynthConfig cfg;
  cfg.per_label = 50;
  const auto counts = nli::label_counts(nli::synth_generate(cfg));
  EXPECT_EQ(counts[3], 0u);
  EXPECT_EQ(counts[0], 50u);
}

TEST(Synth, SwappedContradictionsShareAnEntailmentBag) {
  nli::SynthConfig cfg;
  cfg.per_label = 150;
  cfg.label_mode = 4;
  cfg.negation_fraction = 0.3;
  const auto data = nli::synth_generate(cfg);
  std::set<std::multiset<std::string_view>> entail;
  for (const auto& p : data)
    if (p.label == Label::entailment) entail.insert(bag(p));
  std::size_t swapped = 0, negated = 0;
  for (const auto& p : data) {
    if (p.label != Label::contradiction) continue;
    if (has_negation(p)) {
      ++negated;
      continue;
    }
    ++swapped;
    EXPECT_TRUE(entail.count(bag(p))) << p.premise << " / " << p.hypothesis;
  }
  EXPECT_GT(swapped, 0u);
  EXPECT_GT(negated, 0u);
}

TEST(Synth, PairsAreWellFormed) {
  nli::SynthConfig cfg;
  cfg.per_label = 80;
  cfg.label_mode = 4;
  cfg.negation_fraction = 1.0;
  for (const auto& p : nli::synth_generate(cfg)) {
    EXPECT_FALSE(nli::split_whitespace(p.premise).empty());
    EXPECT_FALSE(nli::split_whitespace(p.hypothesis).empty());
    ASSERT_TRUE(p.topic.has_value());
    EXPECT_NE(std::find(std::begin(nli::kSynthTopics), std::end(nli::kSynthTopics), *p.topic),
              std::end(nli::kSynthTopics));
    if (p.label == Label::contradiction) EXPECT_TRUE(has_negation(p));
  }
}

TEST(Synth, OtherHypothesesUseDisjointWords) {
  nli::SynthConfig cfg;
  cfg.per_label = 60;
  cfg.label_mode = 4;
  std::set<std::string_view> main_words, other_words;
  const auto data = nli::synth_generate(cfg);
  for (const auto& p : data) {
    if (p.label != Label::other) {
      for (auto w : bag(p)) main_words.insert(w);
      continue;
    }
    for (auto w : nli::split_whitespace(p.premise)) main_words.insert(w);
    for (auto w : nli::split_whitespace(p.hypothesis)) other_words.insert(w);
  }
  for (auto w : other_words) EXPECT_FALSE(main_words.count(w)) << w;
}

TEST(Synth, InconsistentConfigIsRejected) {
  auto bad = [](auto edit) {
    nli::SynthConfig cfg;
    edit(cfg);
    return cfg;
  };
  EXPECT_THROW(nli::synth_generate(bad([](auto& c) { c.per_label = 0; })), nli::ConfigError);
  EXPECT_THROW(nli::synth_generate(bad([](auto& c) { c.nouns = 2; })), nli::ConfigError);
  EXPECT_THROW(nli::synth_generate(bad([](auto& c) { c.label_mode = 5; })), nli::ConfigError);
  EXPECT_THROW(nli::synth_generate(bad([](auto& c) { c.negation_fraction = 1.5; })), nli::ConfigError);
  EXPECT_THROW(nli::synth_generate(bad([](auto& c) { c.nouns = 100000; })), nli::ConfigError);
}
