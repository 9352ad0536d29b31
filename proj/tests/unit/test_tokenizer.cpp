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
#include <sstream>

#include "nli/error.hpp"
#include "nli/rng.hpp"
#include "nli/synth.hpp"
#include "nli/tokenizer.hpp"

using nli::PairOrder;
using nli::TokenId;
using nli::Vocab;

namespace {

constexpr TokenId CLS = nli::kClsId, SEP = nli::kSepId, PAD = nli::kPadId;

Vocab toy_vocab() {
  const std::vector<std::string> corpus = {"a b c d e", "f g"};
  return Vocab::train_bpe(corpus, 0);
}

TokenId id(const Vocab& v, const std::string& token) { return *v.find(token); }

// Fresh reading of the truncation rule: while too long, drop the last token of
// the longer side, the second side on ties.
std::pair<std::size_t, std::size_t> oracle_truncate(std::size_t a, std::size_t b, std::size_t max_len) {
  while (a + b + 3 > max_len) {
    if (a > b) --a;
    else --b;
  }
  return {a, b};
}

void expect_invariants(const nli::TokenSequence& s, std::size_t max_len) {
  ASSERT_EQ(s.ids.size(), max_len);
  ASSERT_EQ(s.segment.size(), max_len);
  ASSERT_EQ(s.mask.size(), max_len);
  EXPECT_EQ(s.ids[0], CLS);
  std::size_t seps = 0, first_sep = 0;
  for (std::size_t i = 0; i < s.length; ++i)
    if (s.ids[i] == SEP && seps++ == 0) first_sep = i;
  EXPECT_EQ(seps, 2u);
  EXPECT_EQ(s.ids[s.length - 1], SEP);
  for (std::size_t i = 0; i < max_len; ++i) {
    EXPECT_EQ(s.mask[i], i < s.length ? 1 : 0);
    if (i < s.length) EXPECT_EQ(s.segment[i], i > first_sep ? 1 : 0);
    else EXPECT_EQ(s.ids[i], PAD);
  }
}

}  // namespace

TEST(Bpe, ZeroMergesGivesCharactersOnly) {
  const std::vector<std::string> corpus = {"ab ba", "c"};
  const Vocab v = Vocab::train_bpe(corpus, 0);
  EXPECT_TRUE(v.merges().empty());
  std::vector<std::string> rest(v.tokens().begin() + nli::kReservedTokens, v.tokens().end());
  std::sort(rest.begin(), rest.end());
  EXPECT_EQ(rest, (std::vector<std::string>{"</w>", "a", "b", "c"}));
  EXPECT_EQ(v.token(nli::kPadId), "[PAD]");
  EXPECT_EQ(v.token(nli::kUnkId), "[UNK]");
  EXPECT_EQ(v.token(nli::kClsId), "[CLS]");
  EXPECT_EQ(v.token(nli::kSepId), "[SEP]");
}

TEST(Bpe, MostFrequentPairMergesFirst) {
  // Pairs: (a,b) x2, (b,</w>) x2, (a,c) x1, (c,</w>) x1. The tie between the
  // count-2 pairs goes to the smaller merged token "ab" < "b</w>".
  const std::vector<std::string> corpus = {"ab", "ab", "ac"};
  const Vocab v = Vocab::train_bpe(corpus, 1);
  ASSERT_EQ(v.merges().size(), 1u);
  EXPECT_EQ(v.merges()[0], (Vocab::Merge{"a", "b"}));
  EXPECT_TRUE(v.find("ab").has_value());
  EXPECT_EQ(v.encode_word("ab"), (std::vector<TokenId>{id(v, "ab"), id(v, "</w>")}));
}

TEST(Bpe, StopsWhenNoPairRemains) {
  const std::vector<std::string> corpus = {"ab"};
  const Vocab v = Vocab::train_bpe(corpus, 50);
  EXPECT_EQ(v.merges().size(), 2u);
  EXPECT_EQ(v.encode_word("ab"), (std::vector<TokenId>{id(v, "ab</w>")}));
}

TEST(Bpe, RetrainingIsDeterministic) {
  nli::SynthConfig cfg;
  cfg.per_label = 30;
  const auto sentences = nli::sentences_of(nli::synth_generate(cfg));
  EXPECT_EQ(Vocab::train_bpe(sentences, 120), Vocab::train_bpe(sentences, 120));
}

TEST(Bpe, EmptyCorpusIsAConfigError) {
  EXPECT_THROW(Vocab::train_bpe(std::vector<std::string>{}, 3), nli::ConfigError);
  EXPECT_THROW(Vocab::train_bpe(std::vector<std::string>{"   "}, 3), nli::ConfigError);
}

TEST(Bpe, UnknownCharactersBecomeUnk) {
  const Vocab v = toy_vocab();
  EXPECT_EQ(v.encode_word("z"), (std::vector<TokenId>{nli::kUnkId, id(v, "</w>")}));
}

TEST(Bpe, MultiByteCharactersStayWhole) {
  const std::vector<std::string> corpus = {"không đi"};
  const Vocab v = Vocab::train_bpe(corpus, 0);
  EXPECT_TRUE(v.find("ô").has_value());
  EXPECT_TRUE(v.find("đ").has_value());
  EXPECT_EQ(nli::utf8_chars("khô"), (std::vector<std::string>{"k", "h", "ô"}));
}

TEST(Bpe, DecodeInvertsEncode) {
  nli::SynthConfig cfg;
  cfg.per_label = 40;
  cfg.negation_fraction = 0.5;
  const auto data = nli::synth_generate(cfg);
  const auto sentences = nli::sentences_of(data);
  for (std::size_t merges : {0u, 25u, 400u}) {
    const Vocab v = Vocab::train_bpe(sentences, merges);
    for (const auto& s : sentences) EXPECT_EQ(v.decode(v.encode(s)), s);
  }
}

TEST(Bpe, TextRoundTrip) {
  nli::SynthConfig cfg;
  cfg.per_label = 20;
  const Vocab v = Vocab::train_bpe(nli::sentences_of(nli::synth_generate(cfg)), 60);
  std::stringstream buf;
  v.write(buf);
  EXPECT_EQ(Vocab::read(buf), v);
}

TEST(Bpe, FromPartsRejectsMissingMergeOutput) {
  EXPECT_THROW(Vocab::from_parts({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "a", "b"}, {{"a", "b"}}), nli::ParseError);
  EXPECT_THROW(Vocab::from_parts({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "a", "a"}, {}), nli::ParseError);
}

TEST(EncodePair, LayoutSegmentAndPadding) {
  const Vocab v = toy_vocab();
  const TokenId a = id(v, "a"), b = id(v, "b"), c = id(v, "c"), w = id(v, "</w>");
  const auto s = nli::assemble_pair({a, b}, {c}, 8);
  EXPECT_EQ(s.ids, (std::vector<TokenId>{CLS, a, b, SEP, c, SEP, PAD, PAD}));
  EXPECT_EQ(s.segment, (std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1, 0, 0}));
  EXPECT_EQ(s.mask, (std::vector<std::uint8_t>{1, 1, 1, 1, 1, 1, 0, 0}));
  EXPECT_EQ(s.length, 6u);
  const auto text = nli::encode_pair(v, "a", "c", 8);
  EXPECT_EQ(text.ids, (std::vector<TokenId>{CLS, a, w, SEP, c, w, SEP, PAD}));
}

TEST(EncodePair, OrderFlagSwapsSides) {
  const Vocab v = toy_vocab();
  const auto hf = nli::encode_pair(v, "a", "b c", 12, PairOrder::hypothesis_first);
  const auto pf = nli::encode_pair(v, "a", "b c", 12, PairOrder::premise_first);
  EXPECT_EQ(hf.ids[1], id(v, "a"));
  EXPECT_EQ(pf.ids[1], id(v, "b"));
  EXPECT_EQ(hf.length, pf.length);
  expect_invariants(pf, 12);
}

TEST(EncodePair, EqualSidesTruncateAlternately) {
  std::vector<TokenId> first(10), second(10);
  for (TokenId i = 0; i < 10; ++i) first[i] = 10 + i, second[i] = 30 + i;
  const auto s = nli::assemble_pair(first, second, 12);
  EXPECT_EQ(s.length, 12u);
  // 23 untruncated positions, 11 removed: sides end at 5 and 4 tokens.
  EXPECT_EQ(s.ids, (std::vector<TokenId>{CLS, 10, 11, 12, 13, 14, SEP, 30, 31, 32, 33, SEP}));
  EXPECT_EQ(oracle_truncate(10, 10, 12), (std::pair<std::size_t, std::size_t>{5, 4}));
}

TEST(EncodePair, TooSmallMaxLenIsAConfigError) {
  EXPECT_THROW(nli::assemble_pair({4}, {5}, 4), nli::ConfigError);
  EXPECT_NO_THROW(nli::assemble_pair({4}, {5}, 5));
}

TEST(EncodePair, RandomPairsKeepInvariants) {
  nli::Rng rng(17);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t a = 1 + rng.below(20), b = 1 + rng.below(20), max_len = 5 + rng.below(40);
    std::vector<TokenId> first(a), second(b);
    for (auto& t : first) t = static_cast<TokenId>(4 + rng.below(50));
    for (auto& t : second) t = static_cast<TokenId>(4 + rng.below(50));
    const auto s = nli::assemble_pair(first, second, max_len);
    expect_invariants(s, max_len);
    const auto [ka, kb] = oracle_truncate(a, b, max_len);
    ASSERT_EQ(s.length, ka + kb + 3) << a << " " << b << " " << max_len;
    EXPECT_TRUE(std::equal(first.begin(), first.begin() + ka, s.ids.begin() + 1));
    EXPECT_TRUE(std::equal(second.begin(), second.begin() + kb, s.ids.begin() + 2 + ka));
  }
}

TEST(CorpusMaxLength, CoversEveryPair) {
  nli::SynthConfig cfg;
  cfg.per_label = 50;
  cfg.negation_fraction = 0.3;
  auto data = nli::synth_generate(cfg);
  const Vocab v = Vocab::train_bpe(nli::sentences_of(data), 80);
  const std::size_t m = nli::corpus_max_length(v, data);
  std::size_t seen = 0;
  for (const auto& p : data) {
    const auto s = nli::encode_pair(v, p.hypothesis, p.premise, m);
    EXPECT_EQ(s.length, nli::encoded_pair_length(v, p.hypothesis, p.premise));
    seen = std::max(seen, s.length);
  }
  EXPECT_EQ(seen, m);
  EXPECT_EQ(nli::corpus_max_length(v, std::span(data).first(1)), nli::encoded_pair_length(v, data[0].hypothesis, data[0].premise));
  nli::ExamplePair longer = data[0];
  longer.premise += " " + longer.premise + " " + longer.premise;
  data.push_back(longer);
  EXPECT_GT(nli::corpus_max_length(v, data), m);
}

TEST(CorpusMaxLength, EmptyDatasetIsAConfigError) {
  const Vocab v = toy_vocab();
  EXPECT_THROW(nli::corpus_max_length(v, std::vector<nli::ExamplePair>{}), nli::ConfigError);
}
