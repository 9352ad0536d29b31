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

#include "nli/synth.hpp"

#include <set>
#include <string>
#include <vector>

#include "nli/error.hpp"
#include "nli/rng.hpp"

namespace nli {
namespace {

constexpr std::array<std::string_view, 14> kConsonants = {"b", "c", "d", "g", "h", "k", "l",
                                                          "m", "n", "p", "r", "s", "t", "v"};
constexpr std::array<std::string_view, 10> kVowels = {"a", "e", "i", "o", "u", "ơ", "ư", "â", "ê", "ô"};

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) { used_.insert(std::string(kNegationToken)); }

  std::vector<std::string> words(std::size_t n) {
    std::vector<std::string> out;
    while (out.size() < n) {
      std::string w;
      for (int s = 0; s < 2; ++s) {
        w += kConsonants[rng_.below(kConsonants.size())];
        w += kVowels[rng_.below(kVowels.size())];
      }
      if (used_.insert(w).second) out.push_back(std::move(w));
    }
    return out;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

struct Lexicon {
  std::vector<std::string> nouns, verbs, adverbs;
};

std::string sentence(std::initializer_list<std::string_view> words) {
  std::string out;
  for (auto w : words) {
    if (w.empty()) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (label_mode != 3 && label_mode != 4) throw ConfigError("synthetic label mode must be 3 or 4");
  if (nouns < 3) throw ConfigError("synthetic corpus needs at least 3 nouns");
  if (verbs < 2) throw ConfigError("synthetic corpus needs at least 2 verbs");
  if (per_label == 0) throw ConfigError("per_label must be positive");
  if (!(negation_fraction >= 0.0 && negation_fraction <= 1.0))
    throw ConfigError("negation_fraction must lie in [0, 1]");
  // CVCV syllables give 14^2 * 10^2 distinct words.
  const std::size_t pool = kConsonants.size() * kConsonants.size() * kVowels.size() * kVowels.size();
  if (2 * (nouns + verbs) + adverbs >= pool) throw ConfigError("synthetic vocabulary larger than the word space");
}

nlohmann::ordered_json to_json(const SynthConfig& c) {
  return {{"nouns", c.nouns},       {"verbs", c.verbs},
          {"adverbs", c.adverbs},   {"per_label", c.per_label},
          {"label_mode", c.label_mode}, {"negation_fraction", c.negation_fraction},
          {"seed", c.seed}};
}

Dataset synth_generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  WordMaker maker(rng);
  Lexicon main{maker.words(config.nouns), maker.words(config.verbs), maker.words(config.adverbs)};
  Lexicon disjoint{maker.words(config.nouns), maker.words(config.verbs), {}};

  auto pick = [&rng](const std::vector<std::string>& v) -> const std::string& { return v[rng.below(v.size())]; };
  auto topic = [&rng] { return std::optional<std::string>(kSynthTopics[rng.below(kSynthTopics.size())]); };
  auto adverb = [&]() -> std::string {
    if (main.adverbs.empty() || rng.below(2) == 0) return {};
    return pick(main.adverbs);
  };
  auto triple = [&](const Lexicon& lex, std::string& s, std::string& v, std::string& o) {
    s = pick(lex.nouns);
    v = pick(lex.verbs);
    do o = pick(lex.nouns);
    while (o == s);
  };

  Dataset out;
  out.reserve(config.per_label * static_cast<std::size_t>(config.label_mode));
  std::string s, v, o;
  for (std::size_t i = 0; i < config.per_label; ++i) {
    triple(main, s, v, o);
    const std::string adv = adverb();
    const auto t = topic();
    const std::string premise = sentence({s, v, o, adv});
    out.push_back({premise, sentence({s, v, o}), Label::entailment, t});
    if (rng.uniform() < config.negation_fraction)
      out.push_back({premise, sentence({s, kNegationToken, v, o}), Label::contradiction, t});
    else
      out.push_back({premise, sentence({o, v, s}), Label::contradiction, t});
  }
  for (std::size_t i = 0; i < config.per_label; ++i) {
    triple(main, s, v, o);
    std::string v2, o2;
    do v2 = pick(main.verbs);
    while (v2 == v);
    do o2 = pick(main.nouns);
    while (o2 == o || o2 == s);
    out.push_back({sentence({s, v, o, adverb()}), sentence({s, v2, o2}), Label::neutral, topic()});
  }
  if (config.label_mode == 4) {
    for (std::size_t i = 0; i < config.per_label; ++i) {
      triple(main, s, v, o);
      const std::string premise = sentence({s, v, o, adverb()});
      triple(disjoint, s, v, o);
      out.push_back({premise, sentence({s, v, o}), Label::other, topic()});
    }
  }
  rng.shuffle(std::span<ExamplePair>(out));
  return out;
}

}  // namespace nli
