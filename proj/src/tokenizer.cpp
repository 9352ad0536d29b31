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

#include "nli/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "nli/error.hpp"

namespace nli {
namespace {

constexpr std::array<std::string_view, kReservedTokens> kReserved = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
constexpr std::string_view kMergesHeader = "#merges";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

// A word as its current split into symbol strings.
using Symbols = std::vector<std::string>;

Symbols initial_symbols(std::string_view word) {
  Symbols s = utf8_chars(word);
  s.emplace_back(kEndOfWord);
  return s;
}

void apply_merge(Symbols& s, const std::string& left, const std::string& right) {
  Symbols out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && s[i] == left && s[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(std::move(s[i]));
    }
  }
  s = std::move(out);
}

}  // namespace

std::vector<std::string> utf8_chars(std::string_view word) {
  std::vector<std::string> chars;
  for (std::size_t i = 0; i < word.size();) {
    std::size_t n = utf8_length(static_cast<unsigned char>(word[i]));
    if (i + n > word.size()) n = 1;
    for (std::size_t k = 1; k < n; ++k)
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) n = 1;
    chars.emplace_back(word.substr(i, n));
    i += n;
  }
  return chars;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

void Vocab::index() {
  ids_.clear();
  rank_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
      throw ParseError(0, "duplicate vocabulary token '" + tokens_[i] + "'");
  }
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto& [l, rt] = merges_[r];
    if (!ids_.count(l + rt)) throw ParseError(0, "merge output '" + l + rt + "' missing from vocabulary");
    rank_.emplace(merges_[r], r);
  }
}

Vocab Vocab::from_parts(std::vector<std::string> tokens, std::vector<Merge> merges) {
  if (tokens.size() < kReservedTokens) throw ParseError(0, "vocabulary lacks the reserved tokens");
  for (std::size_t i = 0; i < kReservedTokens; ++i)
    if (tokens[i] != kReserved[i])
      throw ParseError(0, "token " + std::to_string(i) + " must be " + std::string(kReserved[i]));
  Vocab v;
  v.tokens_ = std::move(tokens);
  v.merges_ = std::move(merges);
  v.index();
  return v;
}

Vocab Vocab::train_bpe(std::span<const std::string> corpus, std::size_t merges) {
  if (corpus.empty()) throw ConfigError("train_bpe: empty corpus");

  std::map<std::string, std::size_t> word_counts;
  for (const auto& sentence : corpus)
    for (auto w : split_whitespace(sentence)) ++word_counts[std::string(w)];
  if (word_counts.empty()) throw ConfigError("train_bpe: corpus contains no words");

  std::vector<std::pair<Symbols, std::size_t>> words;
  std::set<std::string> alphabet;
  for (const auto& [w, n] : word_counts) {
    Symbols s = initial_symbols(w);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) alphabet.insert(s[i]);
    words.emplace_back(std::move(s), n);
  }

  std::vector<std::string> tokens(kReserved.begin(), kReserved.end());
  tokens.insert(tokens.end(), alphabet.begin(), alphabet.end());
  tokens.emplace_back(kEndOfWord);
  std::set<std::string> known(tokens.begin(), tokens.end());

  std::vector<Merge> merge_list;
  for (std::size_t step = 0; step < merges; ++step) {
    std::map<Merge, std::size_t> pair_counts;
    for (const auto& [s, n] : words)
      for (std::size_t i = 0; i + 1 < s.size(); ++i) pair_counts[{s[i], s[i + 1]}] += n;
    if (pair_counts.empty()) break;

    const Merge* best = nullptr;
    std::size_t best_count = 0;
    std::string best_token;
    for (const auto& [pair, n] : pair_counts) {
      std::string merged = pair.first + pair.second;
      // std::map iterates pairs in ascending order, so on equal count and
      // equal merged text the first pair seen is already the smallest.
      if (n > best_count || (n == best_count && merged < best_token)) {
        best = &pair;
        best_count = n;
        best_token = std::move(merged);
      }
    }
    const Merge chosen = *best;
    for (auto& [s, n] : words) apply_merge(s, chosen.first, chosen.second);
    merge_list.push_back(chosen);
    if (known.insert(best_token).second) tokens.push_back(best_token);
  }
  return from_parts(std::move(tokens), std::move(merge_list));
}

Vocab Vocab::read(std::istream& in) {
  std::vector<std::string> tokens;
  std::vector<Merge> merges;
  std::string line;
  std::size_t line_no = 0;
  bool in_merges = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!in_merges) {
      if (line == kMergesHeader) {
        in_merges = true;
        continue;
      }
      if (line.empty()) throw ParseError(line_no, "empty token line");
      tokens.push_back(line);
    } else {
      if (line.empty()) continue;
      const auto parts = split_whitespace(line);
      if (parts.size() != 2) throw ParseError(line_no, "merge line must hold exactly two tokens");
      merges.emplace_back(std::string(parts[0]), std::string(parts[1]));
    }
  }
  if (!in_merges) throw ParseError(line_no, "missing \"#merges\" section");
  return from_parts(std::move(tokens), std::move(merges));
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  return read(in);
}

void Vocab::write(std::ostream& out) const {
  for (const auto& t : tokens_) out << t << '\n';
  out << kMergesHeader << '\n';
  for (const auto& [l, r] : merges_) out << l << ' ' << r << '\n';
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  write(out);
  if (!out) throw IoError("failed writing " + path.string());
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocab::encode_word(std::string_view word) const {
  Symbols s = initial_symbols(word);
  for (;;) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      auto it = rank_.find({s[i], s[i + 1]});
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == merges_.size()) break;
    apply_merge(s, merges_[best_rank].first, merges_[best_rank].second);
  }
  std::vector<TokenId> ids;
  ids.reserve(s.size());
  for (const auto& sym : s) {
    auto id = find(sym);
    ids.push_back(id ? *id : kUnkId);
  }
  return ids;
}

std::vector<TokenId> Vocab::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (auto w : split_whitespace(text)) {
    auto piece = encode_word(w);
    ids.insert(ids.end(), piece.begin(), piece.end());
  }
  return ids;
}

std::string Vocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (!out.empty()) out += ' ';
    out += word;
    word.clear();
  };
  for (TokenId id : ids) {
    if (id == kUnkId) {
      word += kReserved[kUnkId];
      continue;
    }
    if (is_special(id)) continue;
    std::string_view t = token(id);
    const bool ends_word = t.size() >= kEndOfWord.size() && t.substr(t.size() - kEndOfWord.size()) == kEndOfWord;
    if (ends_word) t.remove_suffix(kEndOfWord.size());
    word += t;
    if (ends_word) flush();
  }
  flush();
  return out;
}

TokenSequence assemble_pair(std::vector<TokenId> first, std::vector<TokenId> second, std::size_t max_len) {
  if (max_len < 5) throw ConfigError("max_len must be at least 5, got " + std::to_string(max_len));
  // Longer side first; ties drop from the second side, so equal sides end up
  // alternating.
  while (first.size() + second.size() + 3 > max_len) {
    if (first.size() > second.size())
      first.pop_back();
    else
      second.pop_back();
  }
  TokenSequence seq;
  seq.ids.reserve(max_len);
  seq.ids.push_back(kClsId);
  seq.ids.insert(seq.ids.end(), first.begin(), first.end());
  seq.ids.push_back(kSepId);
  const std::size_t first_end = seq.ids.size();
  seq.ids.insert(seq.ids.end(), second.begin(), second.end());
  seq.ids.push_back(kSepId);
  seq.length = seq.ids.size();
  seq.segment.assign(max_len, 0);
  seq.mask.assign(max_len, 0);
  for (std::size_t i = 0; i < seq.length; ++i) {
    seq.mask[i] = 1;
    seq.segment[i] = i >= first_end ? 1 : 0;
  }
  seq.ids.resize(max_len, kPadId);
  return seq;
}

TokenSequence encode_pair(const Vocab& vocab, std::string_view hypothesis, std::string_view premise,
                          std::size_t max_len, PairOrder order) {
  if (max_len < 5) throw ConfigError("max_len must be at least 5, got " + std::to_string(max_len));
  auto h = vocab.encode(hypothesis);
  auto p = vocab.encode(premise);
  if (order == PairOrder::hypothesis_first) return assemble_pair(std::move(h), std::move(p), max_len);
  return assemble_pair(std::move(p), std::move(h), max_len);
}

std::size_t encoded_pair_length(const Vocab& vocab, std::string_view hypothesis, std::string_view premise) {
  return vocab.encode(hypothesis).size() + vocab.encode(premise).size() + 3;
}

std::size_t corpus_max_length(const Vocab& vocab, std::span<const ExamplePair> dataset) {
  if (dataset.empty()) throw ConfigError("corpus_max_length: empty dataset");
  std::size_t best = 0;
  for (const auto& ex : dataset) best = std::max(best, encoded_pair_length(vocab, ex.hypothesis, ex.premise));
  return best;
}

std::vector<std::string> sentences_of(std::span<const ExamplePair> dataset) {
  std::vector<std::string> out;
  out.reserve(2 * dataset.size());
  for (const auto& ex : dataset) {
    out.push_back(ex.premise);
    out.push_back(ex.hypothesis);
  }
  return out;
}

}  // namespace nli
