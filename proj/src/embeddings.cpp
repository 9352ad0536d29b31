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

#include "nli/embeddings.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "nli/error.hpp"

namespace nli {
namespace {

double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, "invalid number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, "invalid count '" + std::string(s) + "'");
  return v;
}

}  // namespace

void StaticEmbeddingTable::index() {
  rows_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) rows_.emplace(tokens_[i], i);
}

StaticEmbeddingTable StaticEmbeddingTable::random(std::vector<std::string> tokens, std::size_t dim, Rng& rng,
                                                  double limit) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  if (tokens.empty()) throw ConfigError("embedding table needs at least one token");
  StaticEmbeddingTable t;
  t.tokens_ = std::move(tokens);
  t.matrix.value = Tensor({t.tokens_.size(), dim});
  init_uniform(t.matrix.value, limit, rng);
  t.matrix.trainable = true;
  t.unknown_row_ = kUnkId < t.tokens_.size() ? kUnkId : 0;
  t.index();
  return t;
}

StaticEmbeddingTable StaticEmbeddingTable::shaped(std::vector<std::string> tokens, std::size_t dim,
                                                  bool mean_unknown_row) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  if (tokens.empty()) throw ConfigError("embedding table needs at least one token");
  StaticEmbeddingTable t;
  t.tokens_ = std::move(tokens);
  t.mean_unknown_ = mean_unknown_row;
  t.unknown_row_ = mean_unknown_row ? t.tokens_.size() : (kUnkId < t.tokens_.size() ? kUnkId : 0);
  t.matrix.value = Tensor({t.tokens_.size() + (mean_unknown_row ? 1 : 0), dim});
  t.index();
  return t;
}

StaticEmbeddingTable StaticEmbeddingTable::read(std::istream& in, bool trainable) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "missing \"V d\" header");
  auto header = split_whitespace(line);
  if (header.size() != 2) throw ParseError(1, "header must be \"V d\"");
  const std::size_t V = parse_count(header[0], 1);
  const std::size_t d = parse_count(header[1], 1);
  if (d == 0) throw ParseError(1, "dimension must be positive");
  if (V == 0) throw ParseError(1, "table must hold at least one vector");

  StaticEmbeddingTable t;
  std::vector<double> data;
  data.reserve((V + 1) * d);
  while (t.tokens_.size() < V) {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, "expected " + std::to_string(V) + " vectors, file ended");
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) throw ParseError(line_no, "empty line");
    if (fields.size() != d + 1)
      throw ParseError(line_no, "expected " + std::to_string(d) + " values, got " + std::to_string(fields.size() - 1));
    for (std::size_t j = 1; j <= d; ++j) data.push_back(parse_number(fields[j], line_no));
    t.tokens_.emplace_back(fields[0]);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_whitespace(line).empty()) throw ParseError(line_no, "more vectors than the header declares");
  }

  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < V; ++i) s += data[i * d + j];
    data.push_back(s / static_cast<double>(V));
  }
  t.matrix.value = Tensor({V + 1, d}, std::move(data));
  t.matrix.value.require_finite("word-vector file");
  t.matrix.trainable = trainable;
  t.unknown_row_ = V;
  t.mean_unknown_ = true;
  t.index();
  return t;
}

StaticEmbeddingTable StaticEmbeddingTable::load(const std::filesystem::path& path, bool trainable) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open word vectors " + path.string());
  return read(in, trainable);
}

void StaticEmbeddingTable::write(std::ostream& out) const {
  const std::size_t d = dim();
  out << tokens_.size() << ' ' << d << '\n';
  char buf[32];
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i];
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix.value.at(i, j));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

void StaticEmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write word vectors " + path.string());
  write(out);
  if (!out) throw IoError("failed writing " + path.string());
}

std::optional<std::size_t> StaticEmbeddingTable::row_of(std::string_view token) const {
  auto it = rows_.find(std::string(token));
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> StaticEmbeddingTable::row_map(const Vocab& vocab) const {
  std::vector<std::size_t> map(vocab.size(), unknown_row_);
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    std::string_view tok = vocab.token(static_cast<TokenId>(id));
    if (auto r = row_of(tok)) {
      map[id] = *r;
      continue;
    }
    if (tok.size() > kEndOfWord.size() && tok.substr(tok.size() - kEndOfWord.size()) == kEndOfWord) {
      tok.remove_suffix(kEndOfWord.size());
      if (auto r = row_of(tok)) map[id] = *r;
    }
  }
  return map;
}

std::vector<std::size_t> pooled_rows(const TokenSequence& seq, std::span<const std::size_t> row_of_id) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < seq.length; ++i) {
    const TokenId id = seq.ids[i];
    if (Vocab::is_special(id) && id != kUnkId) continue;
    if (id >= row_of_id.size()) throw DimensionError("token id " + std::to_string(id) + " outside the row map");
    rows.push_back(row_of_id[id]);
  }
  if (rows.empty()) throw ConfigError("mean pooling needs at least one real non-special token");
  return rows;
}

Var mean_pool_encode(Tape& tape, StaticEmbeddingTable& table, std::span<const std::size_t> row_of_id,
                     const TokenSequence& seq) {
  const auto rows = pooled_rows(seq, row_of_id);
  return ops::mean_rows(ops::gather_rows(tape.parameter(table.matrix), rows));
}

Var project_to_width(Tape& tape, Linear& proj, Var x) {
  if (x.value().rank() != 2 || x.value().cols() != proj.in())
    throw DimensionError("projection expects " + std::to_string(proj.in()) + " input columns, got " +
                         to_string(x.shape()));
  return proj.forward(tape, x);
}

}  // namespace nli
