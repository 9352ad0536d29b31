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

#include "nli/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nli/error.hpp"
#include "nli/rng.hpp"

namespace nli {
namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

void accept(LoadResult& out, ExamplePair pair, const LabelSchema& schema, std::size_t line) {
  if (blank(pair.premise)) throw ParseError(line, "empty premise");
  if (blank(pair.hypothesis)) throw ParseError(line, "empty hypothesis");
  if (!schema.contains(pair.label)) {
    ++out.dropped_other;
    return;
  }
  out.pairs.push_back(std::move(pair));
}

Label label_at(std::string_view name, std::size_t line) {
  try {
    return parse_label(name);
  } catch (const LabelError& e) {
    throw ParseError(line, e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view label_name(Label label) { return kLabelNames.at(static_cast<std::size_t>(label)); }

Label parse_label(std::string_view name) {
  const std::string lower = lowercase(name);
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (lower == kLabelNames[i]) return static_cast<Label>(i);
  throw LabelError("unknown label '" + std::string(name) + "'");
}

LabelSchema::LabelSchema(int mode) : mode_(mode) {
  if (mode != 3 && mode != 4) throw ConfigError("label mode must be 3 or 4, got " + std::to_string(mode));
}

std::size_t LabelSchema::index(Label label) const {
  if (!contains(label))
    throw LabelError("label '" + std::string(label_name(label)) + "' is not part of the " + std::to_string(mode_) +
                     "-label schema");
  return static_cast<std::size_t>(label);
}

Label LabelSchema::label(std::size_t index) const {
  if (index >= size()) throw LabelError("label index " + std::to_string(index) + " out of range");
  return static_cast<Label>(index);
}

std::vector<std::string> LabelSchema::names() const {
  return {kLabelNames.begin(), kLabelNames.begin() + mode_};
}

LoadResult parse_jsonl(std::string_view text, const LabelSchema& schema) {
  LoadResult out;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (blank(lines[i])) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "expected a JSON object");
    auto field = [&](const char* name) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end()) throw ParseError(line, std::string("missing field \"") + name + "\"");
      if (!it->is_string()) throw ParseError(line, std::string("field \"") + name + "\" must be a string");
      return it->get<std::string>();
    };
    ExamplePair pair;
    pair.premise = field("premise");
    pair.hypothesis = field("hypothesis");
    pair.label = label_at(field("label"), line);
    if (auto it = obj.find("topic"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(line, "field \"topic\" must be a string");
      pair.topic = it->get<std::string>();
    }
    accept(out, std::move(pair), schema, line);
  }
  return out;
}

LoadResult parse_tsv(std::string_view text, const LabelSchema& schema) {
  auto split_tabs = [](std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    return cells;
  };

  LoadResult out;
  const auto lines = lines_of(text);
  std::size_t header_line = 0;
  while (header_line < lines.size() && blank(lines[header_line])) ++header_line;
  if (header_line == lines.size()) return out;

  std::map<std::string, std::size_t> column;
  const auto header = split_tabs(lines[header_line]);
  for (std::size_t c = 0; c < header.size(); ++c) column[lowercase(header[c])] = c;
  for (const char* required : {"premise", "hypothesis", "label"})
    if (!column.count(required))
      throw ParseError(header_line + 1, std::string("header lacks a \"") + required + "\" column");
  const auto topic_col = column.find("topic");

  for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (blank(lines[i])) continue;
    const auto cells = split_tabs(lines[i]);
    if (cells.size() != header.size())
      throw ParseError(line, "expected " + std::to_string(header.size()) + " columns, got " +
                                 std::to_string(cells.size()));
    ExamplePair pair;
    pair.premise = std::string(cells[column["premise"]]);
    pair.hypothesis = std::string(cells[column["hypothesis"]]);
    pair.label = label_at(cells[column["label"]], line);
    if (topic_col != column.end() && !cells[topic_col->second].empty())
      pair.topic = std::string(cells[topic_col->second]);
    accept(out, std::move(pair), schema, line);
  }
  return out;
}

LoadResult load_dataset(const std::filesystem::path& path, const LabelSchema& schema) {
  const std::string text = slurp(path);
  if (lowercase(path.extension().string()) == ".tsv") return parse_tsv(text, schema);
  return parse_jsonl(text, schema);
}

std::string to_jsonl(std::span<const ExamplePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json obj;
    obj["premise"] = p.premise;
    obj["hypothesis"] = p.hypothesis;
    obj["label"] = label_name(p.label);
    if (p.topic) obj["topic"] = *p.topic;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, std::span<const ExamplePair> pairs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << to_jsonl(pairs);
  if (!os) throw IoError("failed writing " + path.string());
}

Splits split(std::span<const ExamplePair> pairs, std::array<double, 3> ratios, std::uint64_t seed) {
  for (double r : ratios)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("split ratios must be finite and non-negative");
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1, got " + std::to_string(total));

  std::array<std::vector<std::size_t>, 4> by_label;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_label[static_cast<std::size_t>(pairs[i].label)].push_back(i);

  Rng rng(seed);
  Splits out;
  for (auto& members : by_label) {
    rng.shuffle(std::span<std::size_t>(members));
    const double n = static_cast<double>(members.size());
    const auto train_end = static_cast<std::size_t>(std::llround(n * ratios[0]));
    const auto dev_end = std::min(members.size(), static_cast<std::size_t>(std::llround(n * (ratios[0] + ratios[1]))));
    for (std::size_t k = 0; k < members.size(); ++k) {
      Dataset& dst = k < train_end ? out.train : (k < dev_end ? out.dev : out.test);
      dst.push_back(pairs[members[k]]);
    }
  }
  rng.shuffle(std::span<ExamplePair>(out.train));
  rng.shuffle(std::span<ExamplePair>(out.dev));
  rng.shuffle(std::span<ExamplePair>(out.test));
  return out;
}

std::array<std::size_t, 4> label_counts(std::span<const ExamplePair> pairs) {
  std::array<std::size_t, 4> counts{};
  for (const auto& p : pairs) ++counts[static_cast<std::size_t>(p.label)];
  return counts;
}

}  // namespace nli
