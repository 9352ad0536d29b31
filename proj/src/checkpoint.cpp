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

#include "nli/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "nli/error.hpp"

namespace nli {
namespace {

constexpr std::string_view kMagic = "NLICKPT1";

void put_le(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

double from_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

nlohmann::ordered_json manifest_of(NliModel& model) {
  nlohmann::ordered_json m;
  m["format"] = "nli-checkpoint";
  m["version"] = kCheckpointVersion;
  m["dtype"] = "float64-le";
  m["model"] = to_json(model.config());
  m["vocab"] = {{"tokens", model.vocab().tokens()}, {"merges", nlohmann::ordered_json::array()}};
  for (const auto& [l, r] : model.vocab().merges()) m["vocab"]["merges"].push_back({l, r});
  if (const StaticEmbeddingTable* t = model.static_table())
    m["static_table"] = {{"tokens", t->tokens()}, {"mean_unknown_row", t->has_mean_unknown_row()}};
  auto params = nlohmann::ordered_json::array();
  for (const Parameter* p : model.parameters()) params.push_back({{"name", p->name}, {"shape", p->value.shape()}});
  m["parameters"] = params;
  return m;
}

std::unique_ptr<NliModel> build(const nlohmann::json& m) {
  try {
    if (m.at("format").get<std::string>() != "nli-checkpoint") throw SchemaError("not an nli checkpoint manifest");
    const int version = m.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw SchemaError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    if (m.at("dtype").get<std::string>() != "float64-le") throw SchemaError("unsupported checkpoint dtype");
    const ModelConfig config = model_config_from_json(m.at("model"));
    std::vector<Vocab::Merge> merges;
    for (const auto& pair : m.at("vocab").at("merges")) merges.emplace_back(pair.at(0), pair.at(1));
    Vocab vocab = Vocab::from_parts(m.at("vocab").at("tokens").get<std::vector<std::string>>(), std::move(merges));
    std::optional<StaticEmbeddingTable> table;
    if (config.embed == EmbedKind::static_mean) {
      const auto& t = m.at("static_table");
      table = StaticEmbeddingTable::shaped(t.at("tokens").get<std::vector<std::string>>(), config.static_dim,
                                           t.at("mean_unknown_row").get<bool>());
    }
    return std::make_unique<NliModel>(config, std::move(vocab), std::move(table));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed checkpoint manifest: ") + e.what());
  } catch (const ParseError& e) {
    throw SchemaError(std::string("checkpoint vocabulary: ") + e.what());
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, NliModel& model) {
  const std::string manifest = manifest_of(model).dump();
  out << kMagic << '\n' << manifest.size() << '\n' << manifest << '\n';
  for (const Parameter* p : model.parameters())
    for (double v : p->value.values()) put_le(out, v);
  if (!out) throw IoError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, NliModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::unique_ptr<NliModel> read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw SchemaError("not a checkpoint file (bad magic line)");
  if (!std::getline(in, line)) throw IoError("truncated checkpoint: missing manifest length");
  std::size_t length = 0;
  try {
    std::size_t used = 0;
    length = std::stoull(line, &used);
    if (used != line.size()) throw std::invalid_argument(line);
  } catch (const std::logic_error&) {
    throw SchemaError("checkpoint manifest length '" + line + "' is not a number");
  }
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length)) || in.get() != '\n')
    throw IoError("truncated checkpoint: manifest shorter than declared");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }

  auto model = build(manifest);
  const ParameterList params = model->parameters();
  const auto& listed = manifest.at("parameters");
  if (listed.size() != params.size())
    throw SchemaError("checkpoint lists " + std::to_string(listed.size()) + " parameters, model has " +
                      std::to_string(params.size()));

  // Read everything into temporaries first so a failure leaves no half-loaded model.
  std::vector<Tensor> values;
  values.reserve(params.size());
  std::vector<unsigned char> buf;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::string name;
    Shape shape;
    try {
      name = listed[i].at("name").get<std::string>();
      shape = listed[i].at("shape").get<Shape>();
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("malformed parameter entry " + std::to_string(i) + ": " + e.what());
    }
    const Parameter& p = *params[i];
    if (name != p.name)
      throw SchemaError("checkpoint parameter " + std::to_string(i) + " is '" + name + "', model expects '" + p.name +
                        "'");
    if (shape != p.value.shape())
      throw SchemaError("shape mismatch for parameter '" + name + "': checkpoint " + to_string(shape) +
                        ", model " + to_string(p.value.shape()));
    const std::size_t n = p.value.size();
    buf.resize(n * 8);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw IoError("truncated checkpoint: payload ends inside parameter '" + name + "'");
    std::vector<double> data(n);
    for (std::size_t k = 0; k < n; ++k) data[k] = from_le(buf.data() + 8 * k);
    values.emplace_back(shape, std::move(data));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw SchemaError("checkpoint has trailing bytes after the payload");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(values[i]);
  return model;
}

std::unique_ptr<NliModel> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace nli
