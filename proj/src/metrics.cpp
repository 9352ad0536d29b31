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

#include "nli/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "nli/error.hpp"

namespace nli {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

void ConfusionMatrix::add(std::size_t gold, std::size_t pred) {
  if (gold >= size() || pred >= size())
    throw LabelError("label index out of range for a " + std::to_string(size()) + "-class confusion matrix");
  ++counts_[gold * size() + pred];
  ++total_;
}

std::uint64_t ConfusionMatrix::row_total(std::size_t gold) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < size(); ++p) s += at(gold, p);
  return s;
}

std::uint64_t ConfusionMatrix::column_total(std::size_t pred) const {
  std::uint64_t s = 0;
  for (std::size_t g = 0; g < size(); ++g) s += at(g, pred);
  return s;
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "gold\\predicted";
  for (const auto& l : labels_) out += "," + l;
  out += '\n';
  for (std::size_t g = 0; g < size(); ++g) {
    out += labels_[g];
    for (std::size_t p = 0; p < size(); ++p) out += "," + std::to_string(at(g, p));
    out += '\n';
  }
  return out;
}

ConfusionMatrix confusion(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                          std::vector<std::string> labels) {
  if (gold.size() != pred.size())
    throw LabelError("confusion: " + std::to_string(gold.size()) + " gold labels vs " + std::to_string(pred.size()) +
                     " predictions");
  ConfusionMatrix cm(std::move(labels));
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], pred[i]);
  return cm;
}

MacroMetrics macro_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0 || cm.size() == 0) throw ConfigError("metrics of an empty confusion matrix");
  const auto K = static_cast<double>(cm.size());
  const auto N = static_cast<double>(cm.total());
  MacroMetrics m;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const auto tp = static_cast<double>(cm.tp(i));
    const auto fp = static_cast<double>(cm.fp(i));
    const auto fn = static_cast<double>(cm.fn(i));
    const auto tn = static_cast<double>(cm.tn(i));
    m.accuracy += (tp + tn) / N;
    if (tp + fp > 0) m.precision += tp / (tp + fp);
    if (tp + fn > 0) m.recall += tp / (tp + fn);
  }
  m.accuracy /= K;
  m.precision /= K;
  m.recall /= K;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

double plain_accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ConfigError("accuracy of an empty confusion matrix");
  std::uint64_t diag = 0;
  for (std::size_t i = 0; i < cm.size(); ++i) diag += cm.tp(i);
  return static_cast<double>(diag) / static_cast<double>(cm.total());
}

std::vector<std::optional<double>> per_label_accuracy(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(cm.size());
  for (std::size_t i = 0; i < cm.size(); ++i)
    if (const auto n = cm.row_total(i)) out[i] = static_cast<double>(cm.tp(i)) / static_cast<double>(n);
  return out;
}

std::vector<TopicAccuracy> per_topic_accuracy(std::span<const std::optional<std::string>> topics,
                                              std::span<const std::size_t> gold, std::span<const std::size_t> pred) {
  if (topics.size() != gold.size() || gold.size() != pred.size())
    throw LabelError("per_topic_accuracy: topics, gold and predictions differ in length");
  std::vector<TopicAccuracy> out;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < topics.size(); ++i) {
    if (!topics[i]) continue;
    auto [it, fresh] = slot.emplace(*topics[i], out.size());
    if (fresh) out.push_back({*topics[i]});
    TopicAccuracy& t = out[it->second];
    ++t.count;
    if (gold[i] == pred[i]) ++t.correct;
  }
  for (auto& t : out) t.accuracy = static_cast<double>(t.correct) / static_cast<double>(t.count);
  return out;
}

EvalReport make_report(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                       std::vector<std::string> labels, std::span<const std::optional<std::string>> topics) {
  EvalReport r;
  r.confusion = confusion(gold, pred, std::move(labels));
  r.macro = macro_metrics(r.confusion);
  r.plain_accuracy = plain_accuracy(r.confusion);
  r.per_label = per_label_accuracy(r.confusion);
  r.per_topic = per_topic_accuracy(topics, gold, pred);
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["examples"] = r.confusion.total();
  j["accuracy"] = r.macro.accuracy;
  j["precision_macro"] = r.macro.precision;
  j["recall_macro"] = r.macro.recall;
  j["f1_macro"] = r.macro.f1;
  j["plain_accuracy"] = r.plain_accuracy;
  auto labels = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    nlohmann::ordered_json row;
    row["label"] = r.confusion.labels()[i];
    row["count"] = r.confusion.row_total(i);
    row["accuracy"] = r.per_label[i] ? nlohmann::ordered_json(*r.per_label[i]) : nlohmann::ordered_json(nullptr);
    labels.push_back(row);
  }
  j["per_label"] = labels;
  auto topics = nlohmann::ordered_json::array();
  for (const auto& t : r.per_topic)
    topics.push_back({{"topic", t.topic}, {"count", t.count}, {"correct", t.correct}, {"accuracy", t.accuracy}});
  j["per_topic"] = topics;
  auto counts = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < r.confusion.size(); ++g) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < r.confusion.size(); ++p) row.push_back(r.confusion.at(g, p));
    counts.push_back(row);
  }
  j["confusion"] = {{"labels", r.confusion.labels()}, {"counts", counts}};
  j["notes"] = "accuracy is the class-averaged (tp+tn)/total; classes with an empty row or column contribute 0 "
               "to macro recall or precision; per-label accuracy is recall on that gold label";
  return j;
}

std::string to_text(const EvalReport& r) {
  std::ostringstream os;
  char buf[160];
  auto line = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%-18s %8.4f\n", name, v);
    os << buf;
  };
  os << "examples           " << r.confusion.total() << "\n";
  line("accuracy", r.macro.accuracy);
  line("precision_macro", r.macro.precision);
  line("recall_macro", r.macro.recall);
  line("f1_macro", r.macro.f1);
  line("plain_accuracy", r.plain_accuracy);

  os << "\nper-label accuracy (recall)\n";
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s\n", "label", "count", "accuracy");
  os << buf;
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    if (r.per_label[i])
      std::snprintf(buf, sizeof buf, "%-16s %8llu %8.4f\n", r.confusion.labels()[i].c_str(),
                    static_cast<unsigned long long>(r.confusion.row_total(i)), *r.per_label[i]);
    else
      std::snprintf(buf, sizeof buf, "%-16s %8llu %8s\n", r.confusion.labels()[i].c_str(), 0ULL, "-");
    os << buf;
  }

  os << "\nper-topic accuracy\n";
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s\n", "topic", "count", "accuracy");
  os << buf;
  for (const auto& t : r.per_topic) {
    std::snprintf(buf, sizeof buf, "%-16s %8zu %8.4f\n", t.topic.c_str(), t.count, t.accuracy);
    os << buf;
  }

  os << "\nconfusion (rows gold, columns predicted)\n";
  std::snprintf(buf, sizeof buf, "%-16s", "");
  os << buf;
  for (const auto& l : r.confusion.labels()) {
    std::snprintf(buf, sizeof buf, " %14s", l.c_str());
    os << buf;
  }
  os << "\n";
  for (std::size_t g = 0; g < r.confusion.size(); ++g) {
    std::snprintf(buf, sizeof buf, "%-16s", r.confusion.labels()[g].c_str());
    os << buf;
    for (std::size_t p = 0; p < r.confusion.size(); ++p) {
      std::snprintf(buf, sizeof buf, " %14llu", static_cast<unsigned long long>(r.confusion.at(g, p)));
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace nli
