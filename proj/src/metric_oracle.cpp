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

#include "nli/metric_oracle.hpp"

namespace nli::oracle {

BruteForce brute_force(std::span<const std::size_t> gold, std::span<const std::size_t> pred, std::size_t classes,
                       std::span<const std::optional<std::string>> topics) {
  BruteForce b;
  b.counts.assign(classes, std::vector<std::uint64_t>(classes, 0));
  b.tp.assign(classes, 0);
  b.fp.assign(classes, 0);
  b.fn.assign(classes, 0);
  b.tn.assign(classes, 0);
  std::uint64_t correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const std::size_t g = gold[s], p = pred[s];
    b.counts[g][p] += 1;
    if (g == p) correct += 1;
    for (std::size_t c = 0; c < classes; ++c) {
      const bool is_gold = g == c, is_pred = p == c;
      if (is_gold && is_pred)
        b.tp[c] += 1;
      else if (is_pred)
        b.fp[c] += 1;
      else if (is_gold)
        b.fn[c] += 1;
      else
        b.tn[c] += 1;
    }
    if (!topics.empty() && topics[s]) {
      auto& slot = b.per_topic[*topics[s]];
      slot.second += 1;
      if (g == p) slot.first += 1;
    }
  }
  if (gold.empty()) return b;

  const double n = static_cast<double>(gold.size());
  double acc = 0.0, prec = 0.0, rec = 0.0;
  b.per_label.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    const double tp = static_cast<double>(b.tp[c]);
    const double fp = static_cast<double>(b.fp[c]);
    const double fn = static_cast<double>(b.fn[c]);
    const double tn = static_cast<double>(b.tn[c]);
    acc += (tp + tn) / (tp + fp + fn + tn);
    prec += (b.tp[c] + b.fp[c]) == 0 ? 0.0 : tp / (tp + fp);
    rec += (b.tp[c] + b.fn[c]) == 0 ? 0.0 : tp / (tp + fn);
    if (b.tp[c] + b.fn[c] > 0) b.per_label[c] = tp / (tp + fn);
  }
  const double k = static_cast<double>(classes);
  b.accuracy = acc / k;
  b.precision = prec / k;
  b.recall = rec / k;
  b.f1 = (b.precision + b.recall) == 0.0 ? 0.0 : 2.0 * b.precision * b.recall / (b.precision + b.recall);
  b.plain_accuracy = static_cast<double>(correct) / n;
  return b;
}

}  // namespace nli::oracle
