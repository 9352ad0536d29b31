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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nli::oracle {

// Reference metric values computed one sample at a time, sharing no code
// with the metrics module. Used to cross-check it.
struct BruteForce {
  std::vector<std::vector<std::uint64_t>> counts;  // [gold][pred]
  std::vector<std::uint64_t> tp, fp, fn, tn;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double plain_accuracy = 0.0;
  std::vector<std::optional<double>> per_label;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_topic;  // topic -> (correct, total)
};

BruteForce brute_force(std::span<const std::size_t> gold, std::span<const std::size_t> pred, std::size_t classes,
                       std::span<const std::optional<std::string>> topics = {});

}  // namespace nli::oracle
