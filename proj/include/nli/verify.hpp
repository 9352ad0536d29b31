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
#include <string>
#include <vector>

#include <json.hpp>

namespace nli {

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr double kGradCheckEpsilon = 1e-5;
inline constexpr double kMetricTolerance = 1e-12;

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity (error, deviation)
  double threshold = 0.0;  // pass when value < threshold
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t metric_sets = 1000;
  std::size_t dropout_elements = 1000000;
  /// Negate one backward pass so the gradient checks must fail.
  bool inject_fault = false;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Finite-difference checks of every op family, both heads and the
/// encoder+head composite.
std::vector<CheckResult> gradient_checks(std::uint64_t seed, bool inject_fault = false);
/// Metrics module against a per-sample brute-force counter on random sets,
/// plus the worked 3x3 matrix.
CheckResult metric_oracle_check(std::size_t sets, std::uint64_t seed);
/// Inverted dropout keeps the mean of a ones tensor within 1%.
CheckResult dropout_expectation_check(std::size_t elements, std::uint64_t seed);

VerifyReport run_verify(const VerifyOptions& options);
nlohmann::ordered_json to_json(const VerifyReport& report);

}  // namespace nli
