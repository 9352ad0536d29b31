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

#include "nli/verify.hpp"

TEST(Verify, EveryCheckPassesOnTheRealImplementation) {
  nli::VerifyOptions o;
  o.metric_sets = 200;
  o.dropout_elements = 200000;
  const auto r = nli::run_verify(o);
  EXPECT_TRUE(r.passed());
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.value << " vs " << c.threshold;
  const auto j = nli::to_json(r);
  EXPECT_EQ(j["checks"].size(), r.checks.size());
}

TEST(Verify, CoversHeadsEncoderAndOps) {
  const auto checks = nli::gradient_checks(3);
  auto has = [&](const std::string& part) {
    for (const auto& c : checks)
      if (c.name.find(part) != std::string::npos) return true;
    return false;
  };
  for (const char* part : {"conv1d", "maxpool", "softmax_xent", "layer_norm", "attention", "cnn_head", "bilstm_head",
                           "encoder"})
    EXPECT_TRUE(has(part)) << part;
  for (const auto& c : checks) EXPECT_LT(c.value, nli::kGradCheckTolerance) << c.name;
}

TEST(Verify, InjectedBackwardFaultIsCaught) {
  const auto checks = nli::gradient_checks(1, true);
  std::size_t failed = 0;
  for (const auto& c : checks) failed += !c.passed;
  EXPECT_GT(failed, 0u);
  nli::VerifyOptions o;
  o.inject_fault = true;
  o.metric_sets = 20;
  o.dropout_elements = 10000;
  EXPECT_FALSE(nli::run_verify(o).passed());
  // The fault is scoped to the faulty run.
  for (const auto& c : nli::gradient_checks(1)) EXPECT_TRUE(c.passed) << c.name;
}

TEST(Verify, MetricAndDropoutChecks) {
  const auto m = nli::metric_oracle_check(300, 4);
  EXPECT_TRUE(m.passed) << m.detail;
  EXPECT_LT(m.value, nli::kMetricTolerance);
  const auto d = nli::dropout_expectation_check(500000, 4);
  EXPECT_TRUE(d.passed) << d.detail;
  EXPECT_LT(d.value, 0.01);
}
