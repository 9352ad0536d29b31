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

#include <algorithm>
#include <numeric>

#include "nli/error.hpp"
#include "nli/metric_oracle.hpp"
#include "nli/metrics.hpp"
#include "nli/rng.hpp"

using nli::ConfusionMatrix;

namespace {

std::vector<std::string> names(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

ConfusionMatrix from_rows(const std::vector<std::vector<int>>& rows) {
  ConfusionMatrix cm(names(rows.size()));
  for (std::size_t g = 0; g < rows.size(); ++g)
    for (std::size_t p = 0; p < rows.size(); ++p)
      for (int n = 0; n < rows[g][p]; ++n) cm.add(g, p);
  return cm;
}

// In-test per-sample counter: walks the pairs once per class.
struct Counted {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
};

Counted count_by_hand(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& pred, std::size_t k) {
  Counted c;
  const double n = static_cast<double>(gold.size());
  for (std::size_t cls = 0; cls < k; ++cls) {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i] == cls, p = pred[i] == cls;
      tp += g && p;
      fp += !g && p;
      fn += g && !p;
      tn += !g && !p;
    }
    c.accuracy += (tp + tn) / n;
    c.precision += tp + fp ? double(tp) / (tp + fp) : 0.0;
    c.recall += tp + fn ? double(tp) / (tp + fn) : 0.0;
  }
  c.accuracy /= k;
  c.precision /= k;
  c.recall /= k;
  c.f1 = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
  return c;
}

}  // namespace

TEST(Confusion, TallyByHand) {
  const std::vector<std::size_t> gold = {0, 1, 2, 0}, pred = {0, 2, 2, 1};
  const auto cm = nli::confusion(gold, pred, names(3));
  EXPECT_EQ(cm.at(0, 0), 1u);
  EXPECT_EQ(cm.at(1, 2), 1u);
  EXPECT_EQ(cm.at(2, 2), 1u);
  EXPECT_EQ(cm.at(0, 1), 1u);
  std::uint64_t rest = 0;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t p = 0; p < 3; ++p) rest += cm.at(g, p);
  EXPECT_EQ(rest, 4u);
  EXPECT_EQ(cm.total(), 4u);
}

TEST(Confusion, PerfectAndEmpty) {
  const std::vector<std::size_t> g = {2, 0, 1, 1};
  const auto cm = nli::confusion(g, g, names(3));
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      if (a != b) EXPECT_EQ(cm.at(a, b), 0u);
  const auto empty = nli::confusion({}, {}, names(3));
  EXPECT_EQ(empty.total(), 0u);
  EXPECT_THROW(nli::macro_metrics(empty), nli::ConfigError);
}

TEST(Confusion, BadInputsAreLabelErrors) {
  const std::vector<std::size_t> a = {0, 1}, b = {0}, c = {0, 3};
  EXPECT_THROW(nli::confusion(a, b, names(3)), nli::LabelError);
  EXPECT_THROW(nli::confusion(a, c, names(3)), nli::LabelError);
}

TEST(Confusion, CsvLayout) {
  const auto cm = from_rows({{2, 1}, {0, 3}});
  EXPECT_EQ(cm.to_csv(), "gold\\predicted,c0,c1\nc0,2,1\nc1,0,3\n");
}

TEST(Macro, PerfectDiagonal) {
  const auto m = nli::macro_metrics(from_rows({{5, 0, 0}, {0, 5, 0}, {0, 0, 5}}));
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Macro, CyclicErrorsWorkedExample) {
  const auto cm = from_rows({{2, 1, 0}, {0, 2, 1}, {1, 0, 2}});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(cm.tp(i), 2u);
    EXPECT_EQ(cm.fp(i), 1u);
    EXPECT_EQ(cm.fn(i), 1u);
    EXPECT_EQ(cm.tn(i), 5u);
  }
  const auto m = nli::macro_metrics(cm);
  EXPECT_NEAR(m.accuracy, 7.0 / 9.0, 1e-15);
  EXPECT_NEAR(m.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(nli::plain_accuracy(cm), 6.0 / 9.0, 1e-15);
  for (const auto& v : nli::per_label_accuracy(cm)) EXPECT_NEAR(*v, 2.0 / 3.0, 1e-15);
}

TEST(Macro, ZeroDenominatorsContributeZero) {
  // Class 2 is never gold nor predicted; class 1 is predicted but never right.
  const auto m = nli::macro_metrics(from_rows({{3, 1, 0}, {0, 0, 0}, {0, 0, 0}}));
  EXPECT_NEAR(m.precision, (1.0 + 0.0 + 0.0) / 3.0, 1e-15);
  EXPECT_NEAR(m.recall, (0.75 + 0.0 + 0.0) / 3.0, 1e-15);
  const auto none = nli::macro_metrics(from_rows({{0, 2}, {3, 0}}));
  EXPECT_EQ(none.f1, 0.0);
  const auto labels = nli::per_label_accuracy(from_rows({{3, 1, 0}, {0, 0, 0}, {0, 0, 0}}));
  EXPECT_NEAR(*labels[0], 0.75, 1e-15);
  EXPECT_FALSE(labels[1].has_value());
}

TEST(Macro, AgreesWithPerSampleCounting) {
  nli::Rng rng(21);
  for (int set = 0; set < 1000; ++set) {
    const std::size_t k = 2 + rng.below(3), n = 1 + rng.below(200);
    std::vector<std::size_t> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng.below(k);
      pred[i] = rng.uniform() < 0.5 ? gold[i] : rng.below(k);
    }
    const auto cm = nli::confusion(gold, pred, names(k));
    const auto m = nli::macro_metrics(cm);
    const auto c = count_by_hand(gold, pred, k);
    ASSERT_NEAR(m.accuracy, c.accuracy, 1e-12);
    ASSERT_NEAR(m.precision, c.precision, 1e-12);
    ASSERT_NEAR(m.recall, c.recall, 1e-12);
    ASSERT_NEAR(m.f1, c.f1, 1e-12);
    const auto o = nli::oracle::brute_force(gold, pred, k);
    for (std::size_t g = 0; g < k; ++g)
      for (std::size_t p = 0; p < k; ++p) ASSERT_EQ(cm.at(g, p), o.counts[g][p]);
    ASSERT_NEAR(m.f1, o.f1, 1e-12);
  }
}

TEST(Macro, AccuracyIsOneExactlyForDiagonal) {
  nli::Rng rng(22);
  for (int set = 0; set < 300; ++set) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<std::size_t> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng.below(3);
      pred[i] = rng.uniform() < 0.9 ? gold[i] : rng.below(3);
    }
    const auto cm = nli::confusion(gold, pred, names(3));
    const bool diagonal = cm.tp(0) + cm.tp(1) + cm.tp(2) == cm.total();
    EXPECT_EQ(nli::macro_metrics(cm).accuracy == 1.0, diagonal);
  }
}

TEST(Macro, InvariantUnderLabelPermutation) {
  nli::Rng rng(23);
  for (int set = 0; set < 100; ++set) {
    const std::size_t k = 4, n = 50;
    std::vector<std::size_t> gold(n), pred(n), perm(k);
    for (std::size_t i = 0; i < n; ++i) gold[i] = rng.below(k), pred[i] = rng.below(k);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<std::size_t> pg(n), pp(n);
    for (std::size_t i = 0; i < n; ++i) pg[i] = perm[gold[i]], pp[i] = perm[pred[i]];
    const auto a = nli::macro_metrics(nli::confusion(gold, pred, names(k)));
    const auto b = nli::macro_metrics(nli::confusion(pg, pp, names(k)));
    EXPECT_NEAR(a.accuracy, b.accuracy, 1e-12);
    EXPECT_NEAR(a.precision, b.precision, 1e-12);
    EXPECT_NEAR(a.recall, b.recall, 1e-12);
    EXPECT_NEAR(a.f1, b.f1, 1e-12);
  }
}

TEST(Macro, TwoClassAccuracyIsPlainAccuracy) {
  nli::Rng rng(24);
  for (int set = 0; set < 200; ++set) {
    const std::size_t n = 2 + rng.below(100);
    std::vector<std::size_t> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) gold[i] = rng.below(2), pred[i] = rng.below(2);
    gold[0] = 0, gold[1] = 1;
    const auto cm = nli::confusion(gold, pred, names(2));
    EXPECT_NEAR(nli::macro_metrics(cm).accuracy, nli::plain_accuracy(cm), 1e-12);
  }
}

TEST(Topics, GroupsInFirstAppearanceOrder) {
  const std::vector<std::optional<std::string>> topics = {"b", "a", "b", std::nullopt, "a"};
  const std::vector<std::size_t> gold = {0, 1, 2, 0, 1}, pred = {0, 0, 2, 1, 0};
  const auto t = nli::per_topic_accuracy(topics, gold, pred);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].topic, "b");
  EXPECT_EQ(t[0].accuracy, 1.0);
  EXPECT_EQ(t[1].topic, "a");
  EXPECT_EQ(t[1].accuracy, 0.0);
  EXPECT_EQ(t[1].count, 2u);
}

TEST(Topics, SingleTopicEqualsPlainAccuracy) {
  nli::Rng rng(25);
  const std::size_t n = 77;
  std::vector<std::size_t> gold(n), pred(n);
  for (std::size_t i = 0; i < n; ++i) gold[i] = rng.below(3), pred[i] = rng.below(3);
  const std::vector<std::optional<std::string>> topics(n, std::string("only"));
  const auto t = nli::per_topic_accuracy(topics, gold, pred);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t[0].accuracy, nli::plain_accuracy(nli::confusion(gold, pred, names(3))), 1e-15);
}

TEST(Report, JsonAndTextCarryEveryTable) {
  const std::vector<std::size_t> gold = {0, 1, 2, 3, 0}, pred = {0, 1, 1, 3, 2};
  const std::vector<std::optional<std::string>> topics = {"x", "y", "x", "z", "y"};
  const auto r = nli::make_report(gold, pred, {"entailment", "contradiction", "neutral", "other"}, topics);
  const auto j = nli::to_json(r);
  EXPECT_EQ(j["examples"], 5);
  EXPECT_EQ(j["per_label"].size(), 4u);
  EXPECT_EQ(j["per_topic"].size(), 3u);
  EXPECT_EQ(j["confusion"]["counts"].size(), 4u);
  EXPECT_NEAR(j["plain_accuracy"].get<double>(), 0.6, 1e-15);
  for (const char* key : {"accuracy", "precision_macro", "recall_macro", "f1_macro"}) {
    const double v = j[key].get<double>();
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const std::string text = nli::to_text(r);
  for (const char* needle : {"entailment", "other", "x", "z"}) EXPECT_NE(text.find(needle), std::string::npos);
}
