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

#include "nli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>

#include "nli/gradcheck.hpp"
#include "nli/heads.hpp"
#include "nli/metric_oracle.hpp"
#include "nli/metrics.hpp"
#include "nli/model.hpp"
#include "nli/ops.hpp"

namespace nli {
namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

Var contract(Var y, std::uint64_t seed) {
  Rng rng(seed);
  return ops::weighted_sum(y, random_tensor(y.shape(), rng));
}

GradCheckResult worst(std::initializer_list<GradCheckResult> results) {
  GradCheckResult w;
  for (const auto& r : results) {
    if (r.max_relative_error >= w.max_relative_error) {
      const std::size_t total = w.coordinates + r.coordinates;
      w = r;
      w.coordinates = total;
    } else {
      w.coordinates += r.coordinates;
    }
  }
  return w;
}

CheckResult to_check(std::string name, const GradCheckResult& r) {
  CheckResult c;
  c.name = "gradient/" + std::move(name);
  c.value = r.max_relative_error;
  c.threshold = kGradCheckTolerance;
  c.passed = std::isfinite(r.max_relative_error) && r.max_relative_error < kGradCheckTolerance && r.coordinates > 0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu coordinates, worst analytic %.6g vs numeric %.6g", r.coordinates, r.analytic,
                r.numeric);
  c.detail = buf;
  return c;
}

Vocab toy_vocab() {
  const std::vector<std::string> corpus = {"ba con meo den", "con cho vang chay nhanh", "meo den ngu", "cho chay"};
  return Vocab::train_bpe(corpus, 10);
}

}  // namespace

bool VerifyReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<CheckResult> gradient_checks(std::uint64_t seed, bool inject_fault) {
  std::optional<testing::ScopedBackwardFault> fault;
  if (inject_fault) fault.emplace();
  const double eps = kGradCheckEpsilon;
  Rng rng(seed);
  std::vector<CheckResult> out;

  {  // linear
    Parameter w("w", random_tensor({4, 3}, rng)), b("b", random_tensor({3}, rng));
    const Tensor x = random_tensor({2, 4}, rng);
    auto in = grad_check(
        [&](Tape& t, Var v) { return ops::linear(v, t.constant(w.value), t.constant(b.value)); }, x, eps, seed);
    auto par = grad_check_params(
        [&](Tape& t) { return contract(ops::linear(t.constant(x), t.parameter(w), t.parameter(b)), seed); }, {&w, &b},
        eps);
    out.push_back(to_check("linear", worst({in, par})));
  }
  {  // conv1d
    Parameter k("k", random_tensor({2, 3, 4}, rng)), b("b", random_tensor({4}, rng));
    const Tensor x = random_tensor({5, 3}, rng);
    auto in = grad_check(
        [&](Tape& t, Var v) { return ops::conv1d(v, t.constant(k.value), t.constant(b.value)); }, x, eps, seed);
    auto par = grad_check_params(
        [&](Tape& t) { return contract(ops::conv1d(t.constant(x), t.parameter(k), t.parameter(b)), seed); }, {&k, &b},
        eps);
    out.push_back(to_check("conv1d", worst({in, par})));
  }
  {  // maxpool over the first 4 of 6 rows
    const Tensor x = random_tensor({6, 3}, rng);
    out.push_back(to_check("maxpool_time", grad_check([](Tape&, Var v) { return ops::maxpool_time(v, 4); }, x, eps,
                                                      seed)));
  }
  {  // activations
    const Tensor x = random_tensor({3, 4}, rng);
    auto r = grad_check([](Tape&, Var v) { return ops::relu(v); }, x, eps, seed);
    auto t = grad_check([](Tape&, Var v) { return ops::tanh(v); }, x, eps, seed);
    auto s = grad_check([](Tape&, Var v) { return ops::sigmoid(v); }, x, eps, seed);
    out.push_back(to_check("activations", worst({r, t, s})));
  }
  {  // softmax cross-entropy
    const Tensor z = random_tensor({3, 4}, rng, -2.0, 2.0);
    const std::vector<std::size_t> gold = {0, 3, 1};
    out.push_back(to_check("softmax_xent",
                           grad_check([&](Tape&, Var v) { return ops::softmax_xent(v, gold).loss; }, z, eps, seed)));
  }
  {  // layer norm
    Parameter g("g", random_tensor({5}, rng, 0.5, 1.5)), s("s", random_tensor({5}, rng));
    const Tensor x = random_tensor({3, 5}, rng);
    auto in = grad_check(
        [&](Tape& t, Var v) { return ops::layer_norm(v, t.constant(g.value), t.constant(s.value)); }, x, eps, seed);
    auto par = grad_check_params(
        [&](Tape& t) { return contract(ops::layer_norm(t.constant(x), t.parameter(g), t.parameter(s)), seed); },
        {&g, &s}, eps);
    out.push_back(to_check("layer_norm", worst({in, par})));
  }
  {  // LSTM cell
    const std::size_t H = 3;
    Parameter rec("rec", random_tensor({H, 4 * H}, rng, -0.5, 0.5));
    const Tensor gates = random_tensor({1, 4 * H}, rng);
    const Tensor h0 = random_tensor({1, H}, rng), c0 = random_tensor({1, H}, rng);
    auto in = grad_check(
        [&](Tape& t, Var v) {
          LstmState st = lstm_cell(t, v, {t.constant(h0), t.constant(c0)}, rec);
          const Var parts[] = {st.h, st.c};
          return ops::concat_cols(parts);
        },
        gates, eps, seed);
    auto prev = grad_check(
        [&](Tape& t, Var v) {
          LstmState st = lstm_cell(t, t.constant(gates), {ops::slice_cols(v, 0, H), ops::slice_cols(v, H, H)}, rec);
          const Var parts[] = {st.h, st.c};
          return ops::concat_cols(parts);
        },
        Tensor({1, 2 * H}, [&] {
          std::vector<double> hc(h0.values().begin(), h0.values().end());
          hc.insert(hc.end(), c0.values().begin(), c0.values().end());
          return hc;
        }()),
        eps, seed);
    auto par = grad_check_params(
        [&](Tape& t) {
          LstmState st = lstm_cell(t, t.constant(gates), {t.constant(h0), t.constant(c0)}, rec);
          const Var parts[] = {st.h, st.c};
          return contract(ops::concat_cols(parts), seed);
        },
        {&rec}, eps);
    out.push_back(to_check("lstm_cell", worst({in, prev, par})));
  }
  {  // attention, cross and self, with the last key masked
    const Tensor q = random_tensor({3, 4}, rng), k = random_tensor({4, 4}, rng), v = random_tensor({4, 4}, rng);
    const std::vector<std::uint8_t> mask = {1, 1, 1, 0};
    const std::vector<std::uint8_t> self_mask = {1, 1, 0};
    auto cross = grad_check(
        [&](Tape& t, Var x) { return ops::attention(x, t.constant(k), t.constant(v), mask); }, q, eps, seed);
    auto keys = grad_check(
        [&](Tape& t, Var x) { return ops::attention(t.constant(q), x, t.constant(v), mask); }, k, eps, seed);
    auto self = grad_check([&](Tape&, Var x) { return ops::attention(x, x, x, self_mask); }, q, eps, seed);
    out.push_back(to_check("attention", worst({cross, keys, self})));
  }
  {  // full CNN head, pad row at the end
    CnnHeadConfig cfg;
    cfg.input_width = 5;
    cfg.windows = {2, 3};
    cfg.filters_per_window = 3;
    cfg.num_labels = 3;
    CnnHead head(6, cfg, rng);
    Tensor ctx = random_tensor({7, 6}, rng);
    for (std::size_t c = 0; c < 6; ++c) ctx.at(6, c) = 0.0;
    const std::vector<std::size_t> gold = {2};
    Rng unused(0);
    auto in = grad_check([&](Tape& t, Var x) { return head.forward(t, x, 6, ops::Mode::eval, unused); }, ctx, eps,
                         seed);
    ParameterList params;
    head.collect(params);
    auto par = grad_check_params(
        [&](Tape& t) {
          return ops::softmax_xent(head.forward(t, t.constant(ctx), 6, ops::Mode::eval, unused), gold).loss;
        },
        params, eps);
    out.push_back(to_check("cnn_head", worst({in, par})));
  }
  {  // full BiLSTM head
    BilstmHeadConfig cfg;
    cfg.input_width = 4;
    cfg.hidden_dim = 3;
    cfg.layers = 2;
    cfg.num_labels = 4;
    BilstmHead head(5, cfg, rng);
    Tensor ctx = random_tensor({6, 5}, rng);
    const std::vector<std::size_t> gold = {1};
    Rng unused(0);
    auto in = grad_check([&](Tape& t, Var x) { return head.forward(t, x, 5, ops::Mode::eval, unused); }, ctx, eps,
                         seed);
    ParameterList params;
    head.collect(params);
    auto par = grad_check_params(
        [&](Tape& t) {
          return ops::softmax_xent(head.forward(t, t.constant(ctx), 5, ops::Mode::eval, unused), gold).loss;
        },
        params, eps);
    out.push_back(to_check("bilstm_head", worst({in, par})));
  }
  {  // encoder + head composites, sampled coordinates
    const ExamplePair pair{"con meo den ngu", "meo den", Label::neutral, std::nullopt};
    const std::vector<std::size_t> gold = {2};
    for (HeadKind kind : {HeadKind::cnn, HeadKind::bilstm}) {
      ModelConfig mc;
      mc.head = kind;
      mc.max_len = 16;
      mc.encoder = {1, 2, 8, 12, 16, 0};
      mc.cnn.input_width = 6;
      mc.cnn.windows = {2, 3};
      mc.cnn.filters_per_window = 3;
      mc.bilstm.input_width = 4;
      mc.bilstm.hidden_dim = 3;
      mc.bilstm.layers = 1;
      mc.seed = seed;
      NliModel model(mc, toy_vocab());
      const TokenSequence seq = model.encode(pair);
      Rng unused(0);
      auto par = grad_check_params(
          [&](Tape& t) { return ops::softmax_xent(model.logits(t, seq, ops::Mode::eval, unused), gold).loss; },
          model.parameters(), eps, 600, seed);
      out.push_back(to_check(std::string("encoder+") + std::string(head_kind_name(kind)), par));
    }
  }
  return out;
}

CheckResult metric_oracle_check(std::size_t sets, std::uint64_t seed) {
  CheckResult c;
  c.name = "metrics/oracle";
  c.threshold = kMetricTolerance;
  Rng rng(seed);
  const std::vector<std::string> topic_names = {"Law", "Health", "Sports"};
  std::size_t count_mismatches = 0;
  double worst_ratio = 0.0;
  auto ratio = [&](double a, double b) { worst_ratio = std::max(worst_ratio, std::fabs(a - b)); };

  for (std::size_t s = 0; s < sets; ++s) {
    const std::size_t K = 2 + rng.below(3);
    const std::size_t n = 1 + rng.below(200);
    std::vector<std::size_t> gold(n), pred(n);
    std::vector<std::optional<std::string>> topics(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng.below(K);
      pred[i] = rng.uniform() < 0.5 ? gold[i] : rng.below(K);
      if (rng.below(10) != 0) topics[i] = topic_names[rng.below(topic_names.size())];
    }
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < K; ++k) labels.push_back("L" + std::to_string(k));
    const EvalReport r = make_report(gold, pred, labels, topics);
    const oracle::BruteForce b = oracle::brute_force(gold, pred, K, topics);

    for (std::size_t g = 0; g < K; ++g) {
      for (std::size_t p = 0; p < K; ++p) count_mismatches += r.confusion.at(g, p) != b.counts[g][p];
      count_mismatches += r.confusion.tp(g) != b.tp[g];
      count_mismatches += r.confusion.fp(g) != b.fp[g];
      count_mismatches += r.confusion.fn(g) != b.fn[g];
      count_mismatches += r.confusion.tn(g) != b.tn[g];
      count_mismatches += r.per_label[g].has_value() != b.per_label[g].has_value();
      if (r.per_label[g] && b.per_label[g]) ratio(*r.per_label[g], *b.per_label[g]);
    }
    ratio(r.macro.accuracy, b.accuracy);
    ratio(r.macro.precision, b.precision);
    ratio(r.macro.recall, b.recall);
    ratio(r.macro.f1, b.f1);
    ratio(r.plain_accuracy, b.plain_accuracy);
    count_mismatches += r.per_topic.size() != b.per_topic.size();
    for (const auto& t : r.per_topic) {
      auto it = b.per_topic.find(t.topic);
      if (it == b.per_topic.end() || it->second.first != t.correct || it->second.second != t.count) {
        ++count_mismatches;
        continue;
      }
      ratio(t.accuracy, static_cast<double>(it->second.first) / static_cast<double>(it->second.second));
    }
  }

  // Worked example: every class has tp 2, fp 1, fn 1, tn 5.
  ConfusionMatrix cm({"a", "b", "c"});
  const std::size_t rows[3][3] = {{2, 1, 0}, {0, 2, 1}, {1, 0, 2}};
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t k = 0; k < rows[g][p]; ++k) cm.add(g, p);
  const MacroMetrics m = macro_metrics(cm);
  const bool worked = std::fabs(m.accuracy - 7.0 / 9.0) < kMetricTolerance &&
                      std::fabs(m.f1 - 2.0 / 3.0) < kMetricTolerance &&
                      std::fabs(m.precision - 2.0 / 3.0) < kMetricTolerance &&
                      std::fabs(m.recall - 2.0 / 3.0) < kMetricTolerance;

  c.value = worst_ratio;
  c.passed = count_mismatches == 0 && worst_ratio < kMetricTolerance && worked;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu random sets, %zu count mismatches, worst ratio deviation %.3g; 3x3 example %s",
                sets, count_mismatches, worst_ratio, worked ? "ok" : "WRONG");
  c.detail = buf;
  return c;
}

CheckResult dropout_expectation_check(std::size_t elements, std::uint64_t seed) {
  CheckResult c;
  c.name = "dropout/expectation";
  c.threshold = 0.01;
  const double rate = 0.1;
  Rng rng(seed);
  Tape tape(false);
  Var x = tape.constant(Tensor({elements, 1}, 1.0));
  const Tensor& y = ops::dropout(x, rate, ops::Mode::train, rng).value();
  double sum = 0.0;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum += y[i];
    zeros += y[i] == 0.0;
  }
  const double mean = sum / static_cast<double>(elements);
  const double dropped = static_cast<double>(zeros) / static_cast<double>(elements);
  c.value = std::fabs(mean - 1.0);
  c.passed = c.value < c.threshold && std::fabs(dropped - rate) < 0.01;
  Tape eval(false);
  Var xe = eval.constant(Tensor({4, 1}, 1.0));
  c.passed = c.passed && ops::dropout(xe, rate, ops::Mode::eval, rng).value() == xe.value();
  char buf[160];
  std::snprintf(buf, sizeof buf, "rate %.2f over %zu elements: mean %.6f, dropped fraction %.6f", rate, elements, mean,
                dropped);
  c.detail = buf;
  return c;
}

VerifyReport run_verify(const VerifyOptions& o) {
  VerifyReport r;
  r.checks = gradient_checks(o.seed, o.inject_fault);
  r.checks.push_back(metric_oracle_check(o.metric_sets, o.seed));
  r.checks.push_back(dropout_expectation_check(o.dropout_elements, o.seed));
  return r;
}

nlohmann::ordered_json to_json(const VerifyReport& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
  j["checks"] = checks;
  return j;
}

}  // namespace nli
