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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. `acceptance 4` runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nli/checkpoint.hpp"
#include "nli/data.hpp"
#include "nli/error.hpp"
#include "nli/heads.hpp"
#include "nli/metrics.hpp"
#include "nli/model.hpp"
#include "nli/synth.hpp"
#include "nli/training.hpp"
#include "nli/verify.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using nli::EmbedKind;
using nli::HeadKind;
using nli::ModelConfig;
using nli::NliModel;
using nli::Tape;
using nli::Tensor;
namespace ops = nli::ops;

// Pinned tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradBudgetSeconds = 120.0;
constexpr std::size_t kMetricSets = 1000;
constexpr double kOverfitTarget = 0.95;
constexpr std::size_t kOverfitCnnEpochs = 200;
constexpr std::size_t kOverfitBilstmEpochs = 300;
constexpr double kOverfitBudgetSeconds = 180.0;
constexpr double kGapPoints = 20.0;
constexpr double kGapBudgetSeconds = 15 * 60.0;
constexpr double kPaddingTolerance = 1e-6;
constexpr double kOrderSensitivity = 1e-3;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

nli::Vocab vocab_for(std::span<const nli::ExamplePair> pairs, std::size_t merges) {
  return nli::Vocab::train_bpe(nli::sentences_of(pairs), merges);
}

std::size_t longest_pair(const nli::Vocab& v, std::span<const nli::ExamplePair> a,
                         std::span<const nli::ExamplePair> b = {}) {
  std::size_t m = nli::corpus_max_length(v, a);
  if (!b.empty()) m = std::max(m, nli::corpus_max_length(v, b));
  return m;
}

// ---- 1 ----------------------------------------------------------------------

Outcome gradient_verification() {
  const auto start = Clock::now();
  const auto checks = nli::gradient_checks(1);
  const double elapsed = seconds_since(start);
  double worst = 0;
  std::string worst_name, failed;
  for (const auto& c : checks) {
    if (c.value > worst) worst = c.value, worst_name = c.name;
    if (!(c.value < kGradTolerance)) failed += " " + c.name;
  }
  const bool ok = failed.empty() && elapsed < kGradBudgetSeconds;
  return {ok, fmt("%zu checks, max rel error %.2e (%s) < %.0e, %.1fs < %.0fs%s", checks.size(), worst,
                  worst_name.c_str(), kGradTolerance, elapsed, kGradBudgetSeconds,
                  failed.empty() ? "" : (" failing:" + failed).c_str())};
}

// ---- 2 ----------------------------------------------------------------------

Outcome metrics_oracle() {
  const auto c = nli::metric_oracle_check(kMetricSets, 2);
  return {c.passed, c.detail};
}

// ---- 3 ----------------------------------------------------------------------

struct OverfitRun {
  std::size_t epoch = 0;  // first epoch reaching the target, 0 if never
  double accuracy = 0;
  double seconds = 0;
};

OverfitRun overfit(HeadKind head, std::size_t max_epochs) {
  nli::SynthConfig sc;
  sc.nouns = 10;
  sc.verbs = 5;
  sc.adverbs = 2;
  sc.per_label = 16;
  sc.label_mode = 4;
  sc.seed = 3;
  const auto data = nli::synth_generate(sc);  // 64 pairs
  const auto vocab = vocab_for(data, 60);
  ModelConfig c;
  c.head = head;
  c.label_mode = 4;
  c.max_len = longest_pair(vocab, data);
  c.encoder = {1, 2, 16, 32, c.max_len, 0};
  c.cnn.input_width = 16;
  c.cnn.filters_per_window = 8;
  c.bilstm.input_width = 16;
  c.bilstm.hidden_dim = 8;
  c.bilstm.layers = 1;
  NliModel model(c, vocab);

  const auto start = Clock::now();
  const auto set = nli::encode_set(model, data);
  nli::Adam adam(model.parameters(), {1e-3});
  nli::Rng rng(1);
  nli::Rng dropout_rng = rng.fork();
  std::vector<std::size_t> order(data.size());
  OverfitRun run;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t b = 0; b < order.size(); b += 16)
      nli::train_batch(model, set, std::span(order).subspan(b, std::min<std::size_t>(16, order.size() - b)), adam,
                       dropout_rng);
    run.accuracy = nli::evaluate(model, data).report.plain_accuracy;
    if (run.accuracy >= kOverfitTarget) {
      run.epoch = epoch;
      break;
    }
  }
  run.seconds = seconds_since(start);
  return run;
}

Outcome overfit_sanity() {
  const auto cnn = overfit(HeadKind::cnn, kOverfitCnnEpochs);
  const auto lstm = overfit(HeadKind::bilstm, kOverfitBilstmEpochs);
  auto ok = [](const OverfitRun& r) { return r.epoch > 0 && r.seconds < kOverfitBudgetSeconds; };
  auto describe = [](const char* name, const OverfitRun& r, std::size_t limit) {
    return r.epoch ? fmt("%s %.1f%% at epoch %zu/%zu in %.1fs", name, 100 * r.accuracy, r.epoch, limit, r.seconds)
                   : fmt("%s only %.1f%% after %zu epochs (%.1fs)", name, 100 * r.accuracy, limit, r.seconds);
  };
  return {ok(cnn) && ok(lstm), "64 pairs, target >= 95%, budget 180s each; " +
                                   describe("cnn", cnn, kOverfitCnnEpochs) + "; " +
                                   describe("bilstm", lstm, kOverfitBilstmEpochs)};
}

// ---- 4 ----------------------------------------------------------------------

struct GapArm {
  double plain = 0, macro = 0, f1 = 0;
};

GapArm run_arm(EmbedKind embed, const nli::Splits& s, const nli::Vocab& vocab, std::size_t max_len,
               double* order_shift) {
  ModelConfig c;
  c.embed = embed;
  c.max_len = max_len;
  NliModel model(c, vocab);
  nli::TrainConfig t;
  t.learning_rate = 1e-3;
  t.batch_size = 32;
  t.epochs = 8;
  nli::train(model, s.train, s.dev, t);
  const auto r = nli::evaluate(model, s.test).report;
  if (order_shift) {
    // Reversing the hypothesis words keeps the token multiset; a contextual
    // encoder must still see a different [CLS] row.
    *order_shift = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      nli::ExamplePair p = s.test[i], q = p;
      auto words = nli::split_whitespace(p.hypothesis);
      std::reverse(words.begin(), words.end());
      q.hypothesis.clear();
      for (auto w : words) q.hypothesis += (q.hypothesis.empty() ? "" : " ") + std::string(w);
      if (q.hypothesis == p.hypothesis) continue;
      Tape ta(false), tb(false);
      const Tensor a = model.encoder()->encode(ta, model.encode(p)).value();
      const Tensor b = model.encoder()->encode(tb, model.encode(q)).value();
      for (std::size_t j = 0; j < a.cols(); ++j) *order_shift = std::max(*order_shift, std::fabs(a.at(0, j) - b.at(0, j)));
    }
  }
  return {r.plain_accuracy, r.macro.accuracy, r.macro.f1};
}

Outcome contextual_gap() {
  const auto start = Clock::now();
  nli::SynthConfig sc;
  sc.per_label = 1334;  // 4002 pairs, the balanced size nearest 4000
  sc.seed = 7;
  const auto data = nli::synth_generate(sc);

  // Every swapped contradiction must share its token multiset with an
  // entailment pair, otherwise the corpus does not test what it should.
  std::map<std::multiset<std::string_view>, int> entail;
  auto bag = [](const nli::ExamplePair& p) {
    std::multiset<std::string_view> b;
    for (auto w : nli::split_whitespace(p.premise)) b.insert(w);
    for (auto w : nli::split_whitespace(p.hypothesis)) b.insert(w);
    return b;
  };
  for (const auto& p : data)
    if (p.label == nli::Label::entailment) ++entail[bag(p)];
  std::size_t unmatched = 0;
  for (const auto& p : data)
    if (p.label == nli::Label::contradiction) unmatched += !entail.count(bag(p));

  const auto s = nli::split(data, {0.8, 0.1, 0.1}, 7);
  const auto vocab = vocab_for(s.train, 300);
  const std::size_t max_len = longest_pair(vocab, s.train, s.dev);
  double shift = 0;
  const GapArm ctx = run_arm(EmbedKind::contextual, s, vocab, max_len, &shift);
  const GapArm stat = run_arm(EmbedKind::static_mean, s, vocab, max_len, nullptr);
  const double elapsed = seconds_since(start);
  const double gap = 100 * (ctx.plain - stat.plain), gap_macro = 100 * (ctx.macro - stat.macro);
  const bool ok = unmatched == 0 && gap >= kGapPoints && elapsed < kGapBudgetSeconds && shift > kOrderSensitivity;
  return {ok, fmt("%zu pairs (test %zu), contextual %.2f%% vs static %.2f%%: gap %.2f >= %.0f points "
                  "(macro accuracy %.2f vs %.2f, gap %.2f; macro F1 %.3f vs %.3f); "
                  "unshared contradiction bags %zu; word-order [CLS] shift %.3g > %.0e; %.0fs < %.0fs",
                  data.size(), s.test.size(), 100 * ctx.plain, 100 * stat.plain, gap, kGapPoints, 100 * ctx.macro,
                  100 * stat.macro, gap_macro, ctx.f1, stat.f1, unmatched, shift, kOrderSensitivity, elapsed,
                  kGapBudgetSeconds)};
}

// ---- 5 ----------------------------------------------------------------------

Tensor random_tensor(nli::Shape shape, nli::Rng& rng) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1, 1);
  return t;
}

// Returns a description of the first violated property, or "" when all hold.
std::string head_invariants(nli::Head& head, std::size_t context_width, std::size_t min_rows, nli::Rng& rng) {
  const std::size_t bd = head.branch_dim(), L = min_rows + rng.below(5);
  if (head.num_branches() != 4) return "branch count";
  if (head.concat_width() != 4 * bd) return "concat width";
  Tape t(false);
  const Tensor ctx = random_tensor({L, context_width}, rng);
  const Tensor feats = head.features(t, t.constant(ctx), L).value();
  if (feats.shape() != nli::Shape{1, 4 * bd}) return "feature shape";
  const Tensor logits = head.forward(t, t.constant(ctx), L, ops::Mode::eval, rng).value();
  if (logits.shape() != nli::Shape{1, head.num_labels()}) return "logit shape";

  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<Tensor> saved;
    for (auto* p : head.branch_parameters(k)) saved.push_back(p->value), p->value = Tensor(p->value.shape());
    Tape t2(false);
    const Tensor after = head.features(t2, t2.constant(ctx), L).value();
    std::size_t i = 0;
    for (auto* p : head.branch_parameters(k)) p->value = saved[i++];
    for (std::size_t j = 0; j < after.size(); ++j)
      if ((j < k * bd || j >= (k + 1) * bd) && after[j] != feats[j]) return fmt("branch %zu leaked into %zu", k, j);
  }

  Tensor padded({L + 1 + rng.below(6), context_width});
  for (std::size_t i = 0; i < padded.size(); ++i) padded[i] = i < ctx.size() ? ctx[i] : rng.uniform(-3, 3);
  const Tensor again = head.forward(t, t.constant(padded), L, ops::Mode::eval, rng).value();
  for (std::size_t j = 0; j < logits.size(); ++j)
    if (std::fabs(again[j] - logits[j]) > kPaddingTolerance) return "padding changed logits";
  return "";
}

Outcome architecture_invariants() {
  std::string problem;
  const auto cnn_full = nli::CnnHeadConfig::full_size(3);
  const auto lstm_full = nli::BilstmHeadConfig::full_size(4);
  if (cnn_full.branch_dim() != 768 || cnn_full.concat_width() != 3072) problem = "full-size CNN widths";
  if (lstm_full.branch_dim() != 2048 || lstm_full.concat_width() != 8192) problem = "full-size BiLSTM widths";

  nli::Rng rng(5);
  std::size_t configs = 0;
  for (int trial = 0; trial < 40 && problem.empty(); ++trial) {
    const std::size_t labels = 3 + rng.below(2), context = 2 + rng.below(8);
    if (trial % 2 == 0) {
      nli::CnnHeadConfig c;
      c.input_width = 2 + rng.below(8);
      c.windows.clear();
      for (std::size_t n = 1 + rng.below(3); n > 0; --n) c.windows.push_back(1 + rng.below(5));
      c.filters_per_window = 1 + rng.below(6);
      c.num_labels = labels;
      nli::CnnHead head(context, c, rng);
      if (head.branch_dim() != c.windows.size() * c.filters_per_window) problem = "cnn branch_dim";
      else problem = head_invariants(head, context, c.max_window(), rng);
    } else {
      nli::BilstmHeadConfig c;
      c.input_width = 2 + rng.below(8);
      c.hidden_dim = 1 + rng.below(6);
      c.layers = 1 + rng.below(2);
      c.num_labels = labels;
      nli::BilstmHead head(context, c, rng);
      if (head.branch_dim() != 2 * c.hidden_dim) problem = "bilstm branch_dim";
      else problem = head_invariants(head, context, 1, rng);
    }
    if (!problem.empty()) problem = fmt("config %d: ", trial) + problem;
    ++configs;
  }

  // Whole models: padding past the real length never moves eval logits.
  nli::SynthConfig sc;
  sc.per_label = 10;
  sc.label_mode = 4;
  const auto data = nli::synth_generate(sc);
  const auto vocab = vocab_for(data, 30);
  for (auto head : {HeadKind::cnn, HeadKind::bilstm}) {
    for (auto embed : {EmbedKind::contextual, EmbedKind::static_mean}) {
      for (int labels : {3, 4}) {
        ModelConfig c;
        c.head = head;
        c.embed = embed;
        c.label_mode = labels;
        c.max_len = longest_pair(vocab, data);
        c.encoder = {1, 2, 8, 16, c.max_len + 16, 0};
        c.cnn.input_width = c.bilstm.input_width = 8;
        c.cnn.filters_per_window = 3;
        c.bilstm.hidden_dim = 3;
        NliModel m(c, vocab);
        nli::Rng unused(0);
        for (std::size_t i = 0; i < 8 && problem.empty(); ++i) {
          auto seq = m.encode(data[i]);
          Tape a(false);
          const Tensor base = m.logits(a, seq, ops::Mode::eval, unused).value();
          if (base.size() != static_cast<std::size_t>(labels)) problem = "model logit length";
          for (int extra = 0; extra < 16; ++extra) {
            seq.ids.push_back(nli::kPadId);
            seq.segment.push_back(0);
            seq.mask.push_back(0);
          }
          Tape b(false);
          const Tensor padded = m.logits(b, seq, ops::Mode::eval, unused).value();
          for (std::size_t j = 0; j < base.size(); ++j)
            if (std::fabs(padded[j] - base[j]) > kPaddingTolerance) problem = "model padding changed logits";
        }
        ++configs;
      }
    }
  }
  return {problem.empty(), fmt("%zu randomized head/model configs; shapes, branch independence, padding within %.0e",
                               configs, kPaddingTolerance) +
                               (problem.empty() ? "" : "; violated: " + problem)};
}

// ---- 6 ----------------------------------------------------------------------

struct RunArtifacts {
  std::string log, checkpoint, report_json, report_text, confusion, predictions;
};

RunArtifacts full_run() {
  nli::SynthConfig sc;
  sc.per_label = 60;
  sc.label_mode = 4;
  sc.negation_fraction = 0.4;
  sc.seed = 21;
  const auto s = nli::split(nli::synth_generate(sc), {0.8, 0.1, 0.1}, 21);
  const auto vocab = vocab_for(s.train, 80);
  ModelConfig c;
  c.label_mode = 4;
  c.max_len = longest_pair(vocab, s.train, s.dev);
  c.encoder = {1, 2, 16, 32, 0, 0};
  c.cnn.input_width = 16;
  c.cnn.filters_per_window = 6;
  c.seed = 4;
  NliModel model(c, vocab);
  nli::TrainConfig t;
  t.learning_rate = 1e-3;
  t.batch_size = 16;
  t.epochs = 3;
  t.seed = 4;
  RunArtifacts out;
  nli::train(model, s.train, s.dev, t, [&](const nli::EpochLog& e) { out.log += nli::to_json(e).dump() + "\n"; });
  std::ostringstream ckpt;
  nli::write_checkpoint(ckpt, model);
  out.checkpoint = ckpt.str();
  const auto ev = nli::evaluate(model, s.test);
  out.report_json = nli::to_json(ev.report).dump();
  out.report_text = nli::to_text(ev.report);
  out.confusion = ev.report.confusion.to_csv();
  for (auto p : ev.predictions) out.predictions += std::to_string(p) + "\n";
  return out;
}

Outcome determinism() {
  const auto a = full_run(), b = full_run();
  std::string differs;
  if (a.log != b.log) differs += " log";
  if (a.checkpoint != b.checkpoint) differs += " checkpoint";
  if (a.report_json != b.report_json || a.report_text != b.report_text) differs += " report";
  if (a.confusion != b.confusion) differs += " confusion";
  if (a.predictions != b.predictions) differs += " predictions";
  return {differs.empty(), fmt("two seeded train+eval runs: log %zu B, checkpoint %zu B, report %zu B", a.log.size(),
                               a.checkpoint.size(), a.report_json.size()) +
                               (differs.empty() ? ", all bitwise equal" : "; differ in:" + differs)};
}

// ---- 7 ----------------------------------------------------------------------

Outcome format_fidelity() {
  // Full-format file: Vietnamese text, the four labels, thirteen topics,
  // uneven label counts, mixed label casing.
  const std::vector<std::string> topics(std::begin(nli::kSynthTopics), std::end(nli::kSynthTopics));
  const std::size_t wanted[4] = {37, 29, 41, 23};
  const char* casing[4] = {"entailment", "Contradiction", "NEUTRAL", "other"};
  nli::Rng rng(8);
  std::vector<int> labels;
  for (int l = 0; l < 4; ++l) labels.insert(labels.end(), wanted[l], l);
  rng.shuffle(std::span<int>(labels));
  std::string jsonl, tsv = "premise\thypothesis\tlabel\ttopic\n";
  std::vector<std::string> first_seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string& topic = topics[i % topics.size()];
    if (std::find(first_seen.begin(), first_seen.end(), topic) == first_seen.end()) first_seen.push_back(topic);
    const std::string premise = "Người dân thành phố đã tham gia lễ hội số " + std::to_string(i) + ".";
    const std::string hypothesis = "Lễ hội có người tham gia " + std::to_string(i);
    nlohmann::ordered_json row = {
        {"premise", premise}, {"hypothesis", hypothesis}, {"label", casing[labels[i]]}, {"topic", topic}};
    jsonl += row.dump() + "\n";
    tsv += premise + "\t" + hypothesis + "\t" + casing[labels[i]] + "\t" + topic + "\n";
  }
  const auto dir = std::filesystem::temp_directory_path() / "nli_acceptance_format";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "corpus.jsonl", std::ios::binary) << jsonl;
  std::ofstream(dir / "corpus.tsv", std::ios::binary) << tsv;

  std::string problem;
  const auto four = nli::load_dataset(dir / "corpus.jsonl", nli::LabelSchema(4));
  const auto four_tsv = nli::load_dataset(dir / "corpus.tsv", nli::LabelSchema(4));
  const auto three = nli::load_dataset(dir / "corpus.jsonl", nli::LabelSchema(3));
  const auto counts = nli::label_counts(four.pairs);
  for (int l = 0; l < 4; ++l)
    if (counts[l] != wanted[l]) problem = fmt("label %d count %zu != %zu", l, counts[l], wanted[l]);
  if (four_tsv.pairs != four.pairs) problem = "TSV and JSON-lines disagree";
  if (three.pairs.size() != labels.size() - wanted[3] || three.dropped_other != wanted[3])
    problem = "three-label mode drop count";

  ModelConfig c;
  c.label_mode = 4;
  c.embed = EmbedKind::static_mean;
  const auto vocab = vocab_for(four.pairs, 40);
  c.max_len = longest_pair(vocab, four.pairs);
  NliModel model(c, vocab);
  const auto ev = nli::evaluate(model, four.pairs);
  const auto j = nli::to_json(ev.report);
  const std::vector<std::string> names = {"entailment", "contradiction", "neutral", "other"};
  if (j["per_label"].size() != 4) problem = "per-label table size";
  for (std::size_t l = 0; l < j["per_label"].size() && l < 4; ++l)
    if (j["per_label"][l]["label"] != names[l] || j["per_label"][l]["count"] != wanted[l])
      problem = "per-label row " + std::to_string(l);
  if (j["per_topic"].size() != 13) problem = "per-topic table size";
  for (std::size_t t = 0; t < j["per_topic"].size() && t < first_seen.size(); ++t)
    if (j["per_topic"][t]["topic"] != first_seen[t]) problem = "per-topic order";
  std::uint64_t cells = 0;
  if (j["confusion"]["labels"] != names) problem = "confusion labels";
  for (const auto& row : j["confusion"]["counts"]) {
    if (row.size() != 4) problem = "confusion row width";
    for (const auto& v : row) cells += v.get<std::uint64_t>();
  }
  if (cells != labels.size()) problem = "confusion total";
  const std::string csv = ev.report.confusion.to_csv();
  if (std::count(csv.begin(), csv.end(), '\n') != 5 || csv.rfind("gold\\predicted,entailment", 0) != 0)
    problem = "confusion CSV layout";
  for (const char* key : {"accuracy", "precision_macro", "recall_macro", "f1_macro", "plain_accuracy"})
    if (!j.contains(key) || j[key].get<double>() < 0 || j[key].get<double>() > 1) problem = std::string("field ") + key;
  std::filesystem::remove_all(dir);
  return {problem.empty(), fmt("%zu pairs, counts %zu/%zu/%zu/%zu match, %zu other dropped in 3-label mode, "
                               "report: 4 label rows, %zu topics, 4x4 confusion",
                               four.pairs.size(), counts[0], counts[1], counts[2], counts[3], three.dropped_other,
                               j["per_topic"].size()) +
                               (problem.empty() ? "" : "; violated: " + problem)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient verification", gradient_verification},
      {"metrics oracle", metrics_oracle},
      {"overfit sanity", overfit_sanity},
      {"contextual vs static gap", contextual_gap},
      {"architecture invariants", architecture_invariants},
      {"determinism", determinism},
      {"format fidelity", format_fidelity},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.passed;
    std::printf("%s %zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
