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

// Command-line front end over the C API: corpus generation, vocabulary
// training, model training, evaluation and self-verification.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nli/nli.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Failure {
  nli_status status;
  std::string message;
};

void check(nli_status s, const std::string& context) {
  if (s != NLI_OK) throw Failure{s, context + ": " + nli_last_error()};
}

struct DatasetDeleter {
  void operator()(nli_dataset* d) const { nli_dataset_free(d); }
};
struct VocabDeleter {
  void operator()(nli_vocab* v) const { nli_vocab_free(v); }
};
struct ModelDeleter {
  void operator()(nli_model* m) const { nli_model_free(m); }
};
struct ReportDeleter {
  void operator()(nli_report* r) const { nli_report_free(r); }
};
using DatasetPtr = std::unique_ptr<nli_dataset, DatasetDeleter>;
using VocabPtr = std::unique_ptr<nli_vocab, VocabDeleter>;
using ModelPtr = std::unique_ptr<nli_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<nli_report, ReportDeleter>;

std::string take(char* s) {
  std::string out = s ? s : "";
  nli_string_free(s);
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || (out.close(), !out))
    throw Failure{NLI_ERR_DATA, "cannot write " + path.string()};
}

DatasetPtr load(const std::string& path, int labels, std::size_t* dropped = nullptr) {
  nli_dataset* d = nullptr;
  check(nli_dataset_load(path.c_str(), labels, &d, dropped), "loading " + path);
  return DatasetPtr(d);
}

// One manifest per run: what ran, with which flags, on which files.
class Manifest {
 public:
  Manifest(std::string command, json config) : started_(utc_now()) {
    doc_["command"] = std::move(command);
    doc_["config"] = std::move(config);
  }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void output(const fs::path& p) { outputs_.push_back(p); }
  void note(const std::string& key, json value) { doc_[key] = std::move(value); }

  void write(const fs::path& path) {
    doc_["started_at"] = started_;
    doc_["finished_at"] = utc_now();
    doc_["inputs"] = hashes(inputs_);
    doc_["outputs"] = hashes(outputs_);
    write_file(path, doc_.dump(2) + "\n");
  }

 private:
  static json hashes(const std::vector<fs::path>& paths) {
    json arr = json::array();
    for (const auto& p : paths) {
      char hex[65];
      check(nli_sha256_file(p.string().c_str(), hex), "hashing " + p.string());
      arr.push_back({{"path", p.string()}, {"sha256", hex}});
    }
    return arr;
  }

  json doc_;
  std::string started_;
  std::vector<fs::path> inputs_, outputs_;
};

// ---- gen-corpus -------------------------------------------------------------

struct GenArgs {
  std::string out_dir;
  nli_synth_options synth{};
  std::vector<double> split{0.8, 0.1, 0.1};
  std::uint64_t split_seed = 0;
};

int run_gen(const GenArgs& a) {
  nli_dataset* all = nullptr;
  check(nli_dataset_generate(&a.synth, &all), "generating corpus");
  DatasetPtr corpus(all);
  nli_dataset *tr = nullptr, *dv = nullptr, *te = nullptr;
  check(nli_dataset_split(corpus.get(), a.split[0], a.split[1], a.split[2], a.split_seed ? a.split_seed : a.synth.seed,
                          &tr, &dv, &te),
        "splitting corpus");
  DatasetPtr train(tr), dev(dv), test(te);

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Failure{NLI_ERR_DATA, "cannot create " + a.out_dir + ": " + ec.message()};
  const fs::path dir(a.out_dir);
  json config = {{"out", a.out_dir},
                 {"nouns", a.synth.nouns},
                 {"verbs", a.synth.verbs},
                 {"adverbs", a.synth.adverbs},
                 {"per_label", a.synth.per_label},
                 {"labels", a.synth.label_mode},
                 {"negation_fraction", a.synth.negation_fraction},
                 {"split", a.split}};
  Manifest manifest("gen-corpus", config);
  manifest.note("seed", a.synth.seed);
  const std::pair<const char*, nli_dataset*> parts[] = {
      {"train.jsonl", train.get()}, {"dev.jsonl", dev.get()}, {"test.jsonl", test.get()}};
  json sizes;
  for (const auto& [name, ds] : parts) {
    const fs::path p = dir / name;
    check(nli_dataset_save(ds, p.string().c_str()), "writing " + p.string());
    manifest.output(p);
    sizes[name] = nli_dataset_size(ds);
  }
  manifest.note("sizes", sizes);
  manifest.write(dir / "manifest.json");
  std::cout << "wrote " << sizes.dump() << " to " << dir.string() << "\n";
  return 0;
}

// ---- vocab -----------------------------------------------------------------

struct VocabArgs {
  std::string data;
  std::string out;
  std::size_t merges = 200;
};

int run_vocab(const VocabArgs& a) {
  DatasetPtr ds = load(a.data, 4);
  nli_vocab* v = nullptr;
  check(nli_vocab_train(ds.get(), a.merges, &v), "training vocabulary");
  VocabPtr vocab(v);
  check(nli_vocab_save(vocab.get(), a.out.c_str()), "writing " + a.out);
  std::size_t longest = 0;
  check(nli_vocab_max_pair_length(vocab.get(), ds.get(), &longest), "measuring pair lengths");

  Manifest manifest("vocab", {{"data", a.data}, {"out", a.out}, {"merges", a.merges}});
  manifest.input(a.data);
  manifest.output(a.out);
  manifest.note("vocab_size", nli_vocab_size(vocab.get()));
  manifest.note("max_pair_length", longest);
  manifest.write(a.out + ".manifest.json");
  std::cout << "vocabulary size " << nli_vocab_size(vocab.get()) << ", longest encoded pair " << longest
            << " tokens\n";
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string train, dev, vocab, vectors, out, log;
  std::size_t merges = 200;
  std::size_t max_len = 0;
  std::string head = "cnn", embed = "contextual";
  std::string order = "hypothesis_first";
  nli_model_options model{};
  nli_train_options opt{};
};

void append_line(const char* line, void* user) {
  auto* sink = static_cast<std::ostream*>(user);
  *sink << line << "\n";
  sink->flush();
}

int run_train(TrainArgs& a) {
  if (a.head != "cnn" && a.head != "bilstm") throw Failure{NLI_ERR_USAGE, "--head must be cnn or bilstm"};
  if (a.embed != "contextual" && a.embed != "static")
    throw Failure{NLI_ERR_USAGE, "--embed must be contextual or static"};
  if (!a.vectors.empty() && a.embed != "static")
    throw Failure{NLI_ERR_USAGE, "--vectors requires --embed static"};
  if (a.opt.freeze_encoder && a.embed != "contextual")
    throw Failure{NLI_ERR_USAGE, "--freeze-encoder requires --embed contextual"};

  Manifest manifest("train", json::object());
  DatasetPtr train = load(a.train, a.model.label_mode);
  manifest.input(a.train);
  DatasetPtr dev;
  if (!a.dev.empty()) {
    dev = load(a.dev, a.model.label_mode);
    manifest.input(a.dev);
  }

  VocabPtr vocab;
  nli_vocab* v = nullptr;
  if (!a.vocab.empty()) {
    check(nli_vocab_load(a.vocab.c_str(), &v), "loading " + a.vocab);
    manifest.input(a.vocab);
  } else {
    check(nli_vocab_train(train.get(), a.merges, &v), "training vocabulary");
  }
  vocab.reset(v);

  std::size_t max_len = a.max_len;
  if (max_len == 0) {
    check(nli_vocab_max_pair_length(vocab.get(), train.get(), &max_len), "measuring pair lengths");
    if (dev) {
      std::size_t dev_len = 0;
      check(nli_vocab_max_pair_length(vocab.get(), dev.get(), &dev_len), "measuring pair lengths");
      max_len = std::max(max_len, dev_len);
    }
  }
  a.model.max_len = max_len;
  a.model.head = a.head.c_str();
  a.model.embed = a.embed.c_str();
  a.model.vectors_path = a.vectors.empty() ? nullptr : a.vectors.c_str();
  a.model.hypothesis_first = a.order == "hypothesis_first";
  if (!a.vectors.empty()) manifest.input(a.vectors);

  nli_model* m = nullptr;
  check(nli_model_create(&a.model, vocab.get(), &m), "building model");
  ModelPtr model(m);

  std::ofstream log_file;
  std::ostream* log = &std::cout;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::trunc);
    if (!log_file) throw Failure{NLI_ERR_DATA, "cannot write " + a.log};
    log = &log_file;
  }
  char* summary = nullptr;
  check(nli_train(model.get(), train.get(), dev.get(), &a.opt, append_line, log, &summary), "training");
  const json result = json::parse(take(summary));
  if (log_file.is_open()) log_file.close();
  check(nli_model_save(model.get(), a.out.c_str()), "writing " + a.out);

  manifest.output(a.out);
  if (!a.log.empty()) manifest.output(a.log);
  char* cfg = nullptr;
  check(nli_model_config_json(model.get(), &cfg), "describing model");
  manifest.note("model", json::parse(take(cfg)));
  manifest.note("training", result);
  manifest.note("seed", a.opt.seed);
  manifest.note("parameters", nli_model_parameter_count(model.get()));
  manifest.note("paths", {{"train", a.train}, {"dev", a.dev}, {"vocab", a.vocab}, {"vectors", a.vectors},
                          {"out", a.out}, {"log", a.log}});
  manifest.write(a.out + ".manifest.json");
  std::cerr << "best epoch " << result["best_epoch"] << ", checkpoint " << a.out << "\n";
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string model, data, out_dir;
};

int run_eval(const EvalArgs& a) {
  nli_model* m = nullptr;
  check(nli_model_load(a.model.c_str(), &m), "loading " + a.model);
  ModelPtr model(m);
  const int mode = nli_model_label_mode(model.get());
  DatasetPtr data = load(a.data, 4);
  std::size_t counts[4];
  check(nli_dataset_label_counts(data.get(), counts), "counting labels");
  if (mode == 3 && counts[3] > 0)
    throw Failure{NLI_ERR_DATA, "schema mismatch: " + a.data + " has " + std::to_string(counts[3]) +
                                    " 'other' pairs but the checkpoint uses the 3-label schema"};
  if (mode == 3) data = load(a.data, 3);

  nli_report* r = nullptr;
  check(nli_evaluate(model.get(), data.get(), &r), "evaluating");
  ReportPtr report(r);

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw Failure{NLI_ERR_DATA, "cannot create " + a.out_dir + ": " + ec.message()};
  const fs::path dir(a.out_dir);
  char* s = nullptr;
  check(nli_report_json(report.get(), &s), "report");
  write_file(dir / "report.json", take(s));
  check(nli_report_text(report.get(), &s), "report");
  const std::string text = take(s);
  write_file(dir / "report.txt", text);
  check(nli_report_confusion_csv(report.get(), &s), "report");
  write_file(dir / "confusion.csv", take(s));
  check(nli_report_predictions(report.get(), &s), "report");
  write_file(dir / "predictions.txt", take(s));

  Manifest manifest("eval", {{"model", a.model}, {"data", a.data}, {"out", a.out_dir}});
  manifest.input(a.model);
  manifest.input(a.data);
  for (const char* f : {"report.json", "report.txt", "confusion.csv", "predictions.txt"}) manifest.output(dir / f);
  manifest.note("accuracy", nli_report_accuracy(report.get()));
  manifest.note("plain_accuracy", nli_report_plain_accuracy(report.get()));
  manifest.note("f1_macro", nli_report_f1_macro(report.get()));
  manifest.write(dir / "manifest.json");
  std::cout << text;
  return 0;
}

// ---- verify ----------------------------------------------------------------

struct VerifyArgs {
  std::uint64_t seed = 1;
  bool inject_fault = false;
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  char* report = nullptr;
  const nli_status s = nli_verify(a.seed, a.inject_fault, &report);
  if (s != NLI_OK && s != NLI_ERR_VERIFY) throw Failure{s, std::string("verify: ") + nli_last_error()};
  const json j = json::parse(take(report));
  for (const auto& c : j["checks"]) {
    std::printf("%-4s %-24s %.3e < %.0e  %s\n", c["passed"].get<bool>() ? "PASS" : "FAIL",
                c["name"].get<std::string>().c_str(), c["value"].get<double>(), c["threshold"].get<double>(),
                c["detail"].get<std::string>().c_str());
  }
  Manifest manifest("verify", {{"seed", a.seed}, {"inject_fault", a.inject_fault}, {"out", a.out}});
  manifest.note("seed", a.seed);
  manifest.note("passed", j["passed"]);
  if (!a.out.empty()) {
    write_file(a.out, j.dump(2) + "\n");
    manifest.output(a.out);
    manifest.write(a.out + ".manifest.json");
  }
  std::printf("%s\n", s == NLI_OK ? "all checks passed" : "verification FAILED");
  return s == NLI_OK ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence-pair inference with CNN and BiLSTM heads"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nli_version());

  GenArgs gen;
  nli_synth_options_default(&gen.synth);
  auto* g = app.add_subcommand("gen-corpus", "Generate a synthetic corpus and split it into train/dev/test");
  g->add_option("--out", gen.out_dir, "Output directory")->required();
  g->add_option("--per-label", gen.synth.per_label, "Pairs per label")->capture_default_str();
  g->add_option("--labels", gen.synth.label_mode, "Label schema (3 or 4)")->check(CLI::IsMember({3, 4}))
      ->capture_default_str();
  g->add_option("--nouns", gen.synth.nouns, "Noun vocabulary size")->capture_default_str();
  g->add_option("--verbs", gen.synth.verbs, "Verb vocabulary size")->capture_default_str();
  g->add_option("--adverbs", gen.synth.adverbs, "Adverb vocabulary size (0: none)")->capture_default_str();
  g->add_option("--negation", gen.synth.negation_fraction, "Fraction of contradictions built by negation")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  g->add_option("--split", gen.split, "Train, dev and test ratios")->expected(3)->capture_default_str();
  g->add_option("--split-seed", gen.split_seed, "Seed for the split (default: --seed)");
  g->add_option("--seed", gen.synth.seed, "Generator seed")->capture_default_str();

  VocabArgs voc;
  auto* vc = app.add_subcommand("vocab", "Train a BPE vocabulary and report the longest encoded pair");
  vc->add_option("--data", voc.data, "JSON-lines or TSV dataset")->required()->check(CLI::ExistingFile);
  vc->add_option("--out", voc.out, "Vocabulary file to write")->required();
  vc->add_option("--merges", voc.merges, "Number of BPE merges")->capture_default_str();

  TrainArgs tr;
  nli_model_options_default(&tr.model);
  nli_train_options_default(&tr.opt);
  tr.opt.learning_rate = 1e-3;
  auto* t = app.add_subcommand("train", "Train a model and write its best checkpoint");
  t->add_option("--train", tr.train, "Training set")->required()->check(CLI::ExistingFile);
  t->add_option("--dev", tr.dev, "Dev set for best-checkpoint selection")->check(CLI::ExistingFile);
  t->add_option("--vocab", tr.vocab, "Vocabulary file (default: trained on --train)")->check(CLI::ExistingFile);
  t->add_option("--merges", tr.merges, "BPE merges when no --vocab is given")->capture_default_str();
  t->add_option("--out", tr.out, "Checkpoint to write")->required();
  t->add_option("--log", tr.log, "Per-epoch JSON log file (default: standard output)");
  t->add_option("--head", tr.head, "cnn or bilstm")->capture_default_str();
  t->add_option("--embed", tr.embed, "contextual or static")->capture_default_str();
  t->add_option("--labels", tr.model.label_mode, "Label schema (3 or 4)")->check(CLI::IsMember({3, 4}))
      ->capture_default_str();
  t->add_option("--vectors", tr.vectors, "Static word vectors (\"V d\" header, token + d numbers per line)")
      ->check(CLI::ExistingFile);
  t->add_option("--static-dim", tr.model.static_dim, "Width of a random static table")->capture_default_str();
  t->add_flag("--static-trainable", tr.model.static_trainable, "Update the static vectors during training");
  t->add_option("--width", tr.model.width, "Static path: projection width")->capture_default_str();
  t->add_option("--max-len", tr.max_len, "Padded pair length (0: longest training pair)")->capture_default_str();
  t->add_option("--order", tr.order, "hypothesis_first or premise_first")
      ->check(CLI::IsMember({"hypothesis_first", "premise_first"}))->capture_default_str();
  t->add_option("--layers", tr.model.layers, "Encoder layers")->capture_default_str();
  t->add_option("--attention-heads", tr.model.attention_heads, "Encoder attention heads")->capture_default_str();
  t->add_option("--d-model", tr.model.d_model, "Encoder width")->capture_default_str();
  t->add_option("--d-ff", tr.model.d_ff, "Encoder feed-forward width")->capture_default_str();
  t->add_option("--head-width", tr.model.head_input_width, "Head input projection width")->capture_default_str();
  t->add_option("--filters", tr.model.cnn_filters, "CNN filters per window")->capture_default_str();
  t->add_option("--lstm-hidden", tr.model.lstm_hidden, "BiLSTM hidden size")->capture_default_str();
  t->add_option("--lstm-layers", tr.model.lstm_layers, "BiLSTM layers")->capture_default_str();
  t->add_option("--dropout", tr.model.dropout, "Head dropout rate")->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();
  t->add_option("--lr", tr.opt.learning_rate, "Adam learning rate")->capture_default_str();
  t->add_option("--batch", tr.opt.batch_size, "Mini-batch size")->capture_default_str();
  t->add_option("--epochs", tr.opt.epochs, "Epochs (0: write the initialised model)")->capture_default_str();
  t->add_option("--beta1", tr.opt.beta1, "Adam beta1")->capture_default_str();
  t->add_option("--beta2", tr.opt.beta2, "Adam beta2")->capture_default_str();
  t->add_option("--epsilon", tr.opt.epsilon, "Adam epsilon")->capture_default_str();
  t->add_flag("--freeze-encoder", tr.opt.freeze_encoder, "Keep encoder parameters fixed");
  t->add_option("--seed", tr.opt.seed, "Seed for initialisation, shuffling and dropout")->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint and write JSON, text, CSV and prediction files");
  e->add_option("--model", ev.model, "Checkpoint")->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data, "Dataset to evaluate")->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out_dir, "Report directory")->required();

  VerifyArgs vf;
  auto* v = app.add_subcommand("verify", "Run gradient, metric and dropout self-checks");
  v->add_option("--seed", vf.seed, "Seed for the checks")->capture_default_str();
  v->add_flag("--inject-fault", vf.inject_fault, "Break one backward pass to show the checks catch it");
  v->add_option("--out", vf.out, "Write the JSON summary here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) return run_gen(gen);
    if (*vc) return run_vocab(voc);
    if (*t) {
      tr.model.seed = tr.opt.seed;
      return run_train(tr);
    }
    if (*e) return run_eval(ev);
    if (*v) return run_verify(vf);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return static_cast<int>(f.status);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return NLI_ERR_INTERNAL;
  }
  return 1;
}
