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

#include "nli/training.hpp"

#include <cmath>
#include <numeric>

#include "nli/error.hpp"

namespace nli {

void adam_step(Tensor& param, const Tensor& grad, AdamMoments& state, const AdamOptions& o, std::uint64_t t) {
  if (t == 0) throw ConfigError("adam_step: step counter starts at 1");
  if (grad.shape() != param.shape())
    throw DimensionError("adam_step: gradient " + to_string(grad.shape()) + " for parameter " +
                         to_string(param.shape()));
  if (state.m.shape() != param.shape()) state.m = Tensor(param.shape());
  if (state.v.shape() != param.shape()) state.v = Tensor(param.shape());
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    param[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
  }
}

Adam::Adam(ParameterList params, AdamOptions options)
    : params_(std::move(params)), moments_(params_.size()), options_(options) {
  if (!(options_.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

void Adam::step() {
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (!p.trainable) continue;
    if (p.grad.shape() != p.value.shape()) p.zero_grad();
    adam_step(p.value, p.grad, moments_[i], options_, t_);
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (Parameter* p : params_)
    if (!p->grad.empty()) p->grad.fill(0.0);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"epochs", c.epochs},
          {"seed", c.seed},                   {"beta1", c.beta1},           {"beta2", c.beta2},
          {"epsilon", c.epsilon},             {"freeze_encoder", c.freeze_encoder}};
}

nlohmann::ordered_json to_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["train_accuracy"] = e.train_accuracy;
  if (e.dev) {
    j["dev_accuracy"] = e.dev->accuracy;
    j["dev_plain_accuracy"] = *e.dev_plain_accuracy;
    j["dev_precision_macro"] = e.dev->precision;
    j["dev_recall_macro"] = e.dev->recall;
    j["dev_f1_macro"] = e.dev->f1;
  }
  j["best"] = e.best;
  return j;
}

EncodedSet encode_set(const NliModel& model, std::span<const ExamplePair> pairs) {
  EncodedSet out;
  out.sequences.reserve(pairs.size());
  out.gold.reserve(pairs.size());
  const LabelSchema& schema = model.schema();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!schema.contains(pairs[i].label))
      throw SchemaError("pair " + std::to_string(i + 1) + " has label '" + std::string(label_name(pairs[i].label)) +
                        "', which the model's " + std::to_string(schema.mode()) + "-label schema does not include");
    out.gold.push_back(schema.index(pairs[i].label));
    out.sequences.push_back(model.encode(pairs[i]));
  }
  return out;
}

double train_batch(NliModel& model, const EncodedSet& set, std::span<const std::size_t> batch, Adam& adam, Rng& rng,
                   std::size_t* correct) {
  Tape tape;
  std::vector<Var> rows;
  std::vector<std::size_t> gold;
  rows.reserve(batch.size());
  gold.reserve(batch.size());
  for (std::size_t i : batch) {
    rows.push_back(model.logits(tape, set.sequences[i], ops::Mode::train, rng));
    gold.push_back(set.gold[i]);
  }
  Var logits = ops::concat_rows(rows);
  ops::SoftmaxXent xent = ops::softmax_xent(logits, gold);
  const double loss = xent.loss.value()[0];
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");
  if (correct) {
    const Tensor& P = xent.probs;
    for (std::size_t r = 0; r < P.rows(); ++r) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < P.cols(); ++k)
        if (P.at(r, k) > P.at(r, best)) best = k;
      if (best == gold[r]) ++*correct;
    }
  }
  adam.zero_grad();
  tape.backward(xent.loss);
  adam.step();
  return loss;
}

namespace {

std::vector<Tensor> snapshot(const ParameterList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const Parameter* p : params) out.push_back(p->value);
  return out;
}

void restore(const ParameterList& params, const std::vector<Tensor>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

TrainResult train(NliModel& model, std::span<const ExamplePair> train_set, std::span<const ExamplePair> dev_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  TrainResult result;
  if (config.epochs == 0) return result;
  if (train_set.empty()) throw ConfigError("training set is empty");

  if (config.freeze_encoder) model.set_encoder_frozen(true);
  const EncodedSet train_enc = encode_set(model, train_set);
  // Dev labels are checked up front so a bad file fails before any training.
  encode_set(model, dev_set);

  const ParameterList params = model.parameters();
  Adam adam(params, config.adam());
  Rng shuffle_rng(config.seed);
  Rng dropout_rng = shuffle_rng.fork();

  std::vector<std::size_t> order(train_enc.sequences.size());
  std::vector<Tensor> best_values;
  double best_f1 = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      ++step;
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      std::span<const std::size_t> batch(order.data() + start, n);
      double loss = 0.0;
      try {
        loss = train_batch(model, train_enc, batch, adam, dropout_rng, &correct);
      } catch (const NumericError& e) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ", step " + std::to_string(step) +
                            ": " + e.what());
      }
      loss_sum += loss * static_cast<double>(n);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    if (!dev_set.empty()) {
      const Evaluation ev = evaluate(model, dev_set);
      entry.dev = ev.report.macro;
      entry.dev_plain_accuracy = ev.report.plain_accuracy;
      if (ev.report.macro.f1 > best_f1) {
        best_f1 = ev.report.macro.f1;
        best_values = snapshot(params);
        result.best_epoch = epoch;
        entry.best = true;
      }
    } else if (epoch == config.epochs) {
      result.best_epoch = epoch;
      entry.best = true;
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  if (!best_values.empty() && result.best_epoch != config.epochs) restore(params, best_values);
  return result;
}

Evaluation evaluate(NliModel& model, std::span<const ExamplePair> pairs) {
  if (pairs.empty()) throw ConfigError("evaluation set is empty");
  const EncodedSet enc = encode_set(model, pairs);
  Evaluation ev;
  ev.predictions = model.predict(pairs);
  std::vector<std::optional<std::string>> topics;
  topics.reserve(pairs.size());
  for (const auto& p : pairs) topics.push_back(p.topic);
  ev.report = make_report(enc.gold, ev.predictions, model.schema().names(), topics);
  return ev;
}

}  // namespace nli
