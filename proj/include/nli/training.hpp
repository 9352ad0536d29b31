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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "nli/metrics.hpp"
#include "nli/model.hpp"

namespace nli {

struct AdamOptions {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  Tensor m;
  Tensor v;
};

/// One bias-corrected Adam update of `param` at step t >= 1. Throws
/// DimensionError when shapes disagree, ConfigError when t == 0.
void adam_step(Tensor& param, const Tensor& grad, AdamMoments& state, const AdamOptions& options, std::uint64_t t);

// Adam over a fixed parameter list. Frozen parameters are skipped and keep
// no moments.
class Adam {
 public:
  Adam(ParameterList params, AdamOptions options);

  /// Applies one update from the accumulated gradients, then clears them.
  void step();
  void zero_grad();
  std::uint64_t steps() const noexcept { return t_; }
  const AdamOptions& options() const noexcept { return options_; }

 private:
  ParameterList params_;
  std::vector<AdamMoments> moments_;
  AdamOptions options_;
  std::uint64_t t_ = 0;
};

struct TrainConfig {
  double learning_rate = 1e-5;
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool freeze_encoder = false;

  /// Throws ConfigError.
  void validate() const;
  AdamOptions adam() const { return {learning_rate, beta1, beta2, epsilon}; }
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::ordered_json to_json(const TrainConfig& config);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;      // mean over the epoch's pairs
  double train_accuracy = 0.0;  // plain accuracy of the training-mode predictions
  std::optional<MacroMetrics> dev;
  std::optional<double> dev_plain_accuracy;
  bool best = false;  // snapshot taken after this epoch
};

nlohmann::ordered_json to_json(const EpochLog& log);

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
};

/// Pairs encoded with the model's tokenizer settings, gold labels as indices
/// of the model's schema.
struct EncodedSet {
  std::vector<TokenSequence> sequences;
  std::vector<std::size_t> gold;
};

/// Throws SchemaError when a pair's label is outside the model's schema.
EncodedSet encode_set(const NliModel& model, std::span<const ExamplePair> pairs);

/// One optimizer step on a batch: stacked logits, mean cross-entropy,
/// backward, Adam. Returns the batch loss; `correct` receives the number of
/// training-mode argmax hits.
double train_batch(NliModel& model, const EncodedSet& set, std::span<const std::size_t> batch, Adam& adam, Rng& rng,
                   std::size_t* correct = nullptr);

using EpochCallback = std::function<void(const EpochLog&)>;

/// Seeded mini-batch training. With a dev set the parameters of the epoch
/// with the best dev macro F1 are restored at the end; without one the last
/// epoch is kept. A non-finite loss raises TrainingError naming the epoch and
/// step.
TrainResult train(NliModel& model, std::span<const ExamplePair> train_set, std::span<const ExamplePair> dev_set,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

struct Evaluation {
  EvalReport report;
  std::vector<std::size_t> predictions;  // schema indices, one per pair
};

/// Throws SchemaError for labels outside the model's schema and ConfigError
/// for an empty set.
Evaluation evaluate(NliModel& model, std::span<const ExamplePair> pairs);

}  // namespace nli
