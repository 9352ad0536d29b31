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
#include <memory>
#include <string_view>
#include <vector>

#include "nli/layers.hpp"

namespace nli {

enum class HeadKind { cnn, bilstm };
std::string_view head_kind_name(HeadKind kind);
HeadKind parse_head_kind(std::string_view name);

inline constexpr std::size_t kHeadBranches = 4;

struct CnnHeadConfig {
  std::size_t input_width = 64;
  std::vector<std::size_t> windows{2, 3, 4};
  std::size_t filters_per_window = 32;
  std::size_t num_branches = kHeadBranches;
  std::size_t num_labels = 3;
  double dropout_rate = 0.1;

  /// Full-size setup: width 1024, windows {2,3,4} x 256 filters.
  static CnnHeadConfig full_size(std::size_t num_labels);
  std::size_t branch_dim() const { return windows.size() * filters_per_window; }
  std::size_t concat_width() const { return num_branches * branch_dim(); }
  std::size_t max_window() const;
  void validate() const;
  friend bool operator==(const CnnHeadConfig&, const CnnHeadConfig&) = default;
};

struct BilstmHeadConfig {
  std::size_t input_width = 64;
  std::size_t hidden_dim = 32;
  std::size_t layers = 2;
  std::size_t num_branches = kHeadBranches;
  std::size_t num_labels = 3;
  double dropout_rate = 0.1;

  /// Full-size setup: width 1024, hidden 1024, two layers.
  static BilstmHeadConfig full_size(std::size_t num_labels);
  std::size_t branch_dim() const { return 2 * hidden_dim; }
  std::size_t concat_width() const { return num_branches * branch_dim(); }
  void validate() const;
  friend bool operator==(const BilstmHeadConfig&, const BilstmHeadConfig&) = default;
};

// Classification head over a token matrix: a shared input projection, four
// branches of identical shape with independent weights, concatenation,
// dropout and a final linear layer to the label logits.
class Head {
 public:
  virtual ~Head() = default;

  virtual HeadKind kind() const = 0;
  virtual std::size_t branch_dim() const = 0;
  virtual std::size_t num_branches() const = 0;
  virtual std::size_t num_labels() const = 0;
  /// Rows a single pooled vector must be repeated to before entering the head.
  virtual std::size_t static_rows() const = 0;
  std::size_t concat_width() const { return num_branches() * branch_dim(); }

  /// Pre-dropout concatenation of the branch outputs [1 x concat_width].
  /// Only the first `real_len` rows of `context` are real.
  virtual Var features(Tape& tape, Var context, std::size_t real_len) = 0;
  /// Logits [1 x num_labels].
  Var forward(Tape& tape, Var context, std::size_t real_len, ops::Mode mode, Rng& rng);

  void collect(ParameterList& out);
  virtual ParameterList branch_parameters(std::size_t branch) = 0;

  Linear& projection() { return projection_; }
  Linear& classifier() { return classifier_; }
  double dropout_rate() const noexcept { return dropout_rate_; }

 protected:
  Head(std::size_t context_width, std::size_t input_width, std::size_t concat_width, std::size_t num_labels,
       double dropout_rate, Rng& rng);
  virtual void collect_branches(ParameterList& out) = 0;

  Linear projection_;
  Linear classifier_;
  double dropout_rate_;
};

struct CnnBranch {
  std::vector<Parameter> kernels;  // one [w x input_width x filters] per window
  std::vector<Parameter> biases;   // [filters] per window
};

/// conv1d -> relu -> maxpool over the valid windows, for every window width;
/// outputs concatenated -> [1 x windows * filters]. Throws DimensionError when
/// real_len is shorter than the largest window.
Var cnn_branch_forward(Tape& tape, Var x, std::size_t real_len, CnnBranch& branch);

class CnnHead final : public Head {
 public:
  CnnHead(std::size_t context_width, const CnnHeadConfig& config, Rng& rng);

  HeadKind kind() const override { return HeadKind::cnn; }
  std::size_t branch_dim() const override { return config_.branch_dim(); }
  std::size_t num_branches() const override { return config_.num_branches; }
  std::size_t num_labels() const override { return config_.num_labels; }
  std::size_t static_rows() const override { return config_.max_window(); }
  Var features(Tape& tape, Var context, std::size_t real_len) override;
  ParameterList branch_parameters(std::size_t branch) override;
  const CnnHeadConfig& config() const noexcept { return config_; }

 private:
  void collect_branches(ParameterList& out) override;

  CnnHeadConfig config_;
  std::vector<CnnBranch> branches_;
};

struct LstmWeights {
  Parameter input;      // [in x 4H], gate order i, f, g, o
  Parameter recurrent;  // [H x 4H]
  Parameter bias;       // [4H]
};

struct LstmState {
  Var h;
  Var c;
};

/// One LSTM step given the input contribution x.W + b for this step [1 x 4H].
LstmState lstm_cell(Tape& tape, Var input_gates, const LstmState& prev, Parameter& recurrent);

struct BilstmBranch {
  std::vector<LstmWeights> forward;   // per layer
  std::vector<LstmWeights> backward;  // per layer
};

/// Stacked bidirectional LSTM over the first real_len rows; returns the top
/// layer's final forward state concatenated with its final backward state.
Var bilstm_branch_forward(Tape& tape, Var x, std::size_t real_len, BilstmBranch& branch);

class BilstmHead final : public Head {
 public:
  BilstmHead(std::size_t context_width, const BilstmHeadConfig& config, Rng& rng);

  HeadKind kind() const override { return HeadKind::bilstm; }
  std::size_t branch_dim() const override { return config_.branch_dim(); }
  std::size_t num_branches() const override { return config_.num_branches; }
  std::size_t num_labels() const override { return config_.num_labels; }
  std::size_t static_rows() const override { return 1; }
  Var features(Tape& tape, Var context, std::size_t real_len) override;
  ParameterList branch_parameters(std::size_t branch) override;
  const BilstmHeadConfig& config() const noexcept { return config_; }

 private:
  void collect_branches(ParameterList& out) override;

  BilstmHeadConfig config_;
  std::vector<BilstmBranch> branches_;
};

}  // namespace nli
