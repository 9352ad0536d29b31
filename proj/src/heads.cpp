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

#include "nli/heads.hpp"

#include <algorithm>
#include <string>

#include "nli/error.hpp"

namespace nli {

std::string_view head_kind_name(HeadKind kind) { return kind == HeadKind::cnn ? "cnn" : "bilstm"; }

HeadKind parse_head_kind(std::string_view name) {
  if (name == "cnn") return HeadKind::cnn;
  if (name == "bilstm") return HeadKind::bilstm;
  throw ConfigError("unknown head kind '" + std::string(name) + "' (expected cnn or bilstm)");
}

namespace {

void check_common(std::size_t input_width, std::size_t branches, std::size_t labels, double dropout) {
  if (input_width == 0) throw ConfigError("head input width must be positive");
  if (branches != kHeadBranches) throw ConfigError("heads always use " + std::to_string(kHeadBranches) + " branches");
  if (labels != 3 && labels != 4) throw ConfigError("heads predict 3 or 4 labels");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
}

}  // namespace

CnnHeadConfig CnnHeadConfig::full_size(std::size_t num_labels) {
  CnnHeadConfig c;
  c.input_width = 1024;
  c.windows = {2, 3, 4};
  c.filters_per_window = 256;
  c.num_labels = num_labels;
  return c;
}

std::size_t CnnHeadConfig::max_window() const {
  return windows.empty() ? 0 : *std::max_element(windows.begin(), windows.end());
}

void CnnHeadConfig::validate() const {
  check_common(input_width, num_branches, num_labels, dropout_rate);
  if (windows.empty()) throw ConfigError("CNN head needs at least one window");
  for (std::size_t w : windows)
    if (w == 0) throw ConfigError("CNN windows must be at least 1");
  if (filters_per_window == 0) throw ConfigError("CNN head needs at least one filter per window");
}

BilstmHeadConfig BilstmHeadConfig::full_size(std::size_t num_labels) {
  BilstmHeadConfig c;
  c.input_width = 1024;
  c.hidden_dim = 1024;
  c.layers = 2;
  c.num_labels = num_labels;
  return c;
}

void BilstmHeadConfig::validate() const {
  check_common(input_width, num_branches, num_labels, dropout_rate);
  if (hidden_dim == 0) throw ConfigError("BiLSTM hidden_dim must be positive");
  if (layers == 0) throw ConfigError("BiLSTM needs at least one layer");
}

Head::Head(std::size_t context_width, std::size_t input_width, std::size_t concat_width, std::size_t num_labels,
           double dropout_rate, Rng& rng)
    : projection_("head.projection", context_width, input_width, rng),
      classifier_("head.classifier", concat_width, num_labels, rng),
      dropout_rate_(dropout_rate) {}

Var Head::forward(Tape& tape, Var context, std::size_t real_len, ops::Mode mode, Rng& rng) {
  Var concat = features(tape, context, real_len);
  return classifier_.forward(tape, ops::dropout(concat, dropout_rate_, mode, rng));
}

void Head::collect(ParameterList& out) {
  projection_.collect(out);
  collect_branches(out);
  classifier_.collect(out);
}

// ---- CNN -------------------------------------------------------------------

Var cnn_branch_forward(Tape& tape, Var x, std::size_t real_len, CnnBranch& branch) {
  std::vector<Var> pooled;
  pooled.reserve(branch.kernels.size());
  for (std::size_t i = 0; i < branch.kernels.size(); ++i) {
    const std::size_t w = branch.kernels[i].value.dim(0);
    if (real_len < w)
      throw DimensionError("sequence of " + std::to_string(real_len) + " tokens is shorter than CNN window " +
                           std::to_string(w));
    Var conv = ops::conv1d(x, tape.parameter(branch.kernels[i]), tape.parameter(branch.biases[i]));
    // Windows that would overlap padding are excluded from the max.
    pooled.push_back(ops::maxpool_time(ops::relu(conv), real_len - w + 1));
  }
  return ops::concat_cols(pooled);
}

CnnHead::CnnHead(std::size_t context_width, const CnnHeadConfig& config, Rng& rng)
    : Head(context_width, config.input_width, config.concat_width(), config.num_labels, config.dropout_rate, rng),
      config_(config) {
  config_.validate();
  const std::size_t d = config.input_width, f = config.filters_per_window;
  for (std::size_t b = 0; b < config.num_branches; ++b) {
    CnnBranch branch;
    for (std::size_t w : config.windows) {
      const std::string p = "head.branch" + std::to_string(b) + ".conv" + std::to_string(w);
      Parameter kernel(p + ".kernel", Tensor({w, d, f}));
      init_uniform(kernel.value, glorot_limit(w * d, f), rng);
      branch.kernels.push_back(std::move(kernel));
      branch.biases.emplace_back(p + ".bias", Tensor({f}));
    }
    branches_.push_back(std::move(branch));
  }
}

Var CnnHead::features(Tape& tape, Var context, std::size_t real_len) {
  Var x = projection_.forward(tape, context);
  std::vector<Var> outs;
  outs.reserve(branches_.size());
  for (CnnBranch& b : branches_) outs.push_back(cnn_branch_forward(tape, x, real_len, b));
  return ops::concat_cols(outs);
}

ParameterList CnnHead::branch_parameters(std::size_t branch) {
  ParameterList out;
  CnnBranch& b = branches_.at(branch);
  for (std::size_t i = 0; i < b.kernels.size(); ++i) {
    out.push_back(&b.kernels[i]);
    out.push_back(&b.biases[i]);
  }
  return out;
}

void CnnHead::collect_branches(ParameterList& out) {
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    auto ps = branch_parameters(b);
    out.insert(out.end(), ps.begin(), ps.end());
  }
}

// ---- BiLSTM ----------------------------------------------------------------

LstmState lstm_cell(Tape& tape, Var input_gates, const LstmState& prev, Parameter& recurrent) {
  const std::size_t H = recurrent.value.dim(0);
  Var gates = ops::add(input_gates, ops::matmul(prev.h, tape.parameter(recurrent)));
  Var i = ops::sigmoid(ops::slice_cols(gates, 0, H));
  Var f = ops::sigmoid(ops::slice_cols(gates, H, H));
  Var g = ops::tanh(ops::slice_cols(gates, 2 * H, H));
  Var o = ops::sigmoid(ops::slice_cols(gates, 3 * H, H));
  Var c = ops::add(ops::mul(f, prev.c), ops::mul(i, g));
  Var h = ops::mul(o, ops::tanh(c));
  return {h, c};
}

namespace {

LstmWeights make_lstm(const std::string& name, std::size_t in, std::size_t hidden, Rng& rng) {
  LstmWeights w{Parameter(name + ".input", Tensor({in, 4 * hidden})),
                Parameter(name + ".recurrent", Tensor({hidden, 4 * hidden})),
                Parameter(name + ".bias", Tensor({4 * hidden}))};
  init_uniform(w.input.value, glorot_limit(in, 4 * hidden), rng);
  init_uniform(w.recurrent.value, glorot_limit(hidden, 4 * hidden), rng);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) w.bias.value[j] = 1.0;  // forget gate
  return w;
}

// Hidden states of one direction, indexed by time step.
std::vector<Var> run_direction(Tape& tape, Var x, std::size_t n, LstmWeights& w, bool reverse) {
  const std::size_t H = w.recurrent.value.dim(0);
  Var pre = ops::linear(x, tape.parameter(w.input), tape.parameter(w.bias));
  LstmState state{tape.constant(Tensor({1, H})), tape.constant(Tensor({1, H}))};
  std::vector<Var> hs(n);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t t = reverse ? n - 1 - s : s;
    state = lstm_cell(tape, ops::row(pre, t), state, w.recurrent);
    hs[t] = state.h;
  }
  return hs;
}

}  // namespace

Var bilstm_branch_forward(Tape& tape, Var x, std::size_t real_len, BilstmBranch& branch) {
  if (real_len == 0) throw DimensionError("BiLSTM branch needs at least one real position");
  if (real_len > x.value().rows()) throw DimensionError("real length exceeds the context rows");
  Var layer_input = x;
  std::vector<Var> fwd, bwd;
  for (std::size_t l = 0; l < branch.forward.size(); ++l) {
    fwd = run_direction(tape, layer_input, real_len, branch.forward[l], false);
    bwd = run_direction(tape, layer_input, real_len, branch.backward[l], true);
    if (l + 1 < branch.forward.size()) {
      std::vector<Var> rows;
      rows.reserve(real_len);
      for (std::size_t t = 0; t < real_len; ++t) {
        const Var both[] = {fwd[t], bwd[t]};
        rows.push_back(ops::concat_cols(both));
      }
      layer_input = ops::concat_rows(rows);
    }
  }
  const Var last[] = {fwd[real_len - 1], bwd[0]};
  return ops::concat_cols(last);
}

BilstmHead::BilstmHead(std::size_t context_width, const BilstmHeadConfig& config, Rng& rng)
    : Head(context_width, config.input_width, config.concat_width(), config.num_labels, config.dropout_rate, rng),
      config_(config) {
  config_.validate();
  for (std::size_t b = 0; b < config.num_branches; ++b) {
    BilstmBranch branch;
    for (std::size_t l = 0; l < config.layers; ++l) {
      const std::size_t in = l == 0 ? config.input_width : 2 * config.hidden_dim;
      const std::string p = "head.branch" + std::to_string(b) + ".layer" + std::to_string(l);
      branch.forward.push_back(make_lstm(p + ".forward", in, config.hidden_dim, rng));
      branch.backward.push_back(make_lstm(p + ".backward", in, config.hidden_dim, rng));
    }
    branches_.push_back(std::move(branch));
  }
}

Var BilstmHead::features(Tape& tape, Var context, std::size_t real_len) {
  Var x = projection_.forward(tape, context);
  std::vector<Var> outs;
  outs.reserve(branches_.size());
  for (BilstmBranch& b : branches_) outs.push_back(bilstm_branch_forward(tape, x, real_len, b));
  return ops::concat_cols(outs);
}

ParameterList BilstmHead::branch_parameters(std::size_t branch) {
  ParameterList out;
  BilstmBranch& b = branches_.at(branch);
  for (std::size_t l = 0; l < b.forward.size(); ++l)
    for (LstmWeights* w : {&b.forward[l], &b.backward[l]}) {
      out.push_back(&w->input);
      out.push_back(&w->recurrent);
      out.push_back(&w->bias);
    }
  return out;
}

void BilstmHead::collect_branches(ParameterList& out) {
  for (std::size_t b = 0; b < branches_.size(); ++b) {
    auto ps = branch_parameters(b);
    out.insert(out.end(), ps.begin(), ps.end());
  }
}

}  // namespace nli
