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
#include <span>
#include <vector>

#include "nli/rng.hpp"
#include "nli/tape.hpp"

// Differentiable operations recorded on a Tape. Every op validates shapes
// (DimensionError) and rejects non-finite outputs (NumericError).
namespace nli::ops {

enum class Mode { train, eval };
enum class Activation { relu, tanh, sigmoid };

/// [m x k] . [k x n] -> [m x n]
Var matmul(Var a, Var b);
/// x [m x n] plus bias [n] broadcast over rows.
Var add_bias(Var x, Var bias);
/// x . w + b
Var linear(Var x, Var w, Var b);
Var add(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
Var scale(Var a, double factor);

Var activation(Activation kind, Var x);
inline Var relu(Var x) { return activation(Activation::relu, x); }
inline Var tanh(Var x) { return activation(Activation::tanh, x); }
inline Var sigmoid(Var x) { return activation(Activation::sigmoid, x); }

/// Rows of `table` [V x d] selected by index -> [n x d].
Var gather_rows(Var table, std::span<const std::size_t> rows);
/// Column means of x [n x d] -> [1 x d].
Var mean_rows(Var x);
/// x [1 x d] stacked n times -> [n x d].
Var repeat_rows(Var x, std::size_t n);
/// Append zero rows until x has `total_rows` rows.
Var pad_rows(Var x, std::size_t total_rows);
Var row(Var x, std::size_t r);
Var slice_cols(Var x, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);

/// Valid convolution over the sequence axis: input [L x d], kernels
/// [w x d x f], bias [f] -> [(L-w+1) x f]. Throws DimensionError when L < w.
Var conv1d(Var input, Var kernels, Var bias);

/// Per-feature maximum over the first `valid_rows` rows of x [L x f] -> [1 x f].
/// Rows at or beyond valid_rows behave as -inf. Ties go to the lowest index.
Var maxpool_time(Var x, std::size_t valid_rows);
inline Var maxpool_time(Var x) { return maxpool_time(x, x.value().rows()); }

/// Row-wise normalisation with learned gain and shift ([d] each).
Var layer_norm(Var x, Var gain, Var shift, double eps = 1e-5);

/// softmax(q k^T / sqrt(d_h) + mask_bias) v. `key_mask[j] == 0` marks key j as
/// padding (bias -inf). An empty mask means every key is real.
Var attention(Var q, Var k, Var v, std::span<const std::uint8_t> key_mask = {});
/// The attention weights matrix [Lq x Lk] the op above uses.
Tensor attention_weights(const Tensor& q, const Tensor& k, std::span<const std::uint8_t> key_mask = {});

/// Inverted dropout. Eval mode (or rate 0) returns `x` itself.
Var dropout(Var x, double rate, Mode mode, Rng& rng);

struct SoftmaxXent {
  Var loss;      // [1 x 1], mean negative log-likelihood of the gold labels
  Tensor probs;  // [n x K]
};
SoftmaxXent softmax_xent(Var logits, std::span<const std::size_t> gold);

/// sum(x * weights) -> [1 x 1]; used to reduce arbitrary outputs to a scalar.
Var weighted_sum(Var x, const Tensor& weights);

}  // namespace nli::ops

namespace nli::testing {

// While alive, matmul's backward pass negates the gradient it sends to its
// left operand. Exists so verification can prove it catches a broken backward.
class ScopedBackwardFault {
 public:
  ScopedBackwardFault();
  ~ScopedBackwardFault();
  ScopedBackwardFault(const ScopedBackwardFault&) = delete;
  ScopedBackwardFault& operator=(const ScopedBackwardFault&) = delete;

 private:
  bool previous_;
};

}  // namespace nli::testing
