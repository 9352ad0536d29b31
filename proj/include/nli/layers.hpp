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
#include <string>

#include "nli/ops.hpp"
#include "nli/rng.hpp"
#include "nli/tape.hpp"

namespace nli {

void init_uniform(Tensor& t, double limit, Rng& rng);
/// Glorot-uniform limit sqrt(6 / (fan_in + fan_out)).
double glorot_limit(std::size_t fan_in, std::size_t fan_out);

// Affine map x . W + b with W [in x out], b [out].
struct Linear {
  Linear() = default;
  Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng);

  std::size_t in() const { return weight.value.dim(0); }
  std::size_t out() const { return weight.value.dim(1); }
  Var forward(Tape& tape, Var x) { return ops::linear(x, tape.parameter(weight), tape.parameter(bias)); }
  void collect(ParameterList& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  Parameter weight;
  Parameter bias;
};

struct LayerNorm {
  LayerNorm() = default;
  LayerNorm(const std::string& name, std::size_t width);

  Var forward(Tape& tape, Var x) { return ops::layer_norm(x, tape.parameter(gain), tape.parameter(shift)); }
  void collect(ParameterList& out) {
    out.push_back(&gain);
    out.push_back(&shift);
  }

  Parameter gain;
  Parameter shift;
};

}  // namespace nli
