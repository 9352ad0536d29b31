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

#include "nli/layers.hpp"

#include <cmath>

namespace nli {

void init_uniform(Tensor& t, double limit, Rng& rng) {
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Linear::Linear(const std::string& name, std::size_t in, std::size_t out, Rng& rng)
    : weight(name + ".weight", Tensor({in, out})), bias(name + ".bias", Tensor({out})) {
  init_uniform(weight.value, glorot_limit(in, out), rng);
}

LayerNorm::LayerNorm(const std::string& name, std::size_t width)
    : gain(name + ".gain", Tensor({width}, 1.0)), shift(name + ".shift", Tensor({width})) {}

}  // namespace nli
