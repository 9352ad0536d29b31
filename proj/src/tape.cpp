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

#include "nli/tape.hpp"

#include "nli/error.hpp"

namespace nli {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.parameter = &p;
  n.requires_grad = record_ && p.trainable;
  return push(std::move(n));
}

Var Tape::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = record_;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& in : inputs) {
      if (in.tape != this) throw DimensionError("op inputs come from different tapes");
      if (nodes_[in.id].requires_grad) n.requires_grad = true;
    }
    if (n.requires_grad) n.backward = std::move(backward);
  }
  return push(std::move(n));
}

Tensor* Tape::sink(Var v) {
  Node& n = nodes_[v.id];
  if (!n.requires_grad) return nullptr;
  Tensor& g = n.parameter ? n.parameter->grad : n.grad;
  const Shape& shape = n.parameter ? n.parameter->value.shape() : n.value.shape();
  if (g.shape() != shape) g = Tensor(shape);
  return &g;
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  const Tensor& g = n.parameter ? n.parameter->grad : n.grad;
  if (g.shape() != value(v).shape()) return Tensor(value(v).shape());
  return g;
}

void Tape::backward(Var root) {
  if (!record_) throw ConfigError("backward() on a tape created without recording");
  if (value(root).size() != 1)
    throw DimensionError("backward() root must be a scalar, got " + to_string(value(root).shape()));
  if (Tensor* g = sink(root)) (*g)[0] += 1.0;

  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    // Closures only touch the grads of earlier nodes, so n.grad stays put.
    n.backward(*this, n.grad);
  }
}

}  // namespace nli
