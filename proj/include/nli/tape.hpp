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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nli/tensor.hpp"

namespace nli {

// A named trainable array. Gradients accumulate into `grad` across backward
// passes until the optimizer consumes and clears them.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value) : name(std::move(name)), value(std::move(value)) {}

  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  void zero_grad() { grad = Tensor(value.shape()); }
};

using ParameterList = std::vector<Parameter*>;

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// tape that produced it is alive.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

// Reverse-mode recording of the fixed op set in ops.hpp. Nodes are appended
// in creation order, which is a valid topological order for backward().
class Tape {
 public:
  // Receives the gradient of the node's output. Writes input gradients via
  // Tape::sink().
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  /// With record == false nothing is kept for backward (evaluation mode).
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf reading p.value in place. Gradients flow straight into p.grad when
  /// p.trainable; p must outlive the tape and stay unmodified while it lives.
  Var parameter(Parameter& p);
  /// Leaf whose gradient is kept on the tape (read it with grad()).
  Var input(Tensor value);

  /// Append an op output. `inputs` decides whether the node needs a gradient.
  Var record(Tensor value, std::span<const Var> inputs, Backward backward);

  /// Seed d(root)/d(root) = 1 and propagate. `root` must hold one element.
  void backward(Var root);

  const Tensor& value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.parameter ? n.parameter->value : n.value;
  }
  /// Gradient of a node after backward(); zeros when none reached it.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient buffer to accumulate into, or nullptr when `v` needs none.
  Tensor* sink(Var v);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
    Parameter* parameter = nullptr;  // set for parameter leaves (value lives there)
    bool requires_grad = false;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool record_;
};

inline const Tensor& Var::value() const { return tape->value(*this); }

}  // namespace nli
