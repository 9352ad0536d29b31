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

#include "nli/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "nli/error.hpp"

namespace nli {

std::string to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size())
    throw DimensionError("tensor of shape " + to_string(shape_) + " cannot hold " + std::to_string(data_.size()) +
                         " elements");
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::row(std::initializer_list<double> values) { return Tensor({1, values.size()}, std::vector<double>(values)); }

std::size_t Tensor::rows() const {
  require_rank(*this, 2, "rows");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require_rank(*this, 2, "cols");
  return shape_[1];
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_)
    throw DimensionError("cannot add " + to_string(other.shape_) + " into " + to_string(shape_));
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

bool Tensor::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::require_finite(std::string_view where) const {
  if (!all_finite()) throw NumericError("non-finite value produced by " + std::string(where));
}

void require_rank(const Tensor& t, std::size_t rank, std::string_view op) {
  if (t.rank() != rank)
    throw DimensionError(std::string(op) + " expects a rank-" + std::to_string(rank) + " tensor, got " +
                         to_string(t.shape()));
}

}  // namespace nli
