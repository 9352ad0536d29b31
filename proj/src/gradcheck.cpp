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

#include "nli/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nli/error.hpp"
#include "nli/ops.hpp"
#include "nli/rng.hpp"

namespace nli {
namespace {

void consider(GradCheckResult& r, std::size_t index, double analytic, double numeric) {
  if (!std::isfinite(numeric)) throw NumericError("grad_check: non-finite finite-difference estimate");
  const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
  ++r.coordinates;
  if (err > r.max_relative_error || r.coordinates == 1) {
    r.max_relative_error = std::max(r.max_relative_error, err);
    r.worst_index = index;
    r.analytic = analytic;
    r.numeric = numeric;
  }
}

double scalar_of(Var out) {
  if (out.value().size() != 1) throw DimensionError("grad_check: loss must be a scalar");
  const double v = out.value()[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite function value");
  return v;
}

}  // namespace

GradCheckResult grad_check(const TapeFunction& f, const Tensor& point, double epsilon, std::uint64_t seed) {
  Tensor weights;
  auto reduce = [&](Tape& tape, Var out) {
    if (out.value().size() == 1) return out;
    if (weights.shape() != out.shape()) {
      Rng rng(seed);
      weights = Tensor(out.shape());
      for (double& w : weights.data()) w = rng.uniform(-1.0, 1.0);
    }
    (void)tape;
    return ops::weighted_sum(out, weights);
  };

  Tensor analytic;
  {
    Tape tape;
    Var x = tape.input(point);
    Var y = reduce(tape, f(tape, x));
    scalar_of(y);
    tape.backward(y);
    analytic = tape.grad(x);
  }

  auto eval = [&](const Tensor& at) {
    Tape tape(false);
    Var x = tape.constant(at);
    return scalar_of(reduce(tape, f(tape, x)));
  };

  GradCheckResult r;
  Tensor probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + epsilon;
    const double up = eval(probe);
    probe[i] = point[i] - epsilon;
    const double down = eval(probe);
    probe[i] = point[i];
    consider(r, i, analytic[i], (up - down) / (2.0 * epsilon));
  }
  return r;
}

GradCheckResult grad_check_params(const std::function<Var(Tape&)>& loss, const ParameterList& params,
                                  double epsilon, std::size_t max_coordinates, std::uint64_t seed) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var y = loss(tape);
    scalar_of(y);
    tape.backward(y);
  }

  struct Coord {
    std::size_t param, index, flat;
  };
  std::vector<Coord> coords;
  std::size_t flat = 0;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (std::size_t i = 0; i < params[p]->value.size(); ++i) coords.push_back({p, i, flat++});
  if (max_coordinates && coords.size() > max_coordinates) {
    Rng rng(seed);
    rng.shuffle(std::span<Coord>(coords));
    coords.resize(max_coordinates);
    std::sort(coords.begin(), coords.end(), [](const Coord& a, const Coord& b) { return a.flat < b.flat; });
  }

  auto eval = [&] {
    Tape tape(false);
    return scalar_of(loss(tape));
  };

  GradCheckResult r;
  for (const Coord& c : coords) {
    Parameter& p = *params[c.param];
    const double original = p.value[c.index];
    p.value[c.index] = original + epsilon;
    const double up = eval();
    p.value[c.index] = original - epsilon;
    const double down = eval();
    p.value[c.index] = original;
    const double analytic = p.grad.empty() ? 0.0 : p.grad[c.index];
    consider(r, c.flat, analytic, (up - down) / (2.0 * epsilon));
  }
  return r;
}

}  // namespace nli
