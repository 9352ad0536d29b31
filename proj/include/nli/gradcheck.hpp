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

#include "nli/tape.hpp"

namespace nli {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;  // how many coordinates were compared
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at the worst coordinate
  double numeric = 0.0;
};

/// f maps a leaf on the tape to any output; outputs with more than one
/// element are contracted against fixed pseudo-random weights.
using TapeFunction = std::function<Var(Tape&, Var)>;

/// Compare the backward pass of `f` at `point` to central differences.
/// Error per coordinate is |analytic - numeric| / max(1, |analytic|).
/// Throws NumericError if any evaluation produces a non-finite value.
GradCheckResult grad_check(const TapeFunction& f, const Tensor& point, double epsilon = 1e-5,
                           std::uint64_t seed = 1);

/// Same check for a scalar loss over every coordinate of `params` (all of
/// them, or a seeded sample of at most `max_coordinates` when nonzero).
GradCheckResult grad_check_params(const std::function<Var(Tape&)>& loss, const ParameterList& params,
                                  double epsilon = 1e-5, std::size_t max_coordinates = 0, std::uint64_t seed = 1);

}  // namespace nli
