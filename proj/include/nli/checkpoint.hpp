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

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "nli/model.hpp"

namespace nli {

inline constexpr int kCheckpointVersion = 1;

// Layout: the line "NLICKPT1", the manifest's byte length on its own line,
// the JSON manifest (format version, model configuration, vocabulary, static
// table tokens, parameter names and shapes), then every parameter as
// little-endian float64 in manifest order.
void write_checkpoint(std::ostream& out, NliModel& model);
void save_checkpoint(const std::filesystem::path& path, NliModel& model);

/// Rebuilds the model. Throws SchemaError for a version or shape mismatch
/// (naming the parameter) and IoError for a truncated payload; nothing is
/// returned on failure.
std::unique_ptr<NliModel> read_checkpoint(std::istream& in);
std::unique_ptr<NliModel> load_checkpoint(const std::filesystem::path& path);

}  // namespace nli
