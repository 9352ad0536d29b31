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
#include <stdexcept>
#include <string>

namespace nli {

// Base of every exception the library throws. The C API maps the kind to a
// status code; the CLI maps it to an exit code.
class Error : public std::runtime_error {
 public:
  enum class Kind { dimension, config, parse, numeric, label, io, schema, training, internal };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(Kind::dimension, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::config, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Kind::numeric, what) {}
};

class LabelError : public Error {
 public:
  explicit LabelError(const std::string& what) : Error(Kind::label, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Kind::io, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(Kind::schema, what) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what) : Error(Kind::training, what) {}
};

/// Malformed input file. `line()` is 1-based; 0 when the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(Kind::parse, line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nli
