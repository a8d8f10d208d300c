// Copyright 2026 The cdaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CDAUG_ERRORS_H_
#define CDAUG_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdaug {

// Base class for every error raised by the pipeline. `kind()` is a stable
// machine-readable tag used in CLI error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& message) : Error("bounds", message) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class EmptyObjectError : public Error {
 public:
  explicit EmptyObjectError(const std::string& message)
      : Error("empty-object", message) {}
};

class EmptyBankError : public Error {
 public:
  explicit EmptyBankError(const std::string& message)
      : Error("empty-bank", message) {}
};

class TooSmallError : public Error {
 public:
  explicit TooSmallError(const std::string& message)
      : Error("too-small", message) {}
};

class PlacementError : public Error {
 public:
  explicit PlacementError(const std::string& message)
      : Error("placement", message) {}
};

// Raised when no disjoint instance can be drawn. `provably_impossible()` is
// true when every category in the bank is excluded, false when the resample
// budget simply ran out.
class ExhaustionError : public Error {
 public:
  ExhaustionError(const std::string& message, bool provably_impossible)
      : Error("exhaustion", message), impossible_(provably_impossible) {}
  bool provably_impossible() const { return impossible_; }

 private:
  bool impossible_;
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message)
      : Error("training-failure", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

}  // namespace cdaug

#endif  // CDAUG_ERRORS_H_
