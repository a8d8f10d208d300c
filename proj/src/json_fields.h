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


// Strict, path-reporting access to JSON objects. Internal to the library.

#ifndef CDAUG_SRC_JSON_FIELDS_H_
#define CDAUG_SRC_JSON_FIELDS_H_

#include <cstdint>
#include <set>
#include <string>
#include <type_traits>

#include "json.hpp"

#include "cdaug/errors.h"

namespace cdaug::internal {

using nlohmann::json;

template <typename E>
[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw E(path + ": " + what);
}

inline std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string index_path(const std::string& path, size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Converts one JSON value to T, raising E with `path` on a type mismatch.
template <typename E, typename T>
T convert(const json& v, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) fail<E>(path, "expected boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) fail<E>(path, "expected integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) return v.get<T>();
      if (v.get<int64_t>() < 0) fail<E>(path, "expected non-negative integer");
      return static_cast<T>(v.get<int64_t>());
    } else {
      const int64_t x = v.get<int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) fail<E>(path, "integer out of range");
      return static_cast<T>(x);
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) fail<E>(path, "expected number");
    return v.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) fail<E>(path, "expected string");
    return v.get<std::string>();
  } else {
    static_assert(sizeof(T) == 0, "unsupported field type");
  }
}

// Reads fields of one object; unknown keys are reported by finish().
template <typename E>
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      fail<E>(path_.empty() ? "<root>" : path_, "expected object");
    }
  }

  const std::string& path() const { return path_; }
  std::string field_path(const std::string& key) const {
    return join_path(path_, key);
  }

  // Assigns `out` when `key` is present; leaves it untouched otherwise.
  template <typename T>
  bool optional(const std::string& key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return false;
    out = convert<E, T>(*v, field_path(key));
    return true;
  }

  template <typename T>
  T required(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) fail<E>(field_path(key), "missing required field");
    return convert<E, T>(*v, field_path(key));
  }

  // Raw member access for nested structures; nullptr when absent.
  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) fail<E>(field_path(key), "missing required field");
    return *v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail<E>(field_path(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Parses text, reporting syntax errors with line and column as E.
template <typename E>
json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "line L, column C"; keep its message verbatim.
    throw E(source + ": " + e.what());
  }
}

}  // namespace cdaug::internal

#endif  // CDAUG_SRC_JSON_FIELDS_H_
