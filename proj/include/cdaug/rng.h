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

#ifndef CDAUG_RNG_H_
#define CDAUG_RNG_H_

#include <cstdint>
#include <string_view>

namespace cdaug {

// Counter-based random stream. The n-th draw is a pure function of
// (seed, stream_id, n), so sequences are identical across runs and
// platforms. Child streams are derived by stable integer or string keys;
// parallel consumers each own a child instead of sharing one stream.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream_id = 0);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }
  uint64_t position() const { return counter_; }

  uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n);
  // Uniform integer in [lo, hi], inclusive.
  int64_t range(int64_t lo, int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }
  // Standard normal via Box-Muller.
  double normal();

  RngStream child(uint64_t key) const;
  RngStream child(std::string_view key) const;
  RngStream child(std::string_view key, uint64_t index) const {
    return child(key).child(index);
  }

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  uint64_t key_;
  uint64_t counter_ = 0;
};

// 64-bit FNV-1a, used to turn string keys into stream ids.
uint64_t fnv1a64(std::string_view s);

}  // namespace cdaug

#endif  // CDAUG_RNG_H_
