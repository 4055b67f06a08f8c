/**
 * Copyright (c) 2026 The ginfer authors.
 *     All rights reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing,
 *  software distributed under the License is distributed on an "AS
 *  IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either
 *  express or implied.  See the License for the specific language
 *  governing permissions and limitations under the License.
 */

#ifndef GINFER_RNG_HPP
#define GINFER_RNG_HPP

#include <cstdint>

namespace ginfer {

// One-shot 64-bit finalizer (splitmix64 family). Stateless, used for
// hashing ids into workers.
inline std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Splitmix64 generator. Every seeded behavior in the library goes through
// this class so that a fixed seed reproduces bit-identically on any
// platform; std:: distributions are not portable across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Plain modulo: the tiny bias does not matter here,
  // cross-platform stability does.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Uniform in [0, 1) with 24 mantissa bits.
  float next_float() {
    return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f;
  }

  // Uniform in [0, 1) with 53 mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-s, s).
  float next_symmetric(float s) { return (2.0f * next_float() - 1.0f) * s; }

  // Derive an independent stream; used to decouple e.g. topology draws
  // from feature draws in the graph generator.
  SplitMix64 fork(std::uint64_t salt) const {
    return SplitMix64(mix64(state_ ^ (salt + 0x9e3779b97f4a7c15ull)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace ginfer

#endif  // GINFER_RNG_HPP
