/*
 * Copyright 2026 The fairaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FAIRAUDIT_RNG_H_
#define FAIRAUDIT_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace fairaudit {

// SplitMix64 finalizer. Used to decorrelate user seeds before they reach the
// engine and as a stateless counter hash.
constexpr uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits of a 64-bit word.
constexpr double UnitFromBits(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Stateless uniform draw for stream position `index`; independent of the
// order in which positions are visited.
constexpr double CounterUniform(uint64_t seed, uint64_t index) {
  return UnitFromBits(SplitMix64(SplitMix64(seed) ^ (index * 0xD1B54A32D192ED03ULL)));
}

// Portable generator: std::mt19937_64 (bit-exact across standard libraries)
// seeded through SplitMix64. Every derived draw is computed here rather than
// through <random> distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(SplitMix64(seed)) {}

  uint64_t NextU64() { return engine_(); }
  double Uniform() { return UnitFromBits(engine_()); }

  // Uniform integer in [0, bound) by rejection (no modulo bias).
  uint64_t Below(uint64_t bound);

  // Standard normal via the polar Box-Muller method.
  double Normal();

  // Fisher-Yates.
  template <typename T>
  void Shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_RNG_H_
