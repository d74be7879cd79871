// Copyright 2026 The Divisio Authors
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

#ifndef DIVISIO_RNG_HPP
#define DIVISIO_RNG_HPP

#include <cstdint>
#include <random>

namespace divisio {

// Library-wide random generator. All randomized constructors take an explicit
// Rng& so the caller owns the state and runs are reproducible from a seed.
using Rng = std::mt19937_64;

/// splitmix64 step, used to derive independent per-task seeds from a base
/// seed and a task index without correlations between adjacent indices.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = base;
  h = mix_seed(h ^ a);
  h = mix_seed(h ^ b);
  h = mix_seed(h ^ c);
  return h;
}

}  // namespace divisio

#endif  // DIVISIO_RNG_HPP
