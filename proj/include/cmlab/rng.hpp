// Copyright 2026 The cmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Portable seeded randomness. The standard distributions are
// implementation-defined, so every draw that feeds an output goes through
// the helpers below to keep results identical across toolchains.

#ifndef CMLAB_RNG_HPP_
#define CMLAB_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace cmlab {

using Rng = std::mt19937_64;

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Per-sample stream seed: hash(global seed, sample id).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view id);

// Uniform double in [0, 1) with 53 random bits.
double unit_uniform(Rng& rng);

// Uniform integer in [0, n), n > 0, by rejection sampling.
std::size_t uniform_index(Rng& rng, std::size_t n);

template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace cmlab

#endif  // CMLAB_RNG_HPP_
