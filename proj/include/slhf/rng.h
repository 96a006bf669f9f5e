// Copyright 2026 The SLHF Toolkit Authors
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

#ifndef SLHF_RNG_H_
#define SLHF_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace slhf {

// All stochastic components draw from a 64-bit Mersenne Twister seeded
// explicitly. Uniforms and categorical draws below are computed from raw
// engine output, so a seed reproduces the same stream on every platform.
using Rng = std::mt19937_64;

// Independent seed for a named stream derived from a master seed
// (FNV-1a over the name, mixed with splitmix64).
uint64_t DeriveSeed(uint64_t master, std::string_view stream);

// Uniform on [0, 1) with 53 random bits.
double UniformUnit(Rng& rng);

// Inverse-CDF draw from a probability vector. Falls back to the last index
// with positive mass if rounding leaves the cumulative sum short of u.
int SampleCategorical(std::span<const double> probs, Rng& rng);

}  // namespace slhf

#endif  // SLHF_RNG_H_
