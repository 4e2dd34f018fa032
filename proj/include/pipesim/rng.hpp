/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 Pipesim Contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIPESIM_RNG_HPP
#define PIPESIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace pipesim {

/// splitmix64 mix step, used to derive per-stream seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random stream with a fully specified draw algorithm.
///
/// std::normal_distribution and friends are implementation-defined, which
/// would break byte-identical reproducibility across standard libraries.
/// This class draws uniforms directly from the (standard-specified)
/// mt19937_64 bit stream and applies Box-Muller by hand.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Consumes exactly two uniforms.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard the log singularity at u1 == 0.
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Multiplicative jitter factor: lognormal with parameter sigma.
  /// sigma == 0 returns exactly 1.0 without consuming random state, so
  /// zero-jitter configurations are RNG-free and exactly deterministic.
  double jitter(double sigma) {
    if (sigma <= 0.0) return 1.0;
    return std::exp(sigma * normal());
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pipesim

#endif  // PIPESIM_RNG_HPP
