// Copyright 2026 The otafl Authors
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

#ifndef OTAFL_RANDOM_HPP_
#define OTAFL_RANDOM_HPP_

#include <cstdint>
#include <limits>
#include <random>

#include "otafl/types.hpp"

namespace otafl {

// Tags separating the independent random substreams. Every draw in the
// simulator is keyed by (master seed, purpose, up to three indices), so a
// slot or client can be evaluated in any order and reproduce the serial
// sequence.
enum class Purpose : std::uint64_t {
  kChannel = 1,
  kError = 2,
  kNoise = 3,
  kShadowing = 4,
  kPlacement = 5,
  kPhase = 6,
  kLocalSgd = 7,
  kSchedule = 8,
  kData = 9,
  kTask = 10,
  kRepetition = 11,
  kUpdates = 12,
};

std::uint64_t splitmix64(std::uint64_t& state);

// Mixes a key tuple into one 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, Purpose purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0,
                          std::uint64_t c = 0);

// xoshiro256** engine; satisfies UniformRandomBitGenerator so it plugs into
// the <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  // Independent substream for a key tuple.
  static Rng stream(std::uint64_t master, Purpose purpose, std::uint64_t a = 0,
                    std::uint64_t b = 0, std::uint64_t c = 0) {
    return Rng(derive_seed(master, purpose, a, b, c));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  double uniform() { return uniform_(*this); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(*this); }
  // Circularly-symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
  cd complex_normal();

 private:
  std::uint64_t s_[4];
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace otafl

#endif  // OTAFL_RANDOM_HPP_
