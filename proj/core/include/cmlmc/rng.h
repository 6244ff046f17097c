// Copyright 2026 The cmlmc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CMLMC_RNG_H_
#define CMLMC_RNG_H_

#include <cstdint>
#include <limits>

namespace cmlmc {

// Purpose tags mixed into derived seeds. Values are part of the on-disk
// reproducibility contract; append only.
enum class SeedTag : std::uint64_t {
  kFolds = 1,
  kHalfSplit = 2,
  kTree = 3,
  kLassoCv = 4,
  kPopulationUnit = 5,
  kValidation = 6,
  kReplication = 7,
  kAssignment = 8,
  kIteNoise = 9,
  kNuisance = 10,
  kIate = 11,
  kCentering = 12,
  kSampleDraw = 13,
};

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream key from (master, tag, index). Any component
// can be re-run in isolation from these three values alone.
constexpr std::uint64_t DeriveSeed(std::uint64_t master, SeedTag tag,
                                   std::uint64_t index) {
  return Mix64(Mix64(master ^ Mix64(static_cast<std::uint64_t>(tag))) ^
               Mix64(index + 0x632be59bd9b4e019ULL));
}

// Counter-based generator: the i-th output is a pure function of (key, i).
// Satisfies UniformRandomBitGenerator so it can feed std::shuffle, but the
// library draws variates through the members below so that results do not
// depend on the standard library's distribution implementations.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return Next(); }
  result_type Next() { return Mix64(key_ ^ Mix64(counter_++)); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform();
  // Uniform integer in [0, n); n > 0. Lemire's nearly-divisionless method.
  std::uint64_t Below(std::uint64_t n);
  // Standard normal via Box-Muller (no cached pair, so draws are stateless
  // apart from the counter).
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }
  // Poisson(mean) by inversion; intended for small means.
  int Poisson(double mean);

  std::uint64_t counter() const { return counter_; }
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cmlmc

#endif  // CMLMC_RNG_H_
