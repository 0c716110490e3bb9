// embr/random.h
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
//
// Counter-based random streams. A stream is identified by (seed, stream id);
// the k-th draw of a stream depends only on (seed, stream id, k), so
// samples drawn in parallel with one stream per sample index are
// reproducible regardless of scheduling.

#ifndef EMBR_RANDOM_H_
#define EMBR_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace embr {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(Mix64(Mix64(seed ^ 0x6a09e667f3bcc909ULL) +
                   Mix64(stream + 0x3c6ef372fe94f82bULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return Mix64(key_ ^ Mix64(counter_ * 0x9e3779b97f4a7c15ULL));
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes two draws.
  double Normal() {
    double u1 = 1.0 - Uniform();  // (0, 1]
    double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Independent child stream.
  RandomStream Split(std::uint64_t stream) const {
    return RandomStream(key_, stream);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace embr

#endif  // EMBR_RANDOM_H_
