// embr/log-math.h
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
// Log-domain arithmetic for the probability semiring. All weight sums go
// through these helpers so that long paths do not underflow.

#ifndef EMBR_LOG_MATH_H_
#define EMBR_LOG_MATH_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace embr {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)).
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(sum_i exp(values[i])) with max subtraction; kLogZero for empty input.
inline double LogSumExp(std::span<const double> values) {
  double max = kLogZero;
  for (double v : values) max = std::max(max, v);
  if (max == kLogZero || !std::isfinite(max)) return max;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

}  // namespace embr

#endif  // EMBR_LOG_MATH_H_
