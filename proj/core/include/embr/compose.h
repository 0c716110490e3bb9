// embr/compose.h
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
// Score FST construction, transducer composition and the per-path gradient
// of the log weight with respect to the acoustic logits.
//
// Clusters are numbered 1..Q on FST tapes; column c of a logit or gamma
// matrix belongs to cluster label c + 1.

#ifndef EMBR_COMPOSE_H_
#define EMBR_COMPOSE_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "embr/fst.h"
#include "embr/matrix.h"

namespace embr {

// T x Q matrix of finite acoustic logits, T >= 1 and Q >= 1.
class LogitMatrix {
 public:
  // Throws Error(kDimension) for an empty matrix and Error(kNumeric) for a
  // non-finite entry.
  explicit LogitMatrix(Matrix<double> values);
  LogitMatrix(std::size_t frames, std::size_t clusters, double fill = 0.0);

  std::size_t Frames() const { return values_.Rows(); }
  std::size_t Clusters() const { return values_.Cols(); }

  double operator()(std::size_t t, std::size_t c) const {
    return values_(t, c);
  }
  const Matrix<double> &Values() const { return values_; }

  // Copy with one entry replaced; used for finite-difference checks.
  LogitMatrix WithEntry(std::size_t t, std::size_t c, double value) const;

 private:
  Matrix<double> values_;
};

// Occupancy counts of (frame, cluster) pairs along a path. For a complete
// path of an unrolled decoder graph every row sums to one.
using GammaMatrix = Matrix<int>;

// Sausage FST with T + 1 states and one edge t -> t+1 per cluster q carrying
// ilabel = olabel = q and log-weight z(t, q - 1). State T is final.
Wfst BuildScoreFst(const LogitMatrix &z);

// Transducer composition a o b. Result states are (a, b) state pairs
// numbered in breadth-first discovery order, then trimmed to states lying on
// some initial-to-final path. Epsilons are supported on at most one side of
// the matched tape: output epsilons of `a` advance `a` alone, input epsilons
// of `b` advance `b` alone. Throws Error(kUnsupported) when both occur.
// When no path survives the result has two states and no edges.
Wfst Compose(const Wfst &a, const Wfst &b);

// Two-state transducer mapping every cluster sequence onto itself with unit
// weight: a loop q:q on state 0 for q = 1..Q and an epsilon edge to the final
// state 1.
Wfst IdentityTransducer(int num_clusters);

// Throws Error(kDimension) when the path has a number of non-epsilon input
// labels other than `frames` or a label outside 1..clusters.
GammaMatrix GetGammas(const Wfst &fst, const Path &path, std::size_t frames,
                      std::size_t clusters);

// Number of non-epsilon input labels consumed before reaching each state
// (-1 for states unreachable from the initial state). Throws
// Error(kUnsupported) when a state is reachable at two different depths and
// Error(kCyclic) for cyclic input.
std::vector<int> FrameDepths(const Wfst &fst);

// CSV: T rows of Q comma-separated decimal reals. Throws Error(kParse) with
// the offending line, including ragged rows.
LogitMatrix ParseLogitsCsv(std::istream &in, std::string_view source = "<input>");
LogitMatrix ReadLogitsCsv(const std::string &filename);
void WriteLogitsCsv(const LogitMatrix &z, std::ostream &out);

}  // namespace embr

#endif  // EMBR_COMPOSE_H_
