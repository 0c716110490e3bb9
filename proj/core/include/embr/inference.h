// embr/inference.h
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
// Backward filtering, forward sampling. The backward pass computes for every
// state the log of the total weight of all partial paths to the final state.
// Using those values as a potential function, edge i -> j with weight w is
// reweighted to w * beta[j] / beta[i], which makes the FST stochastic while
// leaving every complete path's weight equal to its normalized probability.
// Paths are then drawn by ancestral sampling.

#ifndef EMBR_INFERENCE_H_
#define EMBR_INFERENCE_H_

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "embr/fst.h"
#include "embr/random.h"

namespace embr {

struct BetaTable {
  // log_beta[s] = log sum over paths s -> final of the path weight. States
  // with no route to the final state hold -inf.
  std::vector<double> log_beta;

  double LogZ() const { return log_beta[0]; }
};

// Throws Error(kCyclic).
BetaTable Backward(const Wfst &fst);

// log_alpha[s] = log sum over paths initial -> s. Throws Error(kCyclic).
std::vector<double> Forward(const Wfst &fst);

// A Wfst whose outgoing weights sum to one at every reachable non-final
// state. Edge ids match the FST it was derived from; edges that lie on no
// complete path carry weight -inf.
class StochasticFst {
 public:
  const Wfst &Fst() const { return fst_; }

 private:
  friend StochasticFst ReweightStochastic(const Wfst &, const BetaTable &);
  explicit StochasticFst(Wfst fst) : fst_(std::move(fst)) {}

  Wfst fst_;
};

// Throws Error(kDegenerate) when the total weight is zero.
StochasticFst ReweightStochastic(const Wfst &fst, const BetaTable &beta);

// Largest |log sum of outgoing weights| over non-final states reachable from
// the initial state through nonzero-weight edges. Zero for a stochastic FST.
double MaxStochasticDeviation(const Wfst &fst);

// Inverse-CDF choice over `state`'s outgoing edges in id order given
// per-edge log probabilities. Zero-probability edges are never chosen.
// Returns -1 when no edge has positive probability.
template <typename LogProb>
EdgeId ChooseEdge(const Wfst &fst, StateId state, double u,
                  LogProb &&log_prob);

// Ancestral sample from a materialized stochastic FST. The returned path's
// log_weight is its log probability. Throws Error(kInternal) on a dead end.
Path SamplePath(const StochasticFst &sfst, RandomStream &rng);

// Samples from the globally normalized distribution of `fst` with
// reweighting done on the fly from a single backward pass. The returned
// paths carry their original log-weights.
class PathSampler {
 public:
  // Throws Error(kCyclic) or Error(kDegenerate).
  explicit PathSampler(const Wfst &fst);

  Path Sample(RandomStream &rng) const;

  const Wfst &Fst() const { return fst_; }
  const BetaTable &Beta() const { return beta_; }

 private:
  const Wfst &fst_;
  BetaTable beta_;
};

// `count` independent paths; path i is drawn with rng.Split(i), so the
// result matches calling SamplePath with those streams one by one.
std::vector<Path> SamplePaths(const Wfst &fst, std::size_t count,
                              const RandomStream &rng);

// Implementation.

template <typename LogProb>
EdgeId ChooseEdge(const Wfst &fst, StateId state, double u,
                  LogProb &&log_prob) {
  double cumulative = 0.0;
  EdgeId last_positive = -1;
  for (EdgeId e : fst.OutEdges(state)) {
    double p = std::exp(log_prob(e));
    if (!(p > 0.0)) continue;
    last_positive = e;
    cumulative += p;
    if (u < cumulative) return e;
  }
  // Rounding can leave the cumulative mass just below u.
  return last_positive;
}

}  // namespace embr

#endif  // EMBR_INFERENCE_H_
