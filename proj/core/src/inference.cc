// inference.cc
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

#include "embr/inference.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "embr/error.h"
#include "embr/log-math.h"

namespace embr {
namespace {

double ReweightedLogProb(const Edge &e, const BetaTable &beta) {
  double from = beta.log_beta[e.src];
  double to = beta.log_beta[e.dst];
  if (from == kLogZero || to == kLogZero || e.log_weight == kLogZero) {
    return kLogZero;
  }
  return e.log_weight + to - from;
}

template <typename LogProb>
Path Ancestral(const Wfst &fst, RandomStream &rng, LogProb &&log_prob) {
  Path path;
  StateId at = fst.Initial();
  while (at != fst.Final()) {
    EdgeId e = ChooseEdge(fst, at, rng.Uniform(), log_prob);
    if (e < 0) {
      throw Error(ErrorKind::kInternal,
                  "sampling reached dead-end state " + std::to_string(at));
    }
    path.edges.push_back(e);
    path.log_weight += fst.GetEdge(e).log_weight;
    at = fst.GetEdge(e).dst;
  }
  return path;
}

}  // namespace

BetaTable Backward(const Wfst &fst) {
  std::vector<StateId> order = TopologicalOrder(fst);
  BetaTable beta{std::vector<double>(fst.NumStates(), kLogZero)};
  beta.log_beta[fst.Final()] = 0.0;
  std::vector<double> terms;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    StateId s = *it;
    if (s == fst.Final()) continue;
    terms.clear();
    for (EdgeId id : fst.OutEdges(s)) {
      const Edge &e = fst.GetEdge(id);
      terms.push_back(e.log_weight + beta.log_beta[e.dst]);
    }
    beta.log_beta[s] = LogSumExp(terms);
  }
  return beta;
}

std::vector<double> Forward(const Wfst &fst) {
  std::vector<StateId> order = TopologicalOrder(fst);
  std::vector<std::vector<double>> incoming(fst.NumStates());
  std::vector<double> log_alpha(fst.NumStates(), kLogZero);
  for (StateId s : order) {
    log_alpha[s] = s == fst.Initial() ? 0.0 : LogSumExp(incoming[s]);
    for (EdgeId id : fst.OutEdges(s)) {
      const Edge &e = fst.GetEdge(id);
      incoming[e.dst].push_back(log_alpha[s] + e.log_weight);
    }
  }
  return log_alpha;
}

StochasticFst ReweightStochastic(const Wfst &fst, const BetaTable &beta) {
  if (beta.LogZ() == kLogZero) {
    throw Error(ErrorKind::kDegenerate, "total path weight is zero");
  }
  std::vector<Edge> edges(fst.Edges().begin(), fst.Edges().end());
  for (Edge &e : edges) e.log_weight = ReweightedLogProb(e, beta);
  return StochasticFst(Wfst(fst.NumStates(), std::move(edges), fst.Final()));
}

double MaxStochasticDeviation(const Wfst &fst) {
  std::vector<bool> reached(fst.NumStates(), false);
  std::vector<StateId> stack = {fst.Initial()};
  reached[fst.Initial()] = true;
  double worst = 0.0;
  std::vector<double> terms;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    if (s == fst.Final()) continue;
    terms.clear();
    for (EdgeId id : fst.OutEdges(s)) {
      const Edge &e = fst.GetEdge(id);
      terms.push_back(e.log_weight);
      if (e.log_weight != kLogZero && !reached[e.dst]) {
        reached[e.dst] = true;
        stack.push_back(e.dst);
      }
    }
    double total = LogSumExp(terms);
    worst = std::max(worst, total == kLogZero ? HUGE_VAL : std::abs(total));
  }
  return worst;
}

Path SamplePath(const StochasticFst &sfst, RandomStream &rng) {
  const Wfst &fst = sfst.Fst();
  return Ancestral(fst, rng,
                   [&](EdgeId e) { return fst.GetEdge(e).log_weight; });
}

PathSampler::PathSampler(const Wfst &fst) : fst_(fst), beta_(Backward(fst)) {
  if (beta_.LogZ() == kLogZero) {
    throw Error(ErrorKind::kDegenerate, "total path weight is zero");
  }
}

Path PathSampler::Sample(RandomStream &rng) const {
  return Ancestral(fst_, rng, [&](EdgeId e) {
    return ReweightedLogProb(fst_.GetEdge(e), beta_);
  });
}

std::vector<Path> SamplePaths(const Wfst &fst, std::size_t count,
                              const RandomStream &rng) {
  std::vector<Path> paths;
  if (count == 0) return paths;
  PathSampler sampler(fst);
  paths.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream stream = rng.Split(i);
    paths.push_back(sampler.Sample(stream));
  }
  return paths;
}

}  // namespace embr
