// testing/fixtures.h
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
// Shared test fixtures and brute-force oracles. Nothing here calls the
// library routines that the oracles are used to check.

#ifndef EMBR_TESTS_TESTING_FIXTURES_H_
#define EMBR_TESTS_TESTING_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "embr/compose.h"
#include "embr/fst.h"
#include "embr/random.h"

namespace embr::testing {

// Random DAG over `num_states` states: state 0 initial, the last state
// final, edges only from lower to higher ids, and a guaranteed chain so the
// final state is reachable. Weights are uniform in [-2, 1]; labels in
// 0..max_label.
inline Wfst RandomAcyclicFst(RandomStream &rng, int num_states,
                             int max_label = 3, double edge_prob = 0.3) {
  std::vector<Edge> edges;
  auto weight = [&] { return -2.0 + 3.0 * rng.Uniform(); };
  auto label = [&] { return static_cast<Label>(rng() % (max_label + 1)); };
  for (StateId s = 0; s + 1 < num_states; ++s) {
    edges.push_back({s, s + 1, label(), label(), weight()});
    for (StateId d = s + 1; d < num_states; ++d) {
      if (rng.Uniform() < edge_prob) {
        edges.push_back({s, d, label(), label(), weight()});
      }
    }
  }
  return Wfst(num_states, std::move(edges), num_states - 1);
}

// Random acyclic decoder graph with input labels 0..clusters and output
// labels 0..vocab.
inline Wfst RandomDecoderGraph(RandomStream &rng, int num_states,
                               int clusters, int vocab) {
  std::vector<Edge> edges;
  for (StateId s = 0; s + 1 < num_states; ++s) {
    for (StateId d = s + 1; d < num_states; ++d) {
      int copies = static_cast<int>(rng() % 3);
      for (int k = 0; k < copies; ++k) {
        Label in = rng.Uniform() < 0.15
                       ? kEpsilon
                       : static_cast<Label>(1 + rng() % clusters);
        Label out = static_cast<Label>(rng() % (vocab + 1));
        edges.push_back({s, d, in, out, -1.0 + 2.0 * rng.Uniform()});
      }
    }
  }
  return Wfst(num_states, std::move(edges), num_states - 1);
}

inline LogitMatrix RandomLogits(RandomStream &rng, std::size_t frames,
                                std::size_t clusters, double scale = 1.0) {
  Matrix<double> m(frames, clusters);
  for (double &v : m.Data()) v = scale * (2.0 * rng.Uniform() - 1.0);
  return LogitMatrix(std::move(m));
}

// T = 1, Q = 2 lattice whose two paths have probabilities 0.4 and 0.6 and
// output words 1 and 2.
inline LogitMatrix TwoPathLogits() {
  Matrix<double> m(1, 2);
  m(0, 0) = std::log(0.4);
  m(0, 1) = std::log(0.6);
  return LogitMatrix(std::move(m));
}

inline Wfst TwoPathLattice() {
  return Compose(BuildScoreFst(TwoPathLogits()), IdentityTransducer(2));
}

// Independent path enumeration by explicit stack DFS; returns edge-id
// sequences in whatever order the DFS visits them.
inline std::vector<std::vector<EdgeId>> DfsPaths(const Wfst &fst) {
  std::vector<std::vector<EdgeId>> out;
  std::vector<std::pair<StateId, std::vector<EdgeId>>> stack = {
      {fst.Initial(), {}}};
  while (!stack.empty()) {
    auto [s, prefix] = std::move(stack.back());
    stack.pop_back();
    if (s == fst.Final()) {
      out.push_back(prefix);
      continue;
    }
    for (const Edge &e : fst.Edges()) {
      if (e.src != s) continue;
      auto next = prefix;
      next.push_back(static_cast<EdgeId>(&e - fst.Edges().data()));
      stack.push_back({e.dst, std::move(next)});
    }
  }
  return out;
}

// Plain exponential recursion for the Levenshtein distance.
inline int RecursiveEditDistance(const std::vector<Label> &a, std::size_t i,
                                 const std::vector<Label> &b, std::size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  int sub = RecursiveEditDistance(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1);
  int del = RecursiveEditDistance(a, i + 1, b, j) + 1;
  int ins = RecursiveEditDistance(a, i, b, j + 1) + 1;
  return std::min({sub, del, ins});
}

// All sequences over {1..alphabet} of length 0..max_len.
inline std::vector<std::vector<Label>> AllSequences(int alphabet,
                                                    int max_len) {
  std::vector<std::vector<Label>> out = {{}};
  std::vector<std::vector<Label>> frontier = {{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<Label>> next;
    for (const auto &seq : frontier) {
      for (Label a = 1; a <= alphabet; ++a) {
        auto s = seq;
        s.push_back(a);
        next.push_back(s);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

// A random logit matrix composed with a random decoder graph, redrawn until
// the unrolled graph has between 2 and `max_paths` complete paths.
struct RandomTask {
  LogitMatrix z;
  Wfst graph;
  Wfst unrolled;
};

inline RandomTask MakeRandomTask(RandomStream &rng, std::size_t frames,
                                 std::size_t clusters, int vocab,
                                 std::size_t max_paths) {
  while (true) {
    LogitMatrix z = RandomLogits(rng, frames, clusters, 1.5);
    int states = 2 + static_cast<int>(frames) + static_cast<int>(rng() % 3);
    Wfst graph = RandomDecoderGraph(rng, states, static_cast<int>(clusters),
                                    vocab);
    Wfst unrolled = Compose(BuildScoreFst(z), graph);
    auto count = CountPaths(unrolled, max_paths);
    if (count && *count >= 2) {
      return {std::move(z), std::move(graph), std::move(unrolled)};
    }
  }
}

// Expectation of `f` over the path distribution, by independent DFS.
template <typename Fn>
double EnumeratedExpectation(const Wfst &fst, Fn &&f) {
  std::vector<double> log_w;
  std::vector<double> values;
  for (const auto &edges : DfsPaths(fst)) {
    double lw = 0.0;
    for (EdgeId e : edges) lw += fst.GetEdge(e).log_weight;
    log_w.push_back(lw);
    values.push_back(f(edges));
  }
  double top = *std::max_element(log_w.begin(), log_w.end());
  double z = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    double w = std::exp(log_w[i] - top);
    z += w;
    acc += w * values[i];
  }
  return acc / z;
}

}  // namespace embr::testing

#endif  // EMBR_TESTS_TESTING_FIXTURES_H_
