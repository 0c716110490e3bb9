// fst.cc
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

#include "embr/fst.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <utility>

#include "embr/error.h"
#include "embr/log-math.h"

namespace embr {

Wfst::Wfst(StateId num_states, std::vector<Edge> edges, StateId final_state)
    : num_states_(num_states), final_(final_state), edges_(std::move(edges)) {
  if (num_states_ < 1) {
    throw Error(ErrorKind::kParse, "FST must have at least one state");
  }
  if (final_ < 0 || final_ >= num_states_) {
    throw Error(ErrorKind::kParse,
                "final state " + std::to_string(final_) + " out of range");
  }
  out_offsets_.assign(num_states_ + 1, 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge &e = edges_[i];
    if (e.src < 0 || e.src >= num_states_ || e.dst < 0 ||
        e.dst >= num_states_) {
      throw Error(ErrorKind::kParse, "edge " + std::to_string(i) +
                                         " references an unknown state");
    }
    if (e.ilabel < 0 || e.olabel < 0) {
      throw Error(ErrorKind::kParse,
                  "edge " + std::to_string(i) + " has a negative label");
    }
    if (std::isnan(e.log_weight) || e.log_weight == -kLogZero) {
      throw Error(ErrorKind::kParse, "edge " + std::to_string(i) +
                                         " has a NaN or +inf log-weight");
    }
    if (e.src == final_) {
      throw Error(ErrorKind::kParse,
                  "edge " + std::to_string(i) + " leaves the final state");
    }
    ++out_offsets_[e.src + 1];
  }
  for (StateId s = 0; s < num_states_; ++s) {
    out_offsets_[s + 1] += out_offsets_[s];
  }
  out_edges_.resize(edges_.size());
  std::vector<std::size_t> fill(out_offsets_.begin(), out_offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    out_edges_[fill[edges_[i].src]++] = static_cast<EdgeId>(i);
  }
}

void ValidatePath(const Wfst &fst, const Path &path) {
  StateId at = fst.Initial();
  for (std::size_t k = 0; k < path.edges.size(); ++k) {
    EdgeId id = path.edges[k];
    if (id < 0 || static_cast<std::size_t>(id) >= fst.NumEdges()) {
      throw Error(ErrorKind::kInvalidPath,
                  "edge id " + std::to_string(id) + " out of range");
    }
    const Edge &e = fst.GetEdge(id);
    if (e.src != at) {
      throw Error(ErrorKind::kInvalidPath,
                  "edge " + std::to_string(id) + " at position " +
                      std::to_string(k) + " is not incident to state " +
                      std::to_string(at));
    }
    at = e.dst;
  }
  if (at != fst.Final()) {
    throw Error(ErrorKind::kInvalidPath, "path does not end at final state");
  }
}

Path MakePath(const Wfst &fst, std::vector<EdgeId> edges) {
  Path path{std::move(edges), 0.0};
  ValidatePath(fst, path);
  for (EdgeId e : path.edges) path.log_weight += fst.GetEdge(e).log_weight;
  return path;
}

double PathLogWeight(const Wfst &fst, const Path &path) {
  ValidatePath(fst, path);
  double sum = 0.0;
  for (EdgeId e : path.edges) sum += fst.GetEdge(e).log_weight;
  return sum;
}

WordSequence CollapsePath(const Wfst &fst, const Path &path) {
  ValidatePath(fst, path);
  WordSequence words;
  for (EdgeId e : path.edges) {
    Label olabel = fst.GetEdge(e).olabel;
    if (olabel != kEpsilon) words.push_back(olabel);
  }
  return words;
}

std::vector<Label> InputLabels(const Wfst &fst, const Path &path) {
  ValidatePath(fst, path);
  std::vector<Label> labels;
  for (EdgeId e : path.edges) {
    Label ilabel = fst.GetEdge(e).ilabel;
    if (ilabel != kEpsilon) labels.push_back(ilabel);
  }
  return labels;
}

std::vector<StateId> TopologicalOrder(const Wfst &fst) {
  std::vector<int> in_degree(fst.NumStates(), 0);
  for (const Edge &e : fst.Edges()) ++in_degree[e.dst];
  std::priority_queue<StateId, std::vector<StateId>, std::greater<>> ready;
  for (StateId s = 0; s < fst.NumStates(); ++s) {
    if (in_degree[s] == 0) ready.push(s);
  }
  std::vector<StateId> order;
  order.reserve(fst.NumStates());
  while (!ready.empty()) {
    StateId s = ready.top();
    ready.pop();
    order.push_back(s);
    for (EdgeId e : fst.OutEdges(s)) {
      if (--in_degree[fst.GetEdge(e).dst] == 0) ready.push(fst.GetEdge(e).dst);
    }
  }
  if (order.size() != static_cast<std::size_t>(fst.NumStates())) {
    throw Error(ErrorKind::kCyclic, "FST contains a cycle");
  }
  return order;
}

bool IsAcyclic(const Wfst &fst) {
  try {
    TopologicalOrder(fst);
    return true;
  } catch (const Error &) {
    return false;
  }
}

std::vector<Path> EnumeratePaths(const Wfst &fst, std::size_t max_paths) {
  TopologicalOrder(fst);  // rejects cycles
  std::vector<Path> paths;
  std::vector<EdgeId> prefix;
  // Depth-first over out-edges in id order yields lexicographic order.
  std::function<void(StateId)> visit = [&](StateId s) {
    if (s == fst.Final()) {
      if (paths.size() == max_paths) {
        throw Error(ErrorKind::kOverflow,
                    "more than " + std::to_string(max_paths) + " paths");
      }
      paths.push_back(MakePath(fst, prefix));
      return;
    }
    for (EdgeId e : fst.OutEdges(s)) {
      prefix.push_back(e);
      visit(fst.GetEdge(e).dst);
      prefix.pop_back();
    }
  };
  visit(fst.Initial());
  return paths;
}

std::optional<std::uint64_t> CountPaths(const Wfst &fst, std::uint64_t limit) {
  std::vector<StateId> order = TopologicalOrder(fst);
  // counts[s] = number of paths from s to final, saturated at limit + 1.
  std::vector<std::uint64_t> counts(fst.NumStates(), 0);
  counts[fst.Final()] = 1;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (*it == fst.Final()) continue;
    std::uint64_t n = 0;
    for (EdgeId e : fst.OutEdges(*it)) {
      n = std::min(limit + 1, n + counts[fst.GetEdge(e).dst]);
    }
    counts[*it] = n;
  }
  if (counts[fst.Initial()] > limit) return std::nullopt;
  return counts[fst.Initial()];
}

std::map<WordSequence, double> PathDistribution(const Wfst &fst,
                                                std::size_t max_paths) {
  std::vector<Path> paths = EnumeratePaths(fst, max_paths);
  std::vector<double> log_weights;
  log_weights.reserve(paths.size());
  for (const Path &p : paths) log_weights.push_back(p.log_weight);
  double log_z = LogSumExp(log_weights);
  if (log_z == kLogZero) {
    throw Error(ErrorKind::kDegenerate, "all paths have zero weight");
  }
  std::map<WordSequence, double> dist;
  for (const Path &p : paths) {
    if (p.log_weight == kLogZero) continue;
    dist[CollapsePath(fst, p)] += std::exp(p.log_weight - log_z);
  }
  return dist;
}

}  // namespace embr
