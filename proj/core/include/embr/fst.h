// embr/fst.h
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
// Weighted FST over the probability semiring with weights stored as natural
// logs. A Wfst has a single initial state (id 0) and a single final state
// with trivial final weight and no outgoing edges. Label 0 is epsilon on both
// tapes. A Wfst is immutable once constructed.

#ifndef EMBR_FST_H_
#define EMBR_FST_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace embr {

using StateId = int32_t;
using EdgeId = int32_t;
using Label = int32_t;

inline constexpr Label kEpsilon = 0;

// Default cap on the number of paths an enumeration oracle may visit.
inline constexpr std::size_t kDefaultPathBound = 10000;

struct Edge {
  StateId src = 0;
  StateId dst = 0;
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  double log_weight = 0.0;  // log of a nonnegative weight; -inf is zero

  bool operator==(const Edge &) const = default;
};

class Wfst {
 public:
  // Throws Error(kParse) when an edge references a state outside
  // [0, num_states), a label is negative, a weight is NaN or +inf, or an edge
  // leaves the final state.
  Wfst(StateId num_states, std::vector<Edge> edges, StateId final_state);

  StateId NumStates() const { return num_states_; }
  std::size_t NumEdges() const { return edges_.size(); }
  StateId Initial() const { return 0; }
  StateId Final() const { return final_; }

  const Edge &GetEdge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> Edges() const { return edges_; }

  // Outgoing edge ids of `s` in increasing id order.
  std::span<const EdgeId> OutEdges(StateId s) const {
    return {out_edges_.data() + out_offsets_[s],
            out_edges_.data() + out_offsets_[s + 1]};
  }

 private:
  StateId num_states_;
  StateId final_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_;
  std::vector<EdgeId> out_edges_;
};

// Ordered edge ids from the initial state to the final state. log_weight is
// the left-to-right sum of the member edge log-weights.
struct Path {
  std::vector<EdgeId> edges;
  double log_weight = 0.0;

  bool operator==(const Path &) const = default;
};

// Non-epsilon output labels of a path.
using WordSequence = std::vector<Label>;

// Builds a Path from an edge-id sequence, checking incidence. Throws
// Error(kInvalidPath).
Path MakePath(const Wfst &fst, std::vector<EdgeId> edges);

void ValidatePath(const Wfst &fst, const Path &path);

double PathLogWeight(const Wfst &fst, const Path &path);

WordSequence CollapsePath(const Wfst &fst, const Path &path);

// Non-epsilon input labels of a path, in order.
std::vector<Label> InputLabels(const Wfst &fst, const Path &path);

// States in topological order (Kahn's algorithm, smallest id first among
// ready states). Throws Error(kCyclic).
std::vector<StateId> TopologicalOrder(const Wfst &fst);

bool IsAcyclic(const Wfst &fst);

// All initial-to-final paths in lexicographic order of edge-id sequences.
// Throws Error(kCyclic) or Error(kOverflow) when more than max_paths exist.
std::vector<Path> EnumeratePaths(const Wfst &fst,
                                 std::size_t max_paths = kDefaultPathBound);

// Number of initial-to-final paths, or nullopt when it exceeds `limit`.
// Throws Error(kCyclic).
std::optional<std::uint64_t> CountPaths(const Wfst &fst, std::uint64_t limit);

// P(y) summed over all paths whose collapsed output is y. Word sequences with
// zero probability are omitted. Throws Error(kDegenerate) when every path has
// zero weight.
std::map<WordSequence, double> PathDistribution(
    const Wfst &fst, std::size_t max_paths = kDefaultPathBound);

}  // namespace embr

#endif  // EMBR_FST_H_
