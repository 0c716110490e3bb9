// compose.cc
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

#include "embr/compose.h"

#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>

#include "embr/error.h"
#include "embr/fst-io.h"

namespace embr {

LogitMatrix::LogitMatrix(Matrix<double> values) : values_(std::move(values)) {
  if (values_.Rows() == 0 || values_.Cols() == 0) {
    throw Error(ErrorKind::kDimension, "logit matrix must be at least 1x1");
  }
  for (double v : values_.Data()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kNumeric, "logit matrix has a non-finite entry");
    }
  }
}

LogitMatrix::LogitMatrix(std::size_t frames, std::size_t clusters,
                         double fill)
    : LogitMatrix(Matrix<double>(frames, clusters, fill)) {}

LogitMatrix LogitMatrix::WithEntry(std::size_t t, std::size_t c,
                                   double value) const {
  Matrix<double> copy = values_;
  copy(t, c) = value;
  return LogitMatrix(std::move(copy));
}

Wfst BuildScoreFst(const LogitMatrix &z) {
  std::vector<Edge> edges;
  edges.reserve(z.Frames() * z.Clusters());
  for (std::size_t t = 0; t < z.Frames(); ++t) {
    for (std::size_t c = 0; c < z.Clusters(); ++c) {
      Label q = static_cast<Label>(c + 1);
      edges.push_back({static_cast<StateId>(t), static_cast<StateId>(t + 1), q,
                       q, z(t, c)});
    }
  }
  StateId final_state = static_cast<StateId>(z.Frames());
  return Wfst(final_state + 1, std::move(edges), final_state);
}

Wfst Compose(const Wfst &a, const Wfst &b) {
  bool a_output_eps = false;
  for (const Edge &e : a.Edges()) a_output_eps |= e.olabel == kEpsilon;
  bool b_input_eps = false;
  for (const Edge &e : b.Edges()) b_input_eps |= e.ilabel == kEpsilon;
  if (a_output_eps && b_input_eps) {
    throw Error(ErrorKind::kUnsupported,
                "composition with epsilons on both sides of the matched tape");
  }

  using Pair = std::pair<StateId, StateId>;
  std::map<Pair, StateId> ids;
  std::vector<Pair> states;
  std::deque<StateId> queue;
  auto find_or_add = [&](Pair p) {
    auto [it, inserted] = ids.emplace(p, static_cast<StateId>(states.size()));
    if (inserted) {
      states.push_back(p);
      queue.push_back(it->second);
    }
    return it->second;
  };

  std::vector<Edge> edges;
  find_or_add({a.Initial(), b.Initial()});
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    auto [sa, sb] = states[s];
    for (EdgeId ia : a.OutEdges(sa)) {
      const Edge &ea = a.GetEdge(ia);
      if (ea.olabel == kEpsilon) {
        StateId d = find_or_add({ea.dst, sb});
        edges.push_back({s, d, ea.ilabel, kEpsilon, ea.log_weight});
        continue;
      }
      for (EdgeId ib : b.OutEdges(sb)) {
        const Edge &eb = b.GetEdge(ib);
        if (eb.ilabel != ea.olabel) continue;
        StateId d = find_or_add({ea.dst, eb.dst});
        edges.push_back(
            {s, d, ea.ilabel, eb.olabel, ea.log_weight + eb.log_weight});
      }
    }
    for (EdgeId ib : b.OutEdges(sb)) {
      const Edge &eb = b.GetEdge(ib);
      if (eb.ilabel != kEpsilon) continue;
      StateId d = find_or_add({sa, eb.dst});
      edges.push_back({s, d, kEpsilon, eb.olabel, eb.log_weight});
    }
  }

  auto final_it = ids.find({a.Final(), b.Final()});
  if (final_it == ids.end()) return Wfst(2, {}, 1);
  StateId final_state = final_it->second;
  if (final_state == 0) return Wfst(1, {}, 0);

  // Trim to co-accessible states (everything discovered is accessible).
  std::vector<std::vector<StateId>> preds(states.size());
  for (const Edge &e : edges) preds[e.dst].push_back(e.src);
  std::vector<bool> coaccessible(states.size(), false);
  std::vector<StateId> stack = {final_state};
  coaccessible[final_state] = true;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (StateId p : preds[s]) {
      if (!coaccessible[p]) {
        coaccessible[p] = true;
        stack.push_back(p);
      }
    }
  }
  if (!coaccessible[0]) return Wfst(2, {}, 1);
  std::vector<StateId> remap(states.size(), -1);
  StateId next = 0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (coaccessible[s]) remap[s] = next++;
  }
  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (const Edge &e : edges) {
    if (coaccessible[e.src] && coaccessible[e.dst]) {
      kept.push_back({remap[e.src], remap[e.dst], e.ilabel, e.olabel,
                      e.log_weight});
    }
  }
  return Wfst(next, std::move(kept), remap[final_state]);
}

Wfst IdentityTransducer(int num_clusters) {
  std::vector<Edge> edges;
  for (Label q = 1; q <= num_clusters; ++q) edges.push_back({0, 0, q, q, 0.0});
  edges.push_back({0, 1, kEpsilon, kEpsilon, 0.0});
  return Wfst(2, std::move(edges), 1);
}

GammaMatrix GetGammas(const Wfst &fst, const Path &path, std::size_t frames,
                      std::size_t clusters) {
  std::vector<Label> labels = InputLabels(fst, path);
  if (labels.size() != frames) {
    throw Error(ErrorKind::kDimension,
                "path has " + std::to_string(labels.size()) +
                    " non-epsilon input labels, expected " +
                    std::to_string(frames) + " frames");
  }
  GammaMatrix gammas(frames, clusters, 0);
  for (std::size_t t = 0; t < frames; ++t) {
    if (labels[t] < 1 || static_cast<std::size_t>(labels[t]) > clusters) {
      throw Error(ErrorKind::kDimension,
                  "input label " + std::to_string(labels[t]) +
                      " outside clusters 1.." + std::to_string(clusters));
    }
    ++gammas(t, labels[t] - 1);
  }
  return gammas;
}

std::vector<int> FrameDepths(const Wfst &fst) {
  std::vector<int> depth(fst.NumStates(), -1);
  depth[fst.Initial()] = 0;
  for (StateId s : TopologicalOrder(fst)) {
    if (depth[s] < 0) continue;
    for (EdgeId id : fst.OutEdges(s)) {
      const Edge &e = fst.GetEdge(id);
      int d = depth[s] + (e.ilabel == kEpsilon ? 0 : 1);
      if (depth[e.dst] >= 0 && depth[e.dst] != d) {
        throw Error(ErrorKind::kUnsupported,
                    "state " + std::to_string(e.dst) +
                        " is reachable at frame depths " +
                        std::to_string(depth[e.dst]) + " and " +
                        std::to_string(d));
      }
      depth[e.dst] = d;
    }
  }
  return depth;
}

LogitMatrix ParseLogitsCsv(std::istream &in, std::string_view source) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string &message) {
    throw Error(ErrorKind::kParse, std::string(source) + ":" +
                                       std::to_string(line_no) + ": " +
                                       message);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (SplitWhitespace(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest = line;
    while (true) {
      std::size_t comma = rest.find(',');
      std::string_view cell = rest.substr(0, comma);
      std::vector<std::string_view> parts = SplitWhitespace(cell);
      if (parts.size() != 1) fail("empty or malformed cell");
      auto v = ParseDouble(parts[0]);
      if (!v) fail("bad number '" + std::string(parts[0]) + "'");
      if (!std::isfinite(*v)) fail("non-finite logit");
      values.push_back(*v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      fail("row has " + std::to_string(count) + " columns, expected " +
           std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) fail("no rows");
  Matrix<double> m(rows, cols);
  std::copy(values.begin(), values.end(), m.Data().begin());
  return LogitMatrix(std::move(m));
}

LogitMatrix ReadLogitsCsv(const std::string &filename) {
  std::ifstream in(filename);
  if (!in) throw Error(ErrorKind::kParse, filename + ": cannot open");
  return ParseLogitsCsv(in, filename);
}

void WriteLogitsCsv(const LogitMatrix &z, std::ostream &out) {
  for (std::size_t t = 0; t < z.Frames(); ++t) {
    for (std::size_t c = 0; c < z.Clusters(); ++c) {
      if (c) out << ',';
      out << FormatDouble(z(t, c));
    }
    out << '\n';
  }
}

}  // namespace embr
