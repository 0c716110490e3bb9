// losses.cc
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

#include "embr/losses.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <string>
#include <utility>

#include "embr/error.h"

namespace embr {

ReferenceTranscript::ReferenceTranscript(WordSequence words)
    : words_(std::move(words)) {
  for (Label w : words_) {
    if (w <= kEpsilon) {
      throw Error(ErrorKind::kParse,
                  "reference transcript contains label " + std::to_string(w));
    }
  }
}

ReferenceAlignment::ReferenceAlignment(std::vector<Label> clusters)
    : clusters_(std::move(clusters)) {
  for (Label q : clusters_) {
    if (q < 1) {
      throw Error(ErrorKind::kParse,
                  "reference alignment contains cluster " + std::to_string(q));
    }
  }
}

int EditDistance(std::span<const Label> hyp, std::span<const Label> ref) {
  // Distance is symmetric; keep the shorter sequence along the rows.
  std::span<const Label> outer = hyp.size() >= ref.size() ? hyp : ref;
  std::span<const Label> inner = hyp.size() >= ref.size() ? ref : hyp;
  std::vector<int> prev(inner.size() + 1);
  std::vector<int> cur(inner.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= outer.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= inner.size(); ++j) {
      int substitute = prev[j - 1] + (outer[i - 1] == inner[j - 1] ? 0 : 1);
      cur[j] = std::min({substitute, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[inner.size()];
}

int FrameError(std::span<const Label> frame_labels,
               const ReferenceAlignment &ref) {
  if (frame_labels.size() != ref.Frames()) {
    throw Error(ErrorKind::kDimension,
                "hypothesis has " + std::to_string(frame_labels.size()) +
                    " frames, reference alignment has " +
                    std::to_string(ref.Frames()));
  }
  int errors = 0;
  for (std::size_t t = 0; t < frame_labels.size(); ++t) {
    if (frame_labels[t] != ref.Clusters()[t]) ++errors;
  }
  return errors;
}

int FrameError(const GammaMatrix &gammas, const ReferenceAlignment &ref) {
  std::vector<Label> labels(gammas.Rows());
  for (std::size_t t = 0; t < gammas.Rows(); ++t) {
    int occupied = 0;
    for (std::size_t c = 0; c < gammas.Cols(); ++c) {
      if (gammas(t, c) != 0) {
        occupied += gammas(t, c);
        labels[t] = static_cast<Label>(c + 1);
      }
    }
    if (occupied != 1) {
      throw Error(ErrorKind::kDimension,
                  "gamma row " + std::to_string(t) + " does not sum to one");
    }
  }
  return FrameError(labels, ref);
}

std::vector<double> EdgeLossAnnotation(const Wfst &fst,
                                       const ReferenceAlignment &ref) {
  std::vector<int> depth = FrameDepths(fst);
  std::vector<double> losses(fst.NumEdges(), 0.0);
  for (std::size_t i = 0; i < fst.NumEdges(); ++i) {
    const Edge &e = fst.GetEdge(static_cast<EdgeId>(i));
    if (e.ilabel == kEpsilon || depth[e.src] < 0) continue;
    std::size_t t = static_cast<std::size_t>(depth[e.src]);
    if (t >= ref.Frames()) {
      throw Error(ErrorKind::kDimension,
                  "edge " + std::to_string(i) + " lies at frame " +
                      std::to_string(t) + " beyond the reference length " +
                      std::to_string(ref.Frames()));
    }
    losses[i] = e.ilabel == ref.Clusters()[t] ? 0.0 : 1.0;
  }
  return losses;
}

namespace {

template <typename Convert>
std::vector<Label> ParseLabelStream(std::istream &in, std::string_view source,
                                    Convert &&convert) {
  std::vector<Label> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (std::string_view token : SplitWhitespace(line)) {
      auto label = convert(token);
      if (!label) {
        throw Error(ErrorKind::kParse,
                    std::string(source) + ":" + std::to_string(line_no) +
                        ": bad token '" + std::string(token) + "'");
      }
      labels.push_back(*label);
    }
  }
  return labels;
}

std::optional<Label> PositiveLabel(std::string_view token) {
  auto v = ParseInt(token);
  if (!v || *v < 1 || *v > INT32_MAX) return std::nullopt;
  return static_cast<Label>(*v);
}

std::ifstream OpenOrThrow(const std::string &filename) {
  std::ifstream in(filename);
  if (!in) throw Error(ErrorKind::kParse, filename + ": cannot open");
  return in;
}

}  // namespace

ReferenceTranscript ParseReferenceTranscript(std::istream &in,
                                             std::string_view source,
                                             const SymbolTable *symbols) {
  return ReferenceTranscript(
      ParseLabelStream(in, source, [&](std::string_view token) {
        return symbols ? symbols->Find(token) : PositiveLabel(token);
      }));
}

ReferenceTranscript ReadReferenceTranscript(const std::string &filename,
                                            const SymbolTable *symbols) {
  std::ifstream in = OpenOrThrow(filename);
  return ParseReferenceTranscript(in, filename, symbols);
}

ReferenceAlignment ParseReferenceAlignment(std::istream &in,
                                           std::string_view source) {
  return ReferenceAlignment(ParseLabelStream(in, source, PositiveLabel));
}

ReferenceAlignment ReadReferenceAlignment(const std::string &filename) {
  std::ifstream in = OpenOrThrow(filename);
  return ParseReferenceAlignment(in, filename);
}

}  // namespace embr
