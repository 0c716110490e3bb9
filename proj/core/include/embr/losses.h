// embr/losses.h
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
// Hypothesis losses: word-level Levenshtein distance, frame-level cluster
// error count, and the per-edge decomposition of the frame error used by the
// expectation-semiring computation.

#ifndef EMBR_LOSSES_H_
#define EMBR_LOSSES_H_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embr/compose.h"
#include "embr/fst-io.h"
#include "embr/fst.h"

namespace embr {

// Reference word sequence; never contains epsilon.
class ReferenceTranscript {
 public:
  // Throws Error(kParse) if a token is epsilon or negative.
  explicit ReferenceTranscript(WordSequence words);

  const WordSequence &Words() const { return words_; }

 private:
  WordSequence words_;
};

// Reference cluster label (1..Q) for every frame.
class ReferenceAlignment {
 public:
  // Throws Error(kParse) if a label is below 1.
  explicit ReferenceAlignment(std::vector<Label> clusters);

  const std::vector<Label> &Clusters() const { return clusters_; }
  std::size_t Frames() const { return clusters_.size(); }

 private:
  std::vector<Label> clusters_;
};

// Unit-cost Levenshtein distance between label sequences.
int EditDistance(std::span<const Label> hyp, std::span<const Label> ref);

// Number of frames whose occupied cluster differs from the reference.
// Throws Error(kDimension) when the row count differs from the reference
// length or a row does not hold exactly one occupied cluster.
int FrameError(const GammaMatrix &gammas, const ReferenceAlignment &ref);

// Same count from per-frame cluster labels.
int FrameError(std::span<const Label> frame_labels,
               const ReferenceAlignment &ref);

// Loss per edge id: 1 for an edge at frame t whose input label differs from
// the reference cluster at t, 0 otherwise (including epsilon-input edges and
// edges unreachable from the initial state). Summed along a path this gives
// the path's frame error. Throws Error(kUnsupported) for FSTs that are not
// frame synchronous and Error(kDimension) for an edge beyond the last
// reference frame.
std::vector<double> EdgeLossAnnotation(const Wfst &fst,
                                       const ReferenceAlignment &ref);

// Whitespace-separated label ids, or tokens resolved through `symbols` when
// given. Throws Error(kParse) naming the line.
ReferenceTranscript ParseReferenceTranscript(std::istream &in,
                                             std::string_view source,
                                             const SymbolTable *symbols = nullptr);
ReferenceTranscript ReadReferenceTranscript(const std::string &filename,
                                            const SymbolTable *symbols = nullptr);

// Whitespace-separated cluster labels, one per frame.
ReferenceAlignment ParseReferenceAlignment(std::istream &in,
                                           std::string_view source);
ReferenceAlignment ReadReferenceAlignment(const std::string &filename);

}  // namespace embr

#endif  // EMBR_LOSSES_H_
