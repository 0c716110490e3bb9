// embr/mbr.h
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
// Expected loss and its gradient with respect to the acoustic logits z.
//
// With P(path) the globally normalized path distribution and gamma(path) the
// T x Q indicator of the clusters a path visits, the gradient of E[L] is the
// covariance E[L gamma] - E[L] E[gamma]. The exact routines enumerate paths
// (or run the expectation semiring for edge-additive losses); EmbrEstimate
// approximates both quantities from I sampled paths:
//
//   value:    mean_i L_i
//   gradient: I / (I - 1) * mean_i (L_i - mean L) gamma_i      (baseline)
//             mean_i L_i (gamma_i - E[gamma])                  (no baseline)
//
// The baseline form is unchanged by adding a constant to the loss.

#ifndef EMBR_MBR_H_
#define EMBR_MBR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "embr/compose.h"
#include "embr/fst.h"
#include "embr/losses.h"
#include "embr/matrix.h"

namespace embr {

enum class LossKind { kWordEdit, kFrameError, kCustom };

// L(path) against a reference. Word-edit compares the collapsed output with
// a reference transcript; frame-error compares the per-frame input labels
// with a reference alignment.
class LossFunction {
 public:
  using CustomFn = std::function<double(const Wfst &, const Path &)>;

  static LossFunction WordEdit(ReferenceTranscript ref);
  static LossFunction FrameError(ReferenceAlignment ref);
  static LossFunction Custom(CustomFn fn);

  // The same loss plus a constant.
  LossFunction WithOffset(double offset) const;

  LossKind Kind() const { return kind_; }
  double Offset() const { return offset_; }

  double operator()(const Wfst &fst, const Path &path) const {
    return Unshifted(fst, path) + offset_;
  }
  // The loss without the offset.
  double Unshifted(const Wfst &fst, const Path &path) const;

 private:
  LossFunction(LossKind kind,
               std::variant<ReferenceTranscript, ReferenceAlignment, CustomFn>
                   payload)
      : kind_(kind), payload_(std::move(payload)) {}

  LossKind kind_;
  std::variant<ReferenceTranscript, ReferenceAlignment, CustomFn> payload_;
  double offset_ = 0.0;
};

// "word-edit" / "frame-error".
std::string_view LossKindName(LossKind kind);

struct MbrEstimate {
  double expected_loss = 0.0;
  Matrix<double> gradient;  // dE[L]/dz, T x Q
  std::size_t num_samples = 0;
  // First kMaxRecordedLosses sample losses, in sample order.
  std::vector<double> per_sample_losses;
  double loss_mean = 0.0;
  // Unbiased sample variance of the losses; 0 for a single sample.
  double loss_variance = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMaxRecordedLosses = 1000000;

struct EstimatorOptions {
  std::size_t num_samples = 100;
  bool variance_reduction = true;
  std::uint64_t seed = 0;
  // Samples are split across threads; results do not depend on this.
  int num_threads = 1;
};

// Sum over enumerated paths of P(path) L(path). Throws Error(kOverflow),
// Error(kCyclic) or Error(kDegenerate).
double ExpectedLossExact(const Wfst &fst, const LossFunction &loss,
                         std::size_t max_paths = kDefaultPathBound);

// Exact covariance gradient over enumerated paths. `fst` must be an unrolled
// decoder graph for `z`.
Matrix<double> ExpectedLossGradientExact(
    const Wfst &fst, const LogitMatrix &z, const LossFunction &loss,
    std::size_t max_paths = kDefaultPathBound);

struct SemiringExpectation {
  double log_z = 0.0;
  double expected_loss = 0.0;
};

// One backward pass of the first-order expectation semiring for a loss that
// is a sum of per-edge losses. `edge_losses` is indexed by edge id.
SemiringExpectation ExpectedAdditiveLossSemiring(
    const Wfst &fst, const std::vector<double> &edge_losses);

// E[gamma]: posterior occupancy of each (frame, cluster) pair, by
// forward-backward. Throws Error(kUnsupported) for FSTs that are not frame
// synchronous.
Matrix<double> ExpectedOccupancies(const Wfst &fst, std::size_t frames,
                                   std::size_t clusters);

// Monte Carlo estimate from options.num_samples paths; path i is drawn from
// RandomStream(options.seed).Split(i). With variance reduction and a single
// sample the gradient is the zero matrix. Throws Error(kUsage) for zero
// samples, Error(kDegenerate) for a lattice without weight and
// Error(kDimension) when paths do not match z.
MbrEstimate EmbrEstimate(const Wfst &fst, const LogitMatrix &z,
                         const LossFunction &loss,
                         const EstimatorOptions &options);

// True iff the gradient with loss + shift is bit-identical to the gradient
// with the unshifted loss under the same options.
bool LossShiftCheck(const Wfst &fst, const LogitMatrix &z,
                    const LossFunction &loss, const EstimatorOptions &options,
                    double shift);

}  // namespace embr

#endif  // EMBR_MBR_H_
