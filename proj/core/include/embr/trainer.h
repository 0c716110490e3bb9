// embr/trainer.h
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
// Desk-scale sequence training. A linear acoustic model maps feature frames
// to logits, the logits are unrolled against a decoder graph, and plain SGD
// follows the sampled (or exact) expected-loss gradient chained back through
// the linear map.

#ifndef EMBR_TRAINER_H_
#define EMBR_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embr/compose.h"
#include "embr/fst.h"
#include "embr/losses.h"
#include "embr/matrix.h"
#include "embr/mbr.h"

namespace embr {

// z_t = weights^T x_t + bias.
struct ToyModel {
  Matrix<double> weights;  // F x Q
  std::vector<double> bias;  // Q

  static ToyModel Zeros(std::size_t features, std::size_t clusters);

  std::size_t Features() const { return weights.Rows(); }
  std::size_t Clusters() const { return weights.Cols(); }

  bool operator==(const ToyModel &) const = default;
};

// Throws Error(kDimension) when the feature width differs from the model.
LogitMatrix ComputeLogits(const ToyModel &model,
                          const Matrix<double> &features);

// dL/dW = X^T dL/dz and dL/db = column sums of dL/dz.
ToyModel ChainRuleGradient(const Matrix<double> &features,
                           const Matrix<double> &logit_gradient);

void WriteModel(const ToyModel &model, std::ostream &out);
ToyModel ParseModel(std::istream &in, std::string_view source = "<input>");

struct Utterance {
  Matrix<double> features;  // T x F
  std::shared_ptr<const Wfst> decoder_graph;
  ReferenceTranscript reference;
  std::optional<ReferenceAlignment> alignment;
};

enum class GradientMode { kSampled, kExact };

struct TrainConfig {
  std::size_t steps = 200;
  // Defaults to DefaultLearningRate(loss) when unset.
  std::optional<double> learning_rate;
  std::size_t samples_per_step = 100;
  std::uint64_t seed = 1;
  LossKind loss = LossKind::kWordEdit;
  GradientMode gradient = GradientMode::kSampled;
  std::size_t eval_interval = 20;
  // When false the wall_ms curve column is written as 0 so that curves are
  // reproducible byte for byte.
  bool record_wall_time = false;
  int num_threads = 1;

  // Synthetic task shape.
  int vocab_size = 3;
  std::size_t frames = 6;
  std::size_t clusters = 4;
  std::size_t features = 8;
  std::size_t num_utterances = 200;
  std::uint64_t task_seed = 1;

  double EffectiveLearningRate() const;
};

// The frame-error arm runs at one fifth of the word-edit learning rate.
double DefaultLearningRate(LossKind loss);

// Flat "key = value" lines; '#' starts a comment. Throws Error(kParse) for
// unknown keys or bad values.
TrainConfig ParseTrainConfig(std::istream &in,
                             std::string_view source = "<input>");
TrainConfig ReadTrainConfig(const std::string &filename);

// Loss of the configured kind against the utterance's references. Throws
// Error(kUsage) when a frame-error loss is requested without an alignment.
LossFunction MakeLoss(const Utterance &utt, LossKind kind);

// S(z) o decoder graph for the utterance under `model`.
Wfst UnrolledGraph(const ToyModel &model, const Utterance &utt);

struct StepResult {
  ToyModel model;
  MbrEstimate estimate;
  ToyModel gradient;  // dE[L]/d(weights, bias)
};

// One SGD step on one utterance. In exact mode the estimate holds the
// enumerated expected loss and gradient. Throws Error(kNumeric) on a
// non-finite gradient, leaving the caller's model untouched.
StepResult TrainStep(const ToyModel &model, const Utterance &utt,
                     const TrainConfig &config, std::uint64_t step_seed);

// Cluster label 1 is a blank; cluster q >= 2 emits word (q - 2) % V + 1
// when entered from a different cluster. The graph has a start state, one
// state per previous cluster and a final state reached by an epsilon edge;
// it is cyclic and accepts every cluster sequence of length >= 1.
Wfst CollapsingDecoderGraph(std::size_t clusters, int vocab_size);

// Deterministic dataset: per-frame reference clusters follow a sticky random
// walk, the transcript is its collapse through CollapsingDecoderGraph, and
// features are Gaussian noise around per-cluster centroids. Throws
// Error(kUsage) for non-positive sizes or vocab_size > clusters - 1.
std::vector<Utterance> MakeSyntheticTask(int vocab_size, std::size_t frames,
                                         std::size_t clusters,
                                         std::size_t features,
                                         std::size_t num_utterances,
                                         std::uint64_t seed);

struct CurveRecord {
  std::size_t step = 0;
  double exact_expected_loss = 0.0;    // dev mean, by enumeration
  double sampled_expected_loss = 0.0;  // dev mean, Monte Carlo
  std::int64_t wall_ms = 0;
};

struct ExperimentResult {
  std::vector<CurveRecord> curve;
  ToyModel model;  // after the last step
  std::size_t best_step = 0;  // lowest exact dev loss among curve records
};

// Utterance i is held out for evaluation when i % 10 == 9.
bool IsDevUtterance(std::size_t index);

// Trains from a zero model, cycling through the training utterances, and
// evaluates on the dev utterances at step 0, every eval_interval steps and
// at the last step.
ExperimentResult RunExperiment(const std::vector<Utterance> &dataset,
                               const TrainConfig &config);

void WriteCurveCsv(const std::vector<CurveRecord> &curve, std::ostream &out);

}  // namespace embr

#endif  // EMBR_TRAINER_H_
