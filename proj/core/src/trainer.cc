// trainer.cc
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

#include "embr/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "embr/error.h"
#include "embr/fst-io.h"
#include "embr/random.h"

namespace embr {

ToyModel ToyModel::Zeros(std::size_t features, std::size_t clusters) {
  return {Matrix<double>(features, clusters, 0.0),
          std::vector<double>(clusters, 0.0)};
}

LogitMatrix ComputeLogits(const ToyModel &model,
                          const Matrix<double> &features) {
  if (features.Cols() != model.Features()) {
    throw Error(ErrorKind::kDimension,
                "features have " + std::to_string(features.Cols()) +
                    " dimensions, model expects " +
                    std::to_string(model.Features()));
  }
  Matrix<double> z(features.Rows(), model.Clusters(), 0.0);
  for (std::size_t t = 0; t < features.Rows(); ++t) {
    for (std::size_t q = 0; q < model.Clusters(); ++q) {
      double sum = model.bias[q];
      for (std::size_t f = 0; f < model.Features(); ++f) {
        sum += model.weights(f, q) * features(t, f);
      }
      z(t, q) = sum;
    }
  }
  return LogitMatrix(std::move(z));
}

ToyModel ChainRuleGradient(const Matrix<double> &features,
                           const Matrix<double> &logit_gradient) {
  if (features.Rows() != logit_gradient.Rows()) {
    throw Error(ErrorKind::kDimension, "frame count mismatch in chain rule");
  }
  ToyModel grad = ToyModel::Zeros(features.Cols(), logit_gradient.Cols());
  for (std::size_t t = 0; t < features.Rows(); ++t) {
    for (std::size_t q = 0; q < logit_gradient.Cols(); ++q) {
      double g = logit_gradient(t, q);
      if (g == 0.0) continue;
      grad.bias[q] += g;
      for (std::size_t f = 0; f < features.Cols(); ++f) {
        grad.weights(f, q) += features(t, f) * g;
      }
    }
  }
  return grad;
}

void WriteModel(const ToyModel &model, std::ostream &out) {
  out << "weights " << model.Features() << ' ' << model.Clusters() << '\n';
  for (std::size_t f = 0; f < model.Features(); ++f) {
    for (std::size_t q = 0; q < model.Clusters(); ++q) {
      if (q) out << ' ';
      out << FormatDouble(model.weights(f, q));
    }
    out << '\n';
  }
  out << "bias " << model.Clusters() << '\n';
  for (std::size_t q = 0; q < model.Clusters(); ++q) {
    if (q) out << ' ';
    out << FormatDouble(model.bias[q]);
  }
  out << '\n';
}

ToyModel ParseModel(std::istream &in, std::string_view source) {
  std::vector<std::string> tokens;
  std::string token;
  while (in >> token) tokens.push_back(token);
  std::size_t pos = 0;
  auto fail = [&](const std::string &message) {
    throw Error(ErrorKind::kParse, std::string(source) + ": " + message);
  };
  auto next_count = [&]() -> std::size_t {
    if (pos >= tokens.size()) fail("unexpected end of model");
    auto v = ParseInt(tokens[pos++]);
    if (!v || *v < 1) fail("bad dimension");
    return static_cast<std::size_t>(*v);
  };
  auto next_value = [&]() -> double {
    if (pos >= tokens.size()) fail("unexpected end of model");
    auto v = ParseDouble(tokens[pos++]);
    if (!v || !std::isfinite(*v)) fail("bad parameter value");
    return *v;
  };
  if (pos >= tokens.size() || tokens[pos++] != "weights") fail("expected 'weights'");
  std::size_t features = next_count();
  std::size_t clusters = next_count();
  ToyModel model = ToyModel::Zeros(features, clusters);
  for (double &w : model.weights.Data()) w = next_value();
  if (pos >= tokens.size() || tokens[pos++] != "bias") fail("expected 'bias'");
  if (next_count() != clusters) fail("bias length differs from weights");
  for (double &b : model.bias) b = next_value();
  if (pos != tokens.size()) fail("trailing data");
  return model;
}

double DefaultLearningRate(LossKind loss) {
  constexpr double kWordEditRate = 0.05;
  return loss == LossKind::kFrameError ? kWordEditRate / 5.0 : kWordEditRate;
}

double TrainConfig::EffectiveLearningRate() const {
  return learning_rate ? *learning_rate : DefaultLearningRate(loss);
}

TrainConfig ParseTrainConfig(std::istream &in, std::string_view source) {
  TrainConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fail = [&](const std::string &message) {
      throw Error(ErrorKind::kParse, std::string(source) + ":" +
                                         std::to_string(line_no) + ": " +
                                         message);
    };
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    if (SplitWhitespace(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    auto key_fields = SplitWhitespace(std::string_view(line).substr(0, eq));
    auto value_fields = SplitWhitespace(std::string_view(line).substr(eq + 1));
    if (key_fields.size() != 1 || value_fields.size() != 1) {
      fail("expected key=value");
    }
    std::string key(key_fields[0]);
    std::string_view value = value_fields[0];
    auto count = [&](bool allow_zero) -> std::size_t {
      auto v = ParseInt(value);
      if (!v || *v < (allow_zero ? 0 : 1)) fail("bad value for " + key);
      return static_cast<std::size_t>(*v);
    };
    if (key == "steps") {
      config.steps = count(true);
    } else if (key == "learning_rate") {
      auto v = ParseDouble(value);
      if (!v || !std::isfinite(*v) || *v < 0) fail("bad learning_rate");
      config.learning_rate = *v;
    } else if (key == "samples_per_step") {
      config.samples_per_step = count(false);
    } else if (key == "seed") {
      config.seed = count(true);
    } else if (key == "loss") {
      if (value == "word-edit") {
        config.loss = LossKind::kWordEdit;
      } else if (value == "frame-error") {
        config.loss = LossKind::kFrameError;
      } else {
        fail("loss must be word-edit or frame-error");
      }
    } else if (key == "gradient") {
      if (value == "sampled") {
        config.gradient = GradientMode::kSampled;
      } else if (value == "exact") {
        config.gradient = GradientMode::kExact;
      } else {
        fail("gradient must be sampled or exact");
      }
    } else if (key == "eval_interval") {
      config.eval_interval = count(false);
    } else if (key == "record_wall_time") {
      if (value != "true" && value != "false") fail("expected true or false");
      config.record_wall_time = value == "true";
    } else if (key == "threads") {
      config.num_threads = static_cast<int>(count(false));
    } else if (key == "vocab_size") {
      config.vocab_size = static_cast<int>(count(false));
    } else if (key == "frames") {
      config.frames = count(false);
    } else if (key == "clusters") {
      config.clusters = count(false);
    } else if (key == "features") {
      config.features = count(false);
    } else if (key == "num_utterances") {
      config.num_utterances = count(true);
    } else if (key == "task_seed") {
      config.task_seed = count(true);
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  return config;
}

TrainConfig ReadTrainConfig(const std::string &filename) {
  std::ifstream in(filename);
  if (!in) throw Error(ErrorKind::kParse, filename + ": cannot open");
  return ParseTrainConfig(in, filename);
}

LossFunction MakeLoss(const Utterance &utt, LossKind kind) {
  switch (kind) {
    case LossKind::kWordEdit:
      return LossFunction::WordEdit(utt.reference);
    case LossKind::kFrameError:
      if (!utt.alignment) {
        throw Error(ErrorKind::kUsage,
                    "frame-error loss needs a reference alignment");
      }
      return LossFunction::FrameError(*utt.alignment);
    case LossKind::kCustom:
      break;
  }
  throw Error(ErrorKind::kUsage, "unsupported loss kind for training");
}

Wfst UnrolledGraph(const ToyModel &model, const Utterance &utt) {
  return Compose(BuildScoreFst(ComputeLogits(model, utt.features)),
                 *utt.decoder_graph);
}

StepResult TrainStep(const ToyModel &model, const Utterance &utt,
                     const TrainConfig &config, std::uint64_t step_seed) {
  LogitMatrix z = ComputeLogits(model, utt.features);
  Wfst lattice = Compose(BuildScoreFst(z), *utt.decoder_graph);
  LossFunction loss = MakeLoss(utt, config.loss);

  StepResult result;
  if (config.gradient == GradientMode::kExact) {
    result.estimate.expected_loss = ExpectedLossExact(lattice, loss);
    result.estimate.loss_mean = result.estimate.expected_loss;
    result.estimate.gradient = ExpectedLossGradientExact(lattice, z, loss);
    result.estimate.seed = step_seed;
  } else {
    EstimatorOptions options;
    options.num_samples = config.samples_per_step;
    options.variance_reduction = true;
    options.seed = step_seed;
    options.num_threads = config.num_threads;
    result.estimate = EmbrEstimate(lattice, z, loss, options);
  }
  for (double g : result.estimate.gradient.Data()) {
    if (!std::isfinite(g)) {
      throw Error(ErrorKind::kNumeric, "non-finite logit gradient");
    }
  }
  result.gradient = ChainRuleGradient(utt.features, result.estimate.gradient);
  const double rate = config.EffectiveLearningRate();
  result.model = model;
  auto w = result.model.weights.Data();
  auto gw = result.gradient.weights.Data();
  for (std::size_t k = 0; k < w.size(); ++k) w[k] -= rate * gw[k];
  for (std::size_t q = 0; q < result.model.bias.size(); ++q) {
    result.model.bias[q] -= rate * result.gradient.bias[q];
  }
  return result;
}

namespace {

constexpr Label kBlank = 1;

Label WordOf(Label cluster, int vocab_size) {
  return cluster == kBlank ? kEpsilon : (cluster - 2) % vocab_size + 1;
}

}  // namespace

Wfst CollapsingDecoderGraph(std::size_t clusters, int vocab_size) {
  if (clusters < 2 || vocab_size < 1 ||
      static_cast<std::size_t>(vocab_size) > clusters - 1) {
    throw Error(ErrorKind::kUsage,
                "need clusters >= 2 and 1 <= vocab_size <= clusters - 1");
  }
  const StateId q_count = static_cast<StateId>(clusters);
  const StateId final_state = q_count + 1;
  std::vector<Edge> edges;
  // State 0 is the start; state p holds "previous cluster was p".
  for (StateId from = 0; from <= q_count; ++from) {
    for (Label q = 1; q <= q_count; ++q) {
      Label word = q == from ? kEpsilon : WordOf(q, vocab_size);
      edges.push_back({from, q, q, word, 0.0});
    }
  }
  for (StateId p = 1; p <= q_count; ++p) {
    edges.push_back({p, final_state, kEpsilon, kEpsilon, 0.0});
  }
  return Wfst(final_state + 1, std::move(edges), final_state);
}

std::vector<Utterance> MakeSyntheticTask(int vocab_size, std::size_t frames,
                                         std::size_t clusters,
                                         std::size_t features,
                                         std::size_t num_utterances,
                                         std::uint64_t seed) {
  if (frames < 1 || features < 1) {
    throw Error(ErrorKind::kUsage, "frames and features must be positive");
  }
  auto graph = std::make_shared<const Wfst>(
      CollapsingDecoderGraph(clusters, vocab_size));
  constexpr double kStickiness = 0.5;
  constexpr double kNoise = 0.7;

  const RandomStream root(seed);
  RandomStream centroid_stream = root.Split(0);
  Matrix<double> centroids(clusters, features);
  for (double &c : centroids.Data()) c = centroid_stream.Normal();

  std::vector<Utterance> dataset;
  dataset.reserve(num_utterances);
  for (std::size_t i = 0; i < num_utterances; ++i) {
    RandomStream rng = root.Split(i + 1);
    std::vector<Label> align(frames);
    WordSequence words;
    do {
      words.clear();
      Label prev = kEpsilon;
      for (std::size_t t = 0; t < frames; ++t) {
        Label q = prev;
        if (t == 0 || rng.Uniform() >= kStickiness) {
          q = static_cast<Label>(1 + rng() % clusters);
        }
        align[t] = q;
        if (q != prev && q != kBlank) words.push_back(WordOf(q, vocab_size));
        prev = q;
      }
    } while (words.empty());
    Matrix<double> x(frames, features);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t f = 0; f < features; ++f) {
        x(t, f) = centroids(align[t] - 1, f) + kNoise * rng.Normal();
      }
    }
    dataset.push_back({std::move(x), graph, ReferenceTranscript(words),
                       ReferenceAlignment(align)});
  }
  return dataset;
}

bool IsDevUtterance(std::size_t index) { return index % 10 == 9; }

ExperimentResult RunExperiment(const std::vector<Utterance> &dataset,
                               const TrainConfig &config) {
  std::vector<const Utterance *> train;
  std::vector<const Utterance *> dev;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (IsDevUtterance(i) ? dev : train).push_back(&dataset[i]);
  }
  if (dev.empty() || (train.empty() && config.steps > 0)) {
    throw Error(ErrorKind::kUsage,
                "dataset too small for a train/dev split (" +
                    std::to_string(dataset.size()) + " utterances)");
  }
  if (dataset.front().features.Cols() == 0) {
    throw Error(ErrorKind::kUsage, "utterances have no features");
  }

  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  Label clusters = 0;
  for (const Edge &e : dataset.front().decoder_graph->Edges()) {
    clusters = std::max(clusters, e.ilabel);
  }
  result.model = ToyModel::Zeros(dataset.front().features.Cols(),
                                 static_cast<std::size_t>(clusters));
  std::size_t best_index = 0;
  const RandomStream root(config.seed);

  auto evaluate = [&](std::size_t step) {
    CurveRecord record;
    record.step = step;
    RandomStream eval_seeds = root.Split(2 * step + 1);
    double exact = 0.0;
    double sampled = 0.0;
    for (const Utterance *utt : dev) {
      LogitMatrix z = ComputeLogits(result.model, utt->features);
      Wfst lattice = Compose(BuildScoreFst(z), *utt->decoder_graph);
      LossFunction loss = MakeLoss(*utt, config.loss);
      exact += ExpectedLossExact(lattice, loss);
      EstimatorOptions options;
      options.num_samples = config.samples_per_step;
      options.seed = eval_seeds();
      options.num_threads = config.num_threads;
      sampled += EmbrEstimate(lattice, z, loss, options).expected_loss;
    }
    record.exact_expected_loss = exact / static_cast<double>(dev.size());
    record.sampled_expected_loss = sampled / static_cast<double>(dev.size());
    if (config.record_wall_time) {
      record.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    }
    if (result.curve.empty() ||
        record.exact_expected_loss <
            result.curve[best_index].exact_expected_loss) {
      best_index = result.curve.size();
    }
    result.curve.push_back(record);
  };

  evaluate(0);
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const Utterance &utt = *train[(step - 1) % train.size()];
    std::uint64_t step_seed = root.Split(2 * step)();
    result.model = TrainStep(result.model, utt, config, step_seed).model;
    if (step % config.eval_interval == 0 || step == config.steps) {
      evaluate(step);
    }
  }
  result.best_step = result.curve[best_index].step;
  return result;
}

void WriteCurveCsv(const std::vector<CurveRecord> &curve, std::ostream &out) {
  out << "step,exact_expected_loss,sampled_expected_loss,wall_ms\n";
  for (const CurveRecord &r : curve) {
    out << r.step << ',' << FormatDouble(r.exact_expected_loss) << ','
        << FormatDouble(r.sampled_expected_loss) << ',' << r.wall_ms << '\n';
  }
}

}  // namespace embr
