// commands.cc
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

#include "commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "embr/compose.h"
#include "embr/fst-io.h"
#include "embr/fst.h"
#include "embr/inference.h"
#include "embr/losses.h"
#include "embr/mbr.h"
#include "embr/random.h"
#include "embr/trainer.h"
#include "json.hpp"

namespace embr::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Lattice {
  Wfst graph;
  LogitMatrix logits;
  Wfst unrolled;
  std::optional<SymbolTable> symbols;
};

Lattice LoadLattice(const LatticeInputs &in) {
  Wfst graph = ReadFstFile(in.fst);
  LogitMatrix z = ReadLogitsCsv(in.logits);
  Wfst unrolled = Compose(BuildScoreFst(z), graph);
  std::optional<SymbolTable> symbols;
  if (!in.symbols.empty()) symbols = ReadSymbolTableFile(in.symbols);
  return {std::move(graph), std::move(z), std::move(unrolled),
          std::move(symbols)};
}

LossFunction LoadLoss(const std::string &kind, const std::string &ref,
                      const Lattice &lattice) {
  if (kind == "word-edit") {
    return LossFunction::WordEdit(ReadReferenceTranscript(
        ref, lattice.symbols ? &*lattice.symbols : nullptr));
  }
  if (kind == "frame-error") {
    ReferenceAlignment align = ReadReferenceAlignment(ref);
    if (align.Frames() != lattice.logits.Frames()) {
      throw Error(ErrorKind::kDimension,
                  ref + ": alignment has " + std::to_string(align.Frames()) +
                      " frames, logits have " +
                      std::to_string(lattice.logits.Frames()));
    }
    return LossFunction::FrameError(std::move(align));
  }
  throw Error(ErrorKind::kUsage,
              "--loss must be word-edit or frame-error, got '" + kind + "'");
}

Json MatrixJson(const Matrix<double> &m) {
  Json values = Json::array();
  for (double v : m.Data()) values.push_back(v);
  return values;
}

std::string FormatWords(const WordSequence &words,
                        const std::optional<SymbolTable> &symbols) {
  if (words.empty()) return "<eps>";
  std::string text;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) text += ' ';
    std::optional<std::string> token;
    if (symbols) token = symbols->Find(words[i]);
    text += token ? *token : std::to_string(words[i]);
  }
  return text;
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kParse:
    case ErrorKind::kUnsupported:
      return kExitUsage;
    case ErrorKind::kDimension:
    case ErrorKind::kInvalidPath:
      return kExitDimension;
    case ErrorKind::kDegenerate:
    case ErrorKind::kCyclic:
    case ErrorKind::kNumeric:
      return kExitDegenerate;
    case ErrorKind::kOverflow:
      return kExitOverflow;
    case ErrorKind::kInternal:
      return kExitFailure;
  }
  return kExitFailure;
}

std::string FormatDeviation(double value) {
  if (value == 0.0) return "0.0e0";
  if (!std::isfinite(value)) return value > 0 ? "inf" : "nan";
  int exponent = static_cast<int>(std::floor(std::log10(std::abs(value))));
  double mantissa = value / std::pow(10.0, exponent);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", mantissa);
  if (std::abs(std::stod(buf)) >= 10.0) {
    ++exponent;
    std::snprintf(buf, sizeof(buf), "%.1f", value / std::pow(10.0, exponent));
  }
  return std::string(buf) + "e" + std::to_string(exponent);
}

int RunEstimate(const EstimateOptions &opts, std::ostream &out) {
  if (opts.samples == 0) {
    throw Error(ErrorKind::kUsage, "--samples must be positive");
  }
  Lattice lattice = LoadLattice(opts.inputs);
  LossFunction loss = LoadLoss(opts.loss, opts.ref, lattice);
  EstimatorOptions options;
  options.num_samples = opts.samples;
  options.seed = opts.seed;
  options.variance_reduction = opts.variance_reduction;
  options.num_threads = opts.threads;
  MbrEstimate est = EmbrEstimate(lattice.unrolled, lattice.logits, loss,
                                 options);

  Json report;
  report["expected_loss"] = est.expected_loss;
  report["frames"] = lattice.logits.Frames();
  report["clusters"] = lattice.logits.Clusters();
  report["gradient"] = MatrixJson(est.gradient);
  report["num_samples"] = est.num_samples;
  report["loss_mean"] = est.loss_mean;
  report["loss_variance"] = est.loss_variance;
  report["seed"] = est.seed;
  report["variance_reduction"] = opts.variance_reduction;
  if (opts.exact) {
    double exact = ExpectedLossExact(lattice.unrolled, loss);
    Matrix<double> exact_grad =
        ExpectedLossGradientExact(lattice.unrolled, lattice.logits, loss);
    double max_dev = 0.0;
    for (std::size_t k = 0; k < exact_grad.Data().size(); ++k) {
      max_dev = std::max(
          max_dev, std::abs(exact_grad.Data()[k] - est.gradient.Data()[k]));
    }
    report["exact_expected_loss"] = exact;
    report["exact_gradient"] = MatrixJson(exact_grad);
    report["abs_loss_deviation"] = std::abs(est.expected_loss - exact);
    report["max_abs_gradient_deviation"] = max_dev;
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

int RunGradcheck(const GradcheckOptions &opts, std::ostream &out) {
  if (!(opts.eps > 0.0) || !(opts.tol > 0.0)) {
    throw Error(ErrorKind::kUsage, "--eps and --tol must be positive");
  }
  Lattice lattice = LoadLattice(opts.inputs);
  LossFunction loss = LoadLoss(opts.loss, opts.ref, lattice);
  const LogitMatrix &z = lattice.logits;
  Matrix<double> grad = ExpectedLossGradientExact(lattice.unrolled, z, loss);

  auto objective = [&](const LogitMatrix &perturbed) {
    return ExpectedLossExact(Compose(BuildScoreFst(perturbed), lattice.graph),
                             loss);
  };
  std::size_t checked = 0;
  double worst = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> worst_at;
  double worst_fd = 0.0;
  for (std::size_t t = 0; t < z.Frames(); ++t) {
    for (std::size_t c = 0; c < z.Clusters(); ++c) {
      double g = grad(t, c);
      if (std::abs(g) <= 1e-8) continue;
      double plus = objective(z.WithEntry(t, c, z(t, c) + opts.eps));
      double minus = objective(z.WithEntry(t, c, z(t, c) - opts.eps));
      double fd = (plus - minus) / (2.0 * opts.eps);
      double rel = std::abs(g - fd) / std::abs(g);
      ++checked;
      if (!worst_at || rel > worst) {
        worst = rel;
        worst_at = {t, c};
        worst_fd = fd;
      }
    }
  }
  bool pass = worst < opts.tol;
  out << "elements_checked: " << checked << '\n';
  out << "max_relative_error: " << FormatDouble(worst) << '\n';
  if (worst_at) {
    out << "worst: t=" << worst_at->first << " q=" << worst_at->second + 1
        << " exact=" << FormatDouble(grad(worst_at->first, worst_at->second))
        << " finite_difference=" << FormatDouble(worst_fd) << '\n';
  } else {
    out << "worst: none\n";
  }
  out << "eps: " << FormatDouble(opts.eps) << '\n';
  out << "tolerance: " << FormatDouble(opts.tol) << '\n';
  out << "result: " << (pass ? "pass" : "fail") << '\n';
  return pass ? kExitOk : kExitFailure;
}

int RunSample(const SampleOptions &opts, std::ostream &out) {
  if (opts.samples == 0) {
    throw Error(ErrorKind::kUsage, "--samples must be positive");
  }
  Lattice lattice = LoadLattice(opts.inputs);
  std::vector<Path> paths =
      SamplePaths(lattice.unrolled, opts.samples, RandomStream(opts.seed));
  std::map<WordSequence, std::size_t> counts;
  for (const Path &p : paths) ++counts[CollapsePath(lattice.unrolled, p)];

  std::optional<std::map<WordSequence, double>> exact;
  try {
    exact = PathDistribution(lattice.unrolled);
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::kOverflow) throw;
  }

  const double n = static_cast<double>(opts.samples);
  out << "samples: " << opts.samples << '\n';
  out << "seed: " << opts.seed << '\n';
  out << "word_sequence\tcount\tfrequency\texact\n";
  for (const auto &[words, count] : counts) {
    out << FormatWords(words, lattice.symbols) << '\t' << count << '\t'
        << FormatDouble(static_cast<double>(count) / n) << '\t';
    if (exact) {
      auto it = exact->find(words);
      out << FormatDouble(it == exact->end() ? 0.0 : it->second);
    } else {
      out << "n/a";
    }
    out << '\n';
  }
  if (exact) {
    double tv = 0.0;
    double unsampled = 0.0;
    for (const auto &[words, p] : *exact) {
      auto it = counts.find(words);
      double freq = it == counts.end() ? 0.0 : it->second / n;
      if (it == counts.end()) unsampled += p;
      tv += std::abs(freq - p);
    }
    for (const auto &[words, count] : counts) {
      if (!exact->count(words)) tv += count / n;
    }
    out << "unsampled_mass: " << FormatDouble(unsampled) << '\n';
    out << "tv_distance: " << FormatDouble(0.5 * tv) << '\n';
  } else {
    out << "tv_distance: n/a\n";
  }
  return kExitOk;
}

int RunTrain(const TrainOptions &opts, std::ostream &log) {
  TrainConfig config = ReadTrainConfig(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  std::vector<Utterance> dataset = MakeSyntheticTask(
      config.vocab_size, config.frames, config.clusters, config.features,
      config.num_utterances, config.task_seed);
  ExperimentResult result = RunExperiment(dataset, config);

  std::ofstream curve(opts.curve);
  if (!curve) throw Error(ErrorKind::kUsage, opts.curve + ": cannot write");
  WriteCurveCsv(result.curve, curve);
  std::ofstream model(opts.model_out);
  if (!model) {
    throw Error(ErrorKind::kUsage, opts.model_out + ": cannot write");
  }
  WriteModel(result.model, model);

  log << "loss: " << LossKindName(config.loss) << '\n';
  log << "learning_rate: " << FormatDouble(config.EffectiveLearningRate())
      << '\n';
  log << "initial_dev_expected_loss: "
      << FormatDouble(result.curve.front().exact_expected_loss) << '\n';
  log << "final_dev_expected_loss: "
      << FormatDouble(result.curve.back().exact_expected_loss) << '\n';
  log << "best_step: " << result.best_step << '\n';
  return kExitOk;
}

int RunInspect(const InspectOptions &opts, std::ostream &out) {
  Wfst fst = ReadFstFile(opts.fst);
  bool acyclic = IsAcyclic(fst);
  std::optional<std::uint64_t> paths;
  if (acyclic) paths = CountPaths(fst, kDefaultPathBound);
  double deviation = MaxStochasticDeviation(fst);
  bool stochastic = deviation <= 1e-9;

  if (opts.json) {
    Json report;
    report["states"] = fst.NumStates();
    report["edges"] = fst.NumEdges();
    report["acyclic"] = acyclic;
    if (paths) {
      report["paths"] = *paths;
    } else {
      report["paths"] = nullptr;
    }
    report["stochastic"] = stochastic;
    report["max_stochastic_deviation"] = deviation;
    out << report.dump(2) << '\n';
    return kExitOk;
  }
  out << "states: " << fst.NumStates() << '\n';
  out << "edges: " << fst.NumEdges() << '\n';
  out << "acyclic: " << (acyclic ? "true" : "false") << '\n';
  out << "paths: ";
  if (paths) {
    out << *paths;
  } else {
    out << (acyclic ? ">" + std::to_string(kDefaultPathBound) : "n/a");
  }
  out << '\n';
  out << "stochastic: " << (stochastic ? "true" : "false") << " (max dev "
      << FormatDeviation(deviation) << ")\n";
  return kExitOk;
}

}  // namespace embr::cli
