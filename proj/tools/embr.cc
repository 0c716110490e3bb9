// embr.cc
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
// Command-line front end: estimate, gradcheck, sample, train, inspect.
// Errors are reported on stderr as "error[<category>]: <message>".

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "embr/error.h"

namespace {

using embr::cli::kExitUsage;

// "-" or empty writes to stdout.
class Output {
 public:
  explicit Output(const std::string &path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) {
      throw embr::Error(embr::ErrorKind::kUsage, path + ": cannot write");
    }
  }
  std::ostream &stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void AddLatticeFlags(CLI::App *cmd, embr::cli::LatticeInputs &in) {
  cmd->add_option("--fst", in.fst, "Decoder graph in FST text format")
      ->required();
  cmd->add_option("--logits", in.logits, "T x Q logit matrix (CSV)")
      ->required();
  cmd->add_option("--symbols", in.symbols,
                  "Symbol table for reference tokens and report output");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Sampled minimum Bayes risk training over weighted FSTs"};
  app.require_subcommand(1);
  std::string out_path = "-";

  embr::cli::EstimateOptions estimate;
  auto *cmd_estimate =
      app.add_subcommand("estimate", "Monte Carlo expected loss and gradient");
  AddLatticeFlags(cmd_estimate, estimate.inputs);
  cmd_estimate->add_option("--ref", estimate.ref, "Reference file")->required();
  cmd_estimate->add_option("--loss", estimate.loss, "word-edit | frame-error")
      ->check(CLI::IsMember({"word-edit", "frame-error"}));
  cmd_estimate->add_option("--samples", estimate.samples, "Samples I")
      ->check(CLI::PositiveNumber);
  cmd_estimate->add_option("--seed", estimate.seed, "Random seed");
  cmd_estimate->add_flag("--exact", estimate.exact,
                         "Also report enumeration values and deviations");
  bool no_baseline = false;
  cmd_estimate->add_flag("--no-baseline", no_baseline,
                         "Estimate the gradient without the mean-loss baseline");
  cmd_estimate->add_option("--threads", estimate.threads, "Sampling threads")
      ->check(CLI::PositiveNumber);
  cmd_estimate->add_option("--out", out_path, "JSON report (default stdout)");

  embr::cli::GradcheckOptions gradcheck;
  auto *cmd_gradcheck = app.add_subcommand(
      "gradcheck", "Exact gradient against central finite differences");
  AddLatticeFlags(cmd_gradcheck, gradcheck.inputs);
  cmd_gradcheck->add_option("--ref", gradcheck.ref, "Reference file")
      ->required();
  cmd_gradcheck->add_option("--loss", gradcheck.loss, "word-edit | frame-error")
      ->check(CLI::IsMember({"word-edit", "frame-error"}));
  cmd_gradcheck->add_option("--eps", gradcheck.eps, "Finite-difference step");
  cmd_gradcheck->add_option("--tol", gradcheck.tol, "Relative tolerance");
  std::uint64_t unused_seed = 0;
  cmd_gradcheck->add_option("--seed", unused_seed,
                            "Unused; accepted for uniformity");
  cmd_gradcheck->add_option("--out", out_path, "Report (default stdout)");

  embr::cli::SampleOptions sample;
  auto *cmd_sample =
      app.add_subcommand("sample", "Histogram of sampled word sequences");
  AddLatticeFlags(cmd_sample, sample.inputs);
  cmd_sample->add_option("--samples", sample.samples, "Samples I")
      ->check(CLI::PositiveNumber);
  cmd_sample->add_option("--seed", sample.seed, "Random seed");
  cmd_sample->add_option("--out", out_path, "Report (default stdout)");

  embr::cli::TrainOptions train;
  train.model_out = "model.txt";
  auto *cmd_train =
      app.add_subcommand("train", "Synthetic-task training run");
  cmd_train->add_option("--config", train.config, "key=value config file")
      ->required();
  cmd_train->add_option("--curve", train.curve, "Training-curve CSV")
      ->required();
  cmd_train->add_option("--out", train.model_out, "Model output file");
  cmd_train->add_option("--seed", train.seed, "Overrides the config seed");

  embr::cli::InspectOptions inspect;
  auto *cmd_inspect = app.add_subcommand("inspect", "Summarize an FST");
  cmd_inspect->add_option("--fst", inspect.fst, "FST text file")->required();
  cmd_inspect->add_flag("--json", inspect.json, "JSON summary");
  cmd_inspect->add_option("--seed", unused_seed,
                          "Unused; accepted for uniformity");
  cmd_inspect->add_option("--out", out_path, "Summary (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "error[usage]: " << e.what() << '\n';
    return kExitUsage;
  }
  estimate.variance_reduction = !no_baseline;

  try {
    if (*cmd_train) {
      return embr::cli::RunTrain(train, std::cout);
    }
    Output out(out_path);
    if (*cmd_estimate) return embr::cli::RunEstimate(estimate, out.stream());
    if (*cmd_gradcheck) return embr::cli::RunGradcheck(gradcheck, out.stream());
    if (*cmd_sample) return embr::cli::RunSample(sample, out.stream());
    if (*cmd_inspect) return embr::cli::RunInspect(inspect, out.stream());
  } catch (const embr::Error &e) {
    std::cerr << "error[" << embr::ErrorKindName(e.kind()) << "]: " << e.what()
              << '\n';
    return embr::cli::ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return embr::cli::kExitFailure;
  }
  return embr::cli::kExitFailure;
}
