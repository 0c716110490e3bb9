// commands.h
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
// Subcommands of the embr tool. Each Run* function writes its report to
// `out` and returns the process exit code; embr::Error exceptions propagate
// to the caller, which maps them with ExitCodeFor.

#ifndef EMBR_TOOLS_COMMANDS_H_
#define EMBR_TOOLS_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "embr/error.h"

namespace embr::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // gradcheck mismatch, unexpected errors
  kExitUsage = 2,    // usage and parse errors
  kExitDimension = 3,
  kExitDegenerate = 4,
  kExitOverflow = 5,
};

int ExitCodeFor(ErrorKind kind);

struct LatticeInputs {
  std::string fst;     // decoder graph, composed with S(z)
  std::string logits;  // CSV
  std::string symbols;  // optional symbol table for --ref tokens
};

struct EstimateOptions {
  LatticeInputs inputs;
  std::string ref;
  std::string loss = "word-edit";
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  bool exact = false;
  bool variance_reduction = true;
  int threads = 1;
};
int RunEstimate(const EstimateOptions &opts, std::ostream &out);

struct GradcheckOptions {
  LatticeInputs inputs;
  std::string ref;
  std::string loss = "word-edit";
  double eps = 1e-5;
  double tol = 1e-4;
};
int RunGradcheck(const GradcheckOptions &opts, std::ostream &out);

struct SampleOptions {
  LatticeInputs inputs;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};
int RunSample(const SampleOptions &opts, std::ostream &out);

struct TrainOptions {
  std::string config;
  std::string curve;
  std::string model_out;
  std::optional<std::uint64_t> seed;
};
int RunTrain(const TrainOptions &opts, std::ostream &log);

struct InspectOptions {
  std::string fst;
  bool json = false;
};
int RunInspect(const InspectOptions &opts, std::ostream &out);

// "0.0e0", "1.4e-3": one decimal of mantissa, unpadded exponent.
std::string FormatDeviation(double value);

}  // namespace embr::cli

#endif  // EMBR_TOOLS_COMMANDS_H_
