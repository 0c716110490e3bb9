// cli_test.cc
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

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "commands.h"
#include "embr/compose.h"
#include "embr/fst-io.h"
#include "embr/inference.h"
#include "json.hpp"

namespace embr::cli {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string tmpl = (fs::temp_directory_path() / "embr_cli_XXXXXX").string();
    ASSERT_NE(mkdtemp(tmpl.data()), nullptr);
    dir_ = tmpl;
    Write("id.fst", "0 0 1 1 0\n0 0 2 2 0\n0 1 0 0 0\n1\n");
    Write("two.csv", "-0.916290731874155,-0.5108256237659907\n");
    Write("zero.csv", "0,0\n0,0\n");
    Write("ref.txt", "1\n");
    Write("align.txt", "1\n");
    Write("empty.txt", "");
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string &name) const {
    return (dir_ / name).string();
  }
  void Write(const std::string &name, const std::string &text) const {
    std::ofstream(dir_ / name) << text;
  }

  CliResult Cli(const std::string &args) const {
    std::string cmd = std::string(EMBR_CLI_PATH) + " " + args + " >" +
                      Path("stdout") + " 2>" + Path("stderr");
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(dir_ / "stdout");
    r.err = Slurp(dir_ / "stderr");
    return r;
  }

  std::string Lattice(const std::string &fst, const std::string &logits) {
    return "--fst " + Path(fst) + " --logits " + Path(logits);
  }

  fs::path dir_;
};

TEST(CliHelpersTest, FormatDeviation) {
  EXPECT_EQ(FormatDeviation(0.0), "0.0e0");
  EXPECT_EQ(FormatDeviation(1.4e-3), "1.4e-3");
  EXPECT_EQ(FormatDeviation(1.0986), "1.1e0");
}

TEST(CliHelpersTest, ExitCodes) {
  EXPECT_EQ(ExitCodeFor(ErrorKind::kUsage), 2);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kParse), 2);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kDimension), 3);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kDegenerate), 4);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kOverflow), 5);
}

TEST_F(CliTest, EstimateTwoPathWithExact) {
  EstimateOptions opts;
  opts.inputs = {Path("id.fst"), Path("two.csv"), ""};
  opts.ref = Path("ref.txt");
  opts.samples = 2000;
  opts.seed = 4;
  opts.exact = true;
  std::ostringstream out;
  ASSERT_EQ(RunEstimate(opts, out), 0);
  auto j = nlohmann::json::parse(out.str());
  EXPECT_NEAR(j["exact_expected_loss"].get<double>(), 0.6, 1e-15);
  double sampled = j["expected_loss"].get<double>();
  EXPECT_NEAR(sampled, 0.6, 0.05);
  EXPECT_DOUBLE_EQ(j["abs_loss_deviation"].get<double>(),
                   std::abs(sampled - j["exact_expected_loss"].get<double>()));
  EXPECT_EQ(j["num_samples"].get<int>(), 2000);
  EXPECT_EQ(j["seed"].get<int>(), 4);
  ASSERT_EQ(j["gradient"].size(), 2u);
  EXPECT_NEAR(j["exact_gradient"][0].get<double>(), -0.24, 1e-15);
  EXPECT_NEAR(j["exact_gradient"][1].get<double>(), 0.24, 1e-15);
}

TEST_F(CliTest, EstimateSinglePath) {
  Write("one.fst", "0 1 1 1 0\n1 2 1 1 0\n2\n");
  Write("one.csv", "0.3\n-1\n");
  Write("ref2.txt", "2\n");
  for (int samples : {1, 7}) {
    CliResult r = Cli("estimate " + Lattice("one.fst", "one.csv") + " --ref " +
                      Path("ref2.txt") + " --samples " +
                      std::to_string(samples));
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["expected_loss"].get<double>(), 2.0);
    for (const auto &g : j["gradient"]) EXPECT_EQ(g.get<double>(), 0.0);
  }
}

TEST_F(CliTest, ExitCodesFromBinary) {
  std::string base = "estimate " + Lattice("id.fst", "two.csv") + " --ref " +
                     Path("ref.txt");
  CliResult zero = Cli(base + " --samples 0");
  EXPECT_EQ(zero.code, 2);
  EXPECT_NE(zero.err.find("error[usage]"), std::string::npos);

  EXPECT_EQ(Cli("").code, 2);
  EXPECT_EQ(Cli("frobnicate").code, 2);

  Write("bad.fst", "0 1 1 1 0\n0 1 x 1 0\n1\n");
  CliResult parse = Cli("estimate " + Lattice("bad.fst", "two.csv") +
                        " --ref " + Path("ref.txt"));
  EXPECT_EQ(parse.code, 2);
  EXPECT_NE(parse.err.find("error[parse]"), std::string::npos);
  EXPECT_NE(parse.err.find("bad.fst:2"), std::string::npos) << parse.err;

  Write("ragged.csv", "0,0\n0\n");
  CliResult ragged = Cli("estimate " + Lattice("id.fst", "ragged.csv") +
                         " --ref " + Path("ref.txt"));
  EXPECT_EQ(ragged.code, 2);
  EXPECT_NE(ragged.err.find("ragged.csv:2"), std::string::npos) << ragged.err;

  Write("long.txt", "1 2\n");
  CliResult dim = Cli("estimate " + Lattice("id.fst", "two.csv") + " --ref " +
                      Path("long.txt") + " --loss frame-error");
  EXPECT_EQ(dim.code, 3);
  EXPECT_NE(dim.err.find("error[dimension]"), std::string::npos);

  Write("three.fst", "0 1 3 3 0\n1\n");
  CliResult degenerate = Cli("estimate " + Lattice("three.fst", "two.csv") +
                             " --ref " + Path("ref.txt"));
  EXPECT_EQ(degenerate.code, 4);
  EXPECT_NE(degenerate.err.find("error[degenerate]"), std::string::npos);

  std::ostringstream wide;
  for (int t = 0; t < 16; ++t) wide << "0,0\n";
  Write("wide.csv", wide.str());
  CliResult overflow = Cli("gradcheck " + Lattice("id.fst", "wide.csv") +
                           " --ref " + Path("ref.txt"));
  EXPECT_EQ(overflow.code, 5);
  EXPECT_NE(overflow.err.find("error[overflow]"), std::string::npos);

  EXPECT_EQ(Cli("inspect --fst " + Path("missing.fst")).code, 2);
}

TEST_F(CliTest, Gradcheck) {
  std::string base = "gradcheck " + Lattice("id.fst", "two.csv") + " --ref " +
                     Path("ref.txt");
  CliResult pass = Cli(base);
  EXPECT_EQ(pass.code, 0) << pass.out;
  EXPECT_NE(pass.out.find("result: pass"), std::string::npos);

  CliResult fail = Cli(base + " --tol 1e-12");
  EXPECT_EQ(fail.code, 1);
  EXPECT_NE(fail.out.find("result: fail"), std::string::npos);
  EXPECT_NE(fail.out.find("worst: t=0 q="), std::string::npos);

  CliResult frame = Cli("gradcheck " + Lattice("id.fst", "zero.csv") +
                        " --loss frame-error --ref " + Path("align2.txt"));
  EXPECT_EQ(frame.code, 2);
  Write("align2.txt", "2 1\n");
  frame = Cli("gradcheck " + Lattice("id.fst", "zero.csv") +
              " --loss frame-error --ref " + Path("align2.txt"));
  EXPECT_EQ(frame.code, 0) << frame.out << frame.err;

  Write("silent.fst", "0 0 1 0 0\n0 0 2 0 0\n0 1 0 0 0\n1\n");
  GradcheckOptions constant;
  constant.inputs = {Path("silent.fst"), Path("zero.csv"), ""};
  constant.ref = Path("empty.txt");
  std::ostringstream out;
  EXPECT_EQ(RunGradcheck(constant, out), 0);
  EXPECT_NE(out.str().find("elements_checked: 0"), std::string::npos)
      << out.str();
  EXPECT_NE(out.str().find("result: pass"), std::string::npos);
}

// Parses the word_sequence table of a sample report.
std::map<std::string, std::pair<double, double>> SampleTable(
    const std::string &report, double *tv) {
  std::map<std::string, std::pair<double, double>> rows;
  std::istringstream in(report);
  std::string line;
  bool table = false;
  while (std::getline(in, line)) {
    if (line.rfind("word_sequence\t", 0) == 0) {
      table = true;
      continue;
    }
    if (line.rfind("tv_distance: ", 0) == 0) *tv = std::stod(line.substr(13));
    if (!table || line.find('\t') == std::string::npos) {
      table = false;
      continue;
    }
    std::istringstream cols(line);
    std::string seq, count, freq, exact;
    std::getline(cols, seq, '\t');
    std::getline(cols, count, '\t');
    std::getline(cols, freq, '\t');
    std::getline(cols, exact, '\t');
    rows[seq] = {std::stod(freq), std::stod(exact)};
  }
  return rows;
}

TEST_F(CliTest, SampleReports) {
  double tv = -1.0;
  CliResult big = Cli("sample " + Lattice("id.fst", "two.csv") +
                      " --samples 100000 --seed 8");
  ASSERT_EQ(big.code, 0) << big.err;
  auto rows = SampleTable(big.out, &tv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows["1"].second, 0.4, 1e-12);
  EXPECT_NEAR(rows["2"].second, 0.6, 1e-12);
  EXPECT_LT(tv, 0.01);

  CliResult one = Cli("sample " + Lattice("id.fst", "two.csv") +
                      " --samples 1 --seed 8");
  rows = SampleTable(one.out, &tv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows.begin()->second.first, 1.0);
  double p = rows.begin()->second.second;
  EXPECT_TRUE(std::abs(p - 0.4) < 1e-12 || std::abs(p - 0.6) < 1e-12);

  CliResult four = Cli("sample " + Lattice("id.fst", "zero.csv") +
                       " --samples 100000 --seed 2");
  rows = SampleTable(four.out, &tv);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto &[seq, fe] : rows) {
    EXPECT_NEAR(fe.first, 0.25, 0.01) << seq;
    EXPECT_NEAR(fe.second, 0.25, 1e-12);
  }
}

TEST_F(CliTest, Inspect) {
  Wfst sausage = BuildScoreFst(LogitMatrix(2, 2));
  std::ofstream(dir_ / "sausage.fst") << FstToText(sausage);
  CliResult r = Cli("inspect --fst " + Path("sausage.fst"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("states: 3\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("edges: 4\n"), std::string::npos);
  EXPECT_NE(r.out.find("paths: 4\n"), std::string::npos);
  EXPECT_NE(r.out.find("acyclic: true\n"), std::string::npos);

  Wfst even(3,
            {{0, 1, 1, 1, 0.0}, {0, 1, 2, 2, 0.0}, {1, 2, 1, 1, 0.0}}, 2);
  StochasticFst s = ReweightStochastic(even, Backward(even));
  std::ofstream(dir_ / "stoch.fst") << FstToText(s.Fst());
  r = Cli("inspect --fst " + Path("stoch.fst"));
  EXPECT_NE(r.out.find("stochastic: true (max dev 0.0e0)"), std::string::npos)
      << r.out;

  Wfst two(2, {{0, 1, 1, 1, std::log(2.0)}, {0, 1, 2, 2, std::log(3.0)}}, 1);
  std::ofstream(dir_ / "stoch2.fst")
      << FstToText(ReweightStochastic(two, Backward(two)).Fst());
  r = Cli("inspect --json --fst " + Path("stoch2.fst"));
  auto reweighted = nlohmann::json::parse(r.out);
  EXPECT_TRUE(reweighted["stochastic"].get<bool>());
  EXPECT_LT(reweighted["max_stochastic_deviation"].get<double>(), 1e-9);

  r = Cli("inspect --fst " + Path("id.fst"));
  EXPECT_NE(r.out.find("acyclic: false\n"), std::string::npos);
  EXPECT_NE(r.out.find("paths: n/a\n"), std::string::npos);

  r = Cli("inspect --json --fst " + Path("sausage.fst"));
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["states"].get<int>(), 3);
  EXPECT_EQ(j["paths"].get<int>(), 4);
}

TEST_F(CliTest, TrainZeroSteps) {
  Write("cfg.txt", "steps = 0\nnum_utterances = 20\n");
  CliResult r = Cli("train --config " + Path("cfg.txt") + " --curve " +
                    Path("curve.csv") + " --out " + Path("model.txt"));
  ASSERT_EQ(r.code, 0) << r.err;
  std::string curve = Slurp(dir_ / "curve.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 2);
  EXPECT_EQ(curve.rfind("step,", 0), 0u);
  EXPECT_FALSE(Slurp(dir_ / "model.txt").empty());

  Write("badcfg.txt", "stepz = 3\n");
  EXPECT_EQ(Cli("train --config " + Path("badcfg.txt") + " --curve " +
                Path("c2.csv"))
                .code,
            2);
}

TEST_F(CliTest, OutputsAreReproducible) {
  Write("cfg.txt", "steps = 30\nnum_utterances = 30\neval_interval = 10\n");
  const std::vector<std::string> commands = {
      "estimate " + Lattice("id.fst", "two.csv") + " --ref " +
          Path("ref.txt") + " --samples 500 --seed 3 --exact --out ",
      "estimate " + Lattice("id.fst", "two.csv") + " --ref " +
          Path("ref.txt") + " --samples 500 --seed 3 --threads 3 --out ",
      "gradcheck " + Lattice("id.fst", "two.csv") + " --ref " +
          Path("ref.txt") + " --out ",
      "sample " + Lattice("id.fst", "two.csv") + " --samples 999 --out ",
      "inspect --fst " + Path("id.fst") + " --out ",
  };
  for (const std::string &cmd : commands) {
    ASSERT_EQ(Cli(cmd + Path("a.out")).code, 0) << cmd;
    ASSERT_EQ(Cli(cmd + Path("b.out")).code, 0) << cmd;
    EXPECT_EQ(Slurp(dir_ / "a.out"), Slurp(dir_ / "b.out")) << cmd;
    EXPECT_FALSE(Slurp(dir_ / "a.out").empty());
  }
  for (const char *tag : {"a", "b"}) {
    std::string t(tag);
    ASSERT_EQ(Cli("train --config " + Path("cfg.txt") + " --seed 5 --curve " +
                  Path(t + ".csv") + " --out " + Path(t + ".model"))
                  .code,
              0);
  }
  EXPECT_EQ(Slurp(dir_ / "a.csv"), Slurp(dir_ / "b.csv"));
  EXPECT_EQ(Slurp(dir_ / "a.model"), Slurp(dir_ / "b.model"));
}

}  // namespace
}  // namespace embr::cli
