// fst_test.cc
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

#include "embr/fst.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "embr/error.h"
#include "embr/fst-io.h"
#include "testing/fixtures.h"

namespace embr {
namespace {

Wfst Parse(const std::string &text) {
  std::istringstream in(text);
  return ParseFstText(in, "test");
}

ErrorKind KindOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no embr::Error thrown";
  return ErrorKind::kInternal;
}

TEST(ParseFstTextTest, SingleEdge) {
  Wfst fst = Parse("0 1 1 1 0.0\n1");
  EXPECT_EQ(fst.NumStates(), 2);
  ASSERT_EQ(fst.NumEdges(), 1u);
  EXPECT_EQ(fst.GetEdge(0).log_weight, 0.0);
  EXPECT_EQ(fst.Final(), 1);
}

TEST(ParseFstTextTest, ParallelEdges) {
  Wfst fst = Parse("0 1 1 2 -0.693147\n0 1 2 3 -1.203973\n1");
  ASSERT_EQ(fst.NumEdges(), 2u);
  EXPECT_NEAR(std::exp(fst.GetEdge(0).log_weight), 0.5, 1e-6);
  EXPECT_NEAR(std::exp(fst.GetEdge(1).log_weight), 0.3, 1e-6);
  EXPECT_EQ(fst.GetEdge(1).olabel, 3);
}

TEST(ParseFstTextTest, NegativeInfinityIsZeroWeight) {
  Wfst fst = Parse("0 1 1 1 -inf\n0 1 2 2 0\n1\n");
  EXPECT_EQ(fst.GetEdge(0).log_weight, -INFINITY);
}

TEST(ParseFstTextTest, Errors) {
  auto parse_error_line = [](const std::string &text) -> std::string {
    try {
      Parse(text);
    } catch (const Error &e) {
      EXPECT_EQ(e.kind(), ErrorKind::kParse);
      return e.what();
    }
    return "no error";
  };
  EXPECT_NE(parse_error_line("0 1 1 1 0.0\n0 2 1 1 0.0\n1\n2")
                .find("test:4: multiple final states"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 1 0.0\n1").find("test:1:"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 x 1 0.0\n1").find("bad label"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 1 1 abc\n1").find("bad log-weight"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 1 1 inf\n1").find("bad log-weight"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 1 1 nan\n1").find("bad log-weight"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 1 1 0\n0 5 1 1 0\n1\n")
                .find("test:2: unknown state reference 5"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 1 1 0\n1 0 1 1 0\n1\n")
                .find("leaves the final state"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 1 1 1 0\n").find("missing final"),
            std::string::npos);
  EXPECT_NE(parse_error_line("0 2 1 1 0\n2\n").find("not dense"),
            std::string::npos);
}

TEST(FstTest, RejectsEdgeLeavingFinal) {
  EXPECT_EQ(KindOf([] { Wfst(2, {{1, 0, 1, 1, 0.0}}, 1); }),
            ErrorKind::kParse);
}

TEST(PathLogWeightTest, Examples) {
  Wfst single = Parse("0 1 1 1 0.0\n1");
  EXPECT_EQ(PathLogWeight(single, MakePath(single, {0})), 0.0);

  Wfst chain = Parse("0 1 1 1 " + FormatDouble(std::log(2.0)) + "\n1 2 1 1 " +
                     FormatDouble(std::log(3.0)) + "\n2");
  EXPECT_NEAR(PathLogWeight(chain, MakePath(chain, {0, 1})), std::log(6.0),
              1e-15);

  Wfst empty = Parse("0");
  EXPECT_EQ(PathLogWeight(empty, MakePath(empty, {})), 0.0);
}

TEST(PathLogWeightTest, InvalidPath) {
  Wfst chain = Parse("0 1 1 1 0\n1 2 1 1 0\n2");
  EXPECT_EQ(KindOf([&] { MakePath(chain, {1, 0}); }), ErrorKind::kInvalidPath);
  EXPECT_EQ(KindOf([&] { MakePath(chain, {0}); }), ErrorKind::kInvalidPath);
  EXPECT_EQ(KindOf([&] { MakePath(chain, {7}); }), ErrorKind::kInvalidPath);
  Path bogus{{1}, 0.0};
  EXPECT_EQ(KindOf([&] { PathLogWeight(chain, bogus); }),
            ErrorKind::kInvalidPath);
}

TEST(PathLogWeightTest, AdditiveUnderConcatenation) {
  RandomStream rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Wfst fst = testing::RandomAcyclicFst(rng, 8);
    for (const Path &p : EnumeratePaths(fst, 100000)) {
      // Split at every interior position; both halves sum to the whole.
      for (std::size_t k = 0; k <= p.edges.size(); ++k) {
        double head = 0.0;
        double tail = 0.0;
        for (std::size_t i = 0; i < k; ++i)
          head += fst.GetEdge(p.edges[i]).log_weight;
        for (std::size_t i = k; i < p.edges.size(); ++i)
          tail += fst.GetEdge(p.edges[i]).log_weight;
        EXPECT_NEAR(head + tail, PathLogWeight(fst, p), 1e-12);
      }
    }
  }
}

TEST(CollapsePathTest, Examples) {
  Wfst fst = Parse("0 1 1 5 0\n1 2 1 0 0\n2 3 1 7 0\n3");
  EXPECT_EQ(CollapsePath(fst, MakePath(fst, {0, 1, 2})),
            (WordSequence{5, 7}));
  Wfst eps = Parse("0 1 1 0 0\n1 2 2 0 0\n2");
  EXPECT_TRUE(CollapsePath(eps, MakePath(eps, {0, 1})).empty());
  Wfst dup = Parse("0 1 1 3 0\n1 2 1 3 0\n2");
  EXPECT_EQ(CollapsePath(dup, MakePath(dup, {0, 1})), (WordSequence{3, 3}));
}

TEST(EnumeratePathsTest, Examples) {
  EXPECT_EQ(EnumeratePaths(Parse("0 1 1 1 0\n1 2 1 1 0\n2")).size(), 1u);
  Wfst grid = Parse("0 1 1 1 0\n0 1 2 2 0\n1 2 1 1 0\n1 2 2 2 0\n2");
  std::vector<Path> paths = EnumeratePaths(grid);
  ASSERT_EQ(paths.size(), 4u);
  EXPECT_EQ(paths[0].edges, (std::vector<EdgeId>{0, 2}));
  EXPECT_EQ(paths[1].edges, (std::vector<EdgeId>{0, 3}));
  EXPECT_EQ(paths[2].edges, (std::vector<EdgeId>{1, 2}));
  EXPECT_EQ(paths[3].edges, (std::vector<EdgeId>{1, 3}));

  Wfst diamond = Parse("0 1 1 1 0\n0 2 1 1 0\n1 3 1 1 0\n2 3 1 1 0\n3");
  EXPECT_EQ(KindOf([&] { EnumeratePaths(diamond, 1); }), ErrorKind::kOverflow);
  EXPECT_EQ(EnumeratePaths(diamond, 2).size(), 2u);
}

TEST(EnumeratePathsTest, RejectsCycles) {
  Wfst cyclic = Parse("0 1 1 1 0\n1 0 1 1 0\n1 2 1 1 0\n2");
  EXPECT_FALSE(IsAcyclic(cyclic));
  EXPECT_EQ(KindOf([&] { EnumeratePaths(cyclic); }), ErrorKind::kCyclic);
}

TEST(EnumeratePathsTest, MatchesDfsRecountOnRandomFsts) {
  RandomStream rng(3);
  int checked = 0;
  while (checked < 200) {
    Wfst fst = testing::RandomAcyclicFst(rng, 2 + rng() % 6, 3, 0.4);
    if (fst.NumEdges() > 12) continue;
    auto oracle = testing::DfsPaths(fst);
    std::vector<Path> paths = EnumeratePaths(fst, 100000);
    ASSERT_EQ(paths.size(), oracle.size());
    std::sort(oracle.begin(), oracle.end());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      EXPECT_EQ(paths[i].edges, oracle[i]) << "lexicographic order";
    }
    EXPECT_EQ(CountPaths(fst, 100000), paths.size());
    ++checked;
  }
}

TEST(CountPathsTest, Limit) {
  Wfst grid = Parse("0 1 1 1 0\n0 1 2 2 0\n1 2 1 1 0\n1 2 2 2 0\n2");
  EXPECT_EQ(CountPaths(grid, 4), 4u);
  EXPECT_FALSE(CountPaths(grid, 3).has_value());
}

TEST(PathDistributionTest, Examples) {
  auto single = PathDistribution(Parse("0 1 1 4 0.3\n1"));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_DOUBLE_EQ(single.at({4}), 1.0);

  Wfst two = Parse("0 1 1 1 " + FormatDouble(std::log(2.0)) + "\n0 1 2 2 " +
                   FormatDouble(std::log(3.0)) + "\n1");
  auto d2 = PathDistribution(two);
  EXPECT_NEAR(d2.at({1}), 0.4, 1e-15);
  EXPECT_NEAR(d2.at({2}), 0.6, 1e-15);

  Wfst shared = Parse("0 1 1 1 0\n0 1 2 1 0\n0 1 3 2 " +
                      FormatDouble(std::log(2.0)) + "\n1");
  auto d3 = PathDistribution(shared);
  ASSERT_EQ(d3.size(), 2u);
  EXPECT_NEAR(d3.at({1}), 0.5, 1e-15);
  EXPECT_NEAR(d3.at({2}), 0.5, 1e-15);
}

TEST(PathDistributionTest, Degenerate) {
  EXPECT_EQ(KindOf([] { PathDistribution(Parse("0 1 1 1 -inf\n1")); }),
            ErrorKind::kDegenerate);
  EXPECT_EQ(KindOf([] { PathDistribution(Wfst(2, {}, 1)); }),
            ErrorKind::kDegenerate);
}

TEST(PathDistributionTest, SumsToOneOnRandomFsts) {
  RandomStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Wfst fst = testing::RandomAcyclicFst(rng, 2 + rng() % 8);
    double total = 0.0;
    for (const auto &[words, p] : PathDistribution(fst, 100000)) {
      EXPECT_GE(p, 0.0);
      EXPECT_TRUE(std::find(words.begin(), words.end(), kEpsilon) ==
                  words.end());
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(FstTextTest, RoundTripIsExact) {
  RandomStream rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Wfst fst = testing::RandomAcyclicFst(rng, 1 + rng() % 10, 6);
    std::string text = FstToText(fst);
    Wfst back = Parse(text);
    EXPECT_EQ(back.NumStates(), fst.NumStates());
    EXPECT_EQ(back.Final(), fst.Final());
    ASSERT_EQ(back.NumEdges(), fst.NumEdges());
    for (std::size_t i = 0; i < fst.NumEdges(); ++i) {
      // operator== compares log-weights bit for bit.
      EXPECT_EQ(back.GetEdge(i), fst.GetEdge(i));
    }
    EXPECT_EQ(FstToText(back), text);
  }
}

TEST(SymbolTableTest, ParseAndLookup) {
  std::istringstream in("hello 1\nworld 2\n\n");
  SymbolTable table = ParseSymbolTable(in, "syms");
  EXPECT_EQ(table.Size(), 2u);
  EXPECT_EQ(table.Find("world"), 2);
  EXPECT_EQ(table.Find(1), "hello");
  EXPECT_FALSE(table.Find("missing").has_value());

  std::istringstream dup("a 1\nb 1\n");
  EXPECT_EQ(KindOf([&] { ParseSymbolTable(dup, "syms"); }), ErrorKind::kParse);
  std::istringstream eps("<eps> 0\n");
  EXPECT_EQ(KindOf([&] { ParseSymbolTable(eps, "syms"); }), ErrorKind::kParse);
}

}  // namespace
}  // namespace embr
