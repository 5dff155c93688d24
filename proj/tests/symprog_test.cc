// Copyright 2026 The mdlxf Authors
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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "mdlxf/ptm.h"
#include "mdlxf/symprog.h"
#include "mdlxf/toys.h"

namespace mdlxf::symprog {
namespace {

std::vector<int> Bits(unsigned v, int len) {
  std::vector<int> x(len);
  for (int i = 0; i < len; ++i) x[i] = (v >> i) & 1;
  return x;
}

std::int64_t ParityOf(const SymbolicProgram& p, const std::vector<int>& x) {
  const auto r = Interpret(p, p.vocab.Preprocess(x),
                           static_cast<int>(x.size()) + 2);
  EXPECT_TRUE(r.diagnostics.empty());
  return r.Outputs(p)[0].num;
}

TEST(ParityProgramTest, Examples) {
  const SymbolicProgram p = BuildParityProgram();
  EXPECT_TRUE(Validate(p).empty());
  EXPECT_EQ(ParityOf(p, {1, 0, 1, 1}), 1);
  EXPECT_EQ(ParityOf(p, {0, 0, 0, 0}), 0);
  EXPECT_EQ(ParityOf(p, {}), 0);
}

TEST(ParityProgramTest, ExhaustiveLengthTen) {
  const SymbolicProgram p = BuildParityProgram(3);
  for (unsigned v = 0; v < 1024; ++v) {
    const auto x = Bits(v, 10);
    ASSERT_EQ(ParityOf(p, x), __builtin_popcount(v) % 2) << v;
  }
}

TEST(ValidateTest, Diagnostics) {
  SymbolicProgram p = BuildParityProgram();
  p.rules.push_back({{{"nope", 1}}, {}, {}});
  auto d = Validate(p);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NE(d[0].find("nope"), std::string::npos);

  SymbolicProgram q = BuildParityProgram();
  q.rules.push_back({{{"bit", 1}}, {{"parity", 0}}, {}});
  d = Validate(q);
  ASSERT_FALSE(d.empty());
  EXPECT_NE(d[0].find("non-deterministic"), std::string::npos);
}

TEST(ValidateTest, StandardProgramsAreClean) {
  EXPECT_TRUE(Validate(BuildCopyProgram()).empty());
  for (const auto& [name, m] : toys::TapeMachines())
    EXPECT_TRUE(Validate(BuildSingleTapeTMProgram(m)).empty()) << name;
  for (const auto& [name, spec] : toys::PrefixMachines())
    EXPECT_TRUE(Validate(BuildPrefixTMProgram(ptm::Machine(spec), 8)).empty())
        << name;
}

TEST(SingleTapeTest, HaltImmediately) {
  const auto m = toys::HaltMachine();
  const SymbolicProgram p = BuildSingleTapeTMProgram(m);
  const std::vector<int> x = {1, 0, 1};
  const auto r = Interpret(p, p.vocab.Preprocess(x), 1);
  for (std::size_t i = 0; i < r.state.size(); ++i) {
    EXPECT_EQ(r.Get(i, "halted").num, 1);
    if (i >= 1 && i <= 3) EXPECT_EQ(r.Get(i, "symbol").num, x[i - 1]);
  }
}

TEST(SingleTapeTest, WriteOneUnderHead) {
  const SymbolicProgram p = BuildSingleTapeTMProgram(toys::WriteOneMachine());
  const auto r = Interpret(p, p.vocab.Preprocess({0, 0}), 2);
  EXPECT_EQ(r.Get(1, "head").num, 1);
  EXPECT_EQ(r.Get(1, "symbol").num, 1);
  EXPECT_EQ(r.Get(2, "symbol").num, 0);
}

TEST(SingleTapeTest, MoveRightTwice) {
  const SymbolicProgram p =
      BuildSingleTapeTMProgram(toys::MoveRightTwiceMachine());
  const auto r = Interpret(p, p.vocab.Preprocess({0, 1, 0, 1}), 2);
  for (std::size_t i = 0; i < r.state.size(); ++i)
    EXPECT_EQ(r.Get(i, "head").num, i == 2 ? 1 : 0);
}

// The emulator must reproduce the reference single-tape run layer by layer.
TEST(SingleTapeTest, MatchesReferenceRun) {
  for (const auto& [name, m] : toys::TapeMachines()) {
    const SymbolicProgram p = BuildSingleTapeTMProgram(m);
    for (int len = 0; len <= 6; ++len) {
      for (unsigned v = 0; v < (1u << len); ++v) {
        const auto x = Bits(v, len);
        for (int steps = 0; steps <= len + 3; ++steps) {
          const SingleTapeState ref = RunSingleTape(m, x, steps);
          const auto r = Interpret(p, p.vocab.Preprocess(x), steps);
          ASSERT_TRUE(r.diagnostics.empty()) << name;
          for (std::size_t i = 0; i < ref.tape.size(); ++i) {
            ASSERT_EQ(r.Get(i, "symbol").num, ref.tape[i]) << name;
            ASSERT_EQ(r.Get(i, "head").num,
                      static_cast<int>(i) == ref.head ? 1 : 0)
                << name << " steps " << steps;
            ASSERT_EQ(r.Get(i, "state").num, ref.state) << name;
            ASSERT_EQ(r.Get(i, "halted").num, ref.halted ? 1 : 0) << name;
          }
        }
      }
    }
  }
}

TEST(SingleTapeTest, RejectsOutOfRangeTables) {
  auto m = toys::BitFlipMachine();
  m.transition[0][0].state = 5;
  EXPECT_THROW(BuildSingleTapeTMProgram(m), ValidationError);
}

TEST(SingleTapeTest, HaltFreezesPositions) {
  const SymbolicProgram p =
      BuildSingleTapeTMProgram(toys::UnaryIncrementMachine());
  const auto ids = p.vocab.Preprocess({1, 1, 0, 1});
  const auto a = Interpret(p, ids, 8);
  const auto b = Interpret(p, ids, 12);
  EXPECT_EQ(a.Get(0, "halted").num, 1);
  for (std::size_t i = 0; i < a.state.size(); ++i)
    for (const char* v : {"symbol", "head", "state", "halted"})
      EXPECT_EQ(a.Get(i, v), b.Get(i, v));
}

TEST(InterpretTest, RuleOrderDoesNotMatter) {
  SymbolicProgram p = BuildSingleTapeTMProgram(toys::BinaryIncrementMachine());
  const auto ids = p.vocab.Preprocess({1, 0, 1, 1});
  const auto a = Interpret(p, ids, 9);
  std::mt19937 rng(1);
  std::shuffle(p.rules.begin(), p.rules.end(), rng);
  const auto b = Interpret(p, ids, 9);
  EXPECT_EQ(a.state, b.state);
}

std::vector<double> PrefixReadout(const ptm::Machine& tm,
                                  const ptm::ProgramBits& z,
                                  const std::vector<int>& x, int r_s,
                                  int layers) {
  const SymbolicProgram p = BuildPrefixTMProgram(tm, r_s, z);
  const auto r = Interpret(p, p.vocab.Preprocess(x), layers);
  std::vector<double> out;
  for (const auto& v : r.Outputs(p)) out.push_back(v.ToDouble());
  return out;
}

TEST(PrefixProgramTest, DecodeExamples) {
  // The echo machine writes its program to the output tape.
  const ptm::Machine echo(toys::EchoMachine());
  const auto cases = std::vector<std::pair<ptm::ProgramBits, double>>{
      {{0, 1, 1, 1, 0, 1, 0}, 1.5}, {{1, 1, 0, 0}, -1.0}, {{0, 0, 0}, 0.0}};
  for (const auto& [z, want] : cases) {
    const auto out = PrefixReadout(echo, z, {1}, 10, 20);
    EXPECT_DOUBLE_EQ(out[0], want);
  }
}

TEST(PrefixProgramTest, MatchesMachineRuns) {
  const int r_s = 12;
  const ptm::ResourceBound bound{30, r_s};
  const std::vector<std::vector<int>> probes = {
      {}, {0}, {1}, {1, 1}, {1, 0, 1}, {0, 1, 1, 0}, {1, 1, 1, 0, 1}};
  for (const auto& [name, spec] : toys::PrefixMachines()) {
    const ptm::Machine tm(spec);
    const auto progs = ptm::EnumerateHaltingPrograms(tm, bound, 6, probes);
    ASSERT_FALSE(progs.empty()) << name;
    for (const auto& prog : progs) {
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto run = ptm::Run(tm, prog.z, probes[i], bound);
        const auto out = PrefixReadout(tm, prog.z, probes[i], r_s,
                                       PrefixTMLayers(run.steps));
        ASSERT_EQ(out.size(), prog.values[i].size());
        for (std::size_t k = 0; k < out.size(); ++k)
          ASSERT_DOUBLE_EQ(out[k], prog.values[i][k].value())
              << name << " z=" << ptm::BitsToString(prog.z);
      }
    }
  }
}

TEST(JsonTest, ProgramRoundTrip) {
  const SymbolicProgram a = BuildPrefixTMProgram(
      ptm::Machine(toys::CountOnesMachine()), 8, ptm::ProgramBits{1, 0});
  const SymbolicProgram b = ProgramFromJson(ProgramToJson(a));
  EXPECT_EQ(ProgramToJson(a), ProgramToJson(b));
  const auto ids = a.vocab.Preprocess({1, 0, 1});
  EXPECT_EQ(Interpret(a, ids, 12).state, Interpret(b, ids, 12).state);
}

TEST(JsonTest, MalformedIsValidationError) {
  EXPECT_THROW(ProgramFromJson(nlohmann::json{{"variables", 3}}),
               ValidationError);
}

}  // namespace
}  // namespace mdlxf::symprog
