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

#include <random>

#include <gtest/gtest.h>

#include "mdlxf/compile.h"
#include "mdlxf/toys.h"
#include "mdlxf/transformer.h"

namespace mdlxf::compile {
namespace {

using symprog::Interpret;
using symprog::SymbolicProgram;
using transformer::Forward;
using transformer::ForwardOptions;

std::vector<int> Bits(unsigned v, int len) {
  std::vector<int> x(len);
  for (int i = 0; i < len; ++i) x[i] = (v >> i) & 1;
  return x;
}

// Largest deviation between compiled logits and the interpreter's exact
// readout over every position. Also checks argmax agreement.
double Deviation(const SymbolicProgram& p, const CompiledModel& m,
                 const std::vector<int>& x, int layers,
                 const CompilerOptions& o, bool all_positions) {
  const auto ids = p.vocab.Preprocess(x);
  ForwardOptions fo;
  fo.num_layers = layers;
  const auto fwd = Forward(m.weights, m.config, ids, fo);
  const auto ref = Interpret(p, ids, layers);
  double dev = 0;
  const int sep = p.vocab.ReadoutPosition();
  for (std::size_t pos = 0; pos < ids.size(); ++pos) {
    if (!all_positions && static_cast<int>(pos) != sep) continue;
    std::vector<symprog::Value> vals;
    for (const auto& name : p.outputs) vals.push_back(ref.Get(pos, name));
    const Eigen::VectorXd want = ExactReadout(p, vals, o);
    const Eigen::VectorXd got = fwd.position_logits.row(pos).transpose();
    Eigen::Index a, b;
    want.maxCoeff(&a);
    got.maxCoeff(&b);
    if (want.size() > 1) EXPECT_EQ(a, b) << "position " << pos;
    dev = std::max(dev, (want - got).cwiseAbs().maxCoeff());
  }
  return dev;
}

TEST(CompileTest, ParityMatchesInterpreter) {
  const SymbolicProgram p = symprog::BuildParityProgram();
  const CompilerOptions o;
  const CompiledModel m = Compile(p, o);
  for (int len = 0; len <= 8; ++len)
    for (unsigned v = 0; v < (1u << len); ++v)
      ASSERT_LT(Deviation(p, m, Bits(v, len), len + 2, o, false), 1e-4);
}

TEST(CompileTest, ParityRuleUnitsAndShape) {
  const CompiledModel m = Compile(symprog::BuildParityProgram());
  EXPECT_EQ(m.config.model_dim, 11);
  EXPECT_EQ(m.config.num_heads, 2);
  EXPECT_EQ(m.rule_units, 8);
}

TEST(CompileTest, CopyProgramSingleUnit) {
  const SymbolicProgram p = symprog::BuildCopyProgram();
  CompilerOptions o;
  o.normalization = Normalization::kNone;
  const CompiledModel m = Compile(p, o);
  EXPECT_EQ(m.config.hidden_dim, 1);
  for (int len = 0; len <= 6; ++len)
    for (unsigned v = 0; v < (1u << len); ++v)
      ASSERT_LT(Deviation(p, m, Bits(v, len), 1, o, true), 1e-9);
}

TEST(CompileTest, TanhRejectsBinaryVariables) {
  EXPECT_THROW(Compile(symprog::BuildCopyProgram()), CompileError);
}

TEST(CompileTest, InvalidProgramIsCompileError) {
  SymbolicProgram p = symprog::BuildParityProgram();
  p.outputs = {"missing"};
  EXPECT_THROW(Compile(p), CompileError);
}

TEST(CompileTest, SingleTapeEmulatorsMatchInterpreter) {
  const CompilerOptions o;
  for (const auto& [name, machine] : toys::TapeMachines()) {
    const SymbolicProgram p = symprog::BuildSingleTapeTMProgram(machine);
    const CompiledModel m = Compile(p, o);
    for (int len = 0; len <= 5; ++len)
      for (unsigned v = 0; v < (1u << len); ++v)
        ASSERT_LT(Deviation(p, m, Bits(v, len), len + 3, o, true), 1e-4)
            << name;
  }
}

TEST(PadTest, PaddingPreservesFunction) {
  const SymbolicProgram p = symprog::BuildParityProgram(4);
  const CompiledModel m = Compile(p);
  CompiledModel big = m;
  Pad(big.weights, big.config, {128, 512, 2, 64});
  EXPECT_EQ(big.config.model_dim, 128);
  EXPECT_EQ(big.config.hidden_dim, 512);
  for (unsigned v = 0; v < 64; ++v) {
    const auto ids = p.vocab.Preprocess(Bits(v, 6));
    ForwardOptions fo;
    fo.num_layers = 8;
    const auto a = Forward(m.weights, m.config, ids, fo).readout;
    const auto b = Forward(big.weights, big.config, ids, fo).readout;
    ASSERT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
  CompiledModel same = m;
  Pad(same.weights, same.config, {});
  EXPECT_EQ(same.config.model_dim, m.config.model_dim);
  EXPECT_THROW(Pad(same.weights, same.config, {4, 0, 0, 0}), CompileError);
}

TEST(PadTest, TargetInOptions) {
  CompilerOptions o;
  o.target = TargetDims{64, 32, 3, 4};
  const CompiledModel m = Compile(symprog::BuildParityProgram(), o);
  EXPECT_EQ(m.config.model_dim, 64);
  EXPECT_EQ(m.config.num_heads, 3);
}

TEST(PromptRowsTest, Examples) {
  const Eigen::MatrixXd r = PromptEmbeddingRows({1, 0}, 4);
  EXPECT_EQ(r.rows(), 4);
  EXPECT_EQ(r(0, 0), 1.0);
  EXPECT_EQ(r(1, 0), -1.0);
  EXPECT_EQ(r(2, 0), 0.0);
  EXPECT_EQ(r(3, 0), 0.0);
  EXPECT_TRUE(PromptEmbeddingRows({}, 3).col(0).isZero());
  Eigen::RowVectorXd tail(3);
  tail << 0.5, -2, 7;
  const Eigen::MatrixXd t = PromptEmbeddingRows({1, 1, 0}, 6, tail);
  for (int i = 1; i < 6; ++i)
    EXPECT_EQ(t.row(i).tail(3), t.row(0).tail(3));
  EXPECT_THROW(PromptEmbeddingRows({1, 1, 1}, 2), ValidationError);
}

double ZmapReadout(const ptm::Machine& tm, const ptm::ResourceBound& b,
                   const ptm::ProgramBits& z, const std::vector<int>& x) {
  const CompiledModel m = Zmap(tm, b, z);
  return transformer::MapInput(m.weights, m.config, x)(0);
}

TEST(ZmapTest, ConstantMachine) {
  const ptm::Machine tm(toys::ConstantMachine());
  for (const auto& z : std::vector<ptm::ProgramBits>{{}, {1}, {0, 1, 1}})
    for (const auto& x : std::vector<std::vector<int>>{{}, {1}, {0, 1, 0}})
      EXPECT_NEAR(ZmapReadout(tm, {6, 4}, z, x), 1.0, 1e-4);
}

TEST(ZmapTest, SignBitFlipsReadout) {
  const ptm::Machine tm(toys::SignBitMachine());
  EXPECT_NEAR(ZmapReadout(tm, {6, 4}, {1}, {0, 1}), -1.0, 1e-4);
  EXPECT_NEAR(ZmapReadout(tm, {6, 4}, {0}, {0, 1}), 1.0, 1e-4);
}

TEST(ZmapTest, PromptRowsDependOnlyOnColumnZero) {
  const ptm::Machine tm(toys::EchoMachine());
  const CompiledModel a = Zmap(tm, {20, 10}, {0, 1, 0, 0});
  const CompiledModel b = Zmap(tm, {20, 10}, {1, 1, 1, 0, 1, 0});
  for (const auto& name : transformer::TransformerWeights::ArrayNames()) {
    if (name == "prompt") continue;
    EXPECT_EQ(a.weights.Array(name), b.weights.Array(name)) << name;
  }
  EXPECT_EQ(a.weights.prompt.rightCols(a.config.model_dim - 1),
            b.weights.prompt.rightCols(b.config.model_dim - 1));
  for (int i = 1; i < 10; ++i)
    EXPECT_EQ(a.weights.prompt.row(i).tail(a.config.model_dim - 1),
              a.weights.prompt.row(0).tail(a.config.model_dim - 1));
}

TEST(ZmapTest, WeightCountInvariantInBounds) {
  const ptm::Machine tm(toys::CountOnesMachine());
  const CompiledModel a = Zmap(tm, {10, 6}, {1, 0});
  const CompiledModel b = Zmap(tm, {30, 24}, {1, 0});
  EXPECT_EQ(a.weights.NumWeights() - a.weights.prompt.size(),
            b.weights.NumWeights() - b.weights.prompt.size());
  EXPECT_EQ(a.weights.prompt.rows(), 6);
  EXPECT_EQ(b.weights.prompt.rows(), 24);
  EXPECT_EQ(b.config.num_layers, 32);
}

TEST(ZmapTest, ProgramLongerThanBoundFails) {
  const ptm::Machine tm(toys::EchoMachine());
  EXPECT_THROW(Zmap(tm, {10, 2}, {0, 1, 0}), ValidationError);
}

TEST(ZmapTest, MatchesMachineAndInterpreter) {
  const ptm::ResourceBound bound{24, 10};
  const std::vector<std::vector<int>> probes = {{}, {1}, {0, 1}, {1, 1, 0}};
  for (const auto& [name, spec] : toys::PrefixMachines()) {
    const ptm::Machine tm(spec);
    const auto progs = ptm::EnumerateHaltingPrograms(tm, bound, 5, probes);
    for (std::size_t k = 0; k < std::min<std::size_t>(progs.size(), 4); ++k) {
      const auto& prog = progs[k];
      const CompiledModel m = Zmap(tm, bound, prog.z);
      const SymbolicProgram sp = symprog::BuildPrefixTMProgram(tm, bound.r_s,
                                                               prog.z);
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const double got =
            transformer::MapInput(m.weights, m.config, probes[i])(0);
        EXPECT_NEAR(got, prog.values[i][0].value(), 1e-4)
            << name << " z=" << ptm::BitsToString(prog.z);
        const auto ref = Interpret(sp, sp.vocab.Preprocess(probes[i]),
                                   m.config.num_layers);
        EXPECT_NEAR(got, ref.Outputs(sp)[0].ToDouble(), 1e-4);
      }
    }
  }
}

TEST(RobustnessTest, UniformNoiseKeepsParityArgmax) {
  const SymbolicProgram p = symprog::BuildParityProgram();
  CompiledModel m = Compile(p);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (const auto& name : transformer::TransformerWeights::ArrayNames()) {
    auto& a = m.weights.Array(name);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] += u(rng);
  }
  for (int len = 1; len <= 8; ++len) {
    for (unsigned v = 0; v < (1u << len); ++v) {
      const auto out = transformer::MapInput(m.weights, m.config, Bits(v, len),
                                             len + 2);
      Eigen::Index arg;
      out.maxCoeff(&arg);
      ASSERT_EQ(arg, __builtin_popcount(v) % 2);
    }
  }
}

}  // namespace
}  // namespace mdlxf::compile
