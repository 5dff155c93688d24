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

#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mdlxf/compile.h"
#include "mdlxf/transformer.h"
#include "mdlxf/weights_io.h"

namespace mdlxf::transformer {
namespace {

ModelConfig SmallConfig() {
  ModelConfig c;
  c.num_layers = 3;
  c.num_heads = 2;
  c.model_dim = 6;
  c.head_dim = 3;
  c.hidden_dim = 5;
  c.num_outputs = 2;
  c.vocab.num_tokens = 2;
  c.vocab.num_prompts = 2;
  return c;
}

TransformerWeights RandomWeights(const ModelConfig& c, unsigned seed,
                                 double scale = 0.5) {
  TransformerWeights w = TransformerWeights::Zeros(c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (const auto& name : TransformerWeights::ArrayNames()) {
    auto& a = w.Array(name);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  }
  return w;
}

TEST(PreprocessTest, Layouts) {
  Vocabulary v;
  v.num_tokens = 2;
  v.num_prompts = 2;
  EXPECT_EQ(v.Preprocess({0, 1}),
            (std::vector<int>{v.start(), v.prompt(0), v.prompt(1), v.sep(), 0,
                              1, v.end()}));
  EXPECT_EQ(v.Preprocess({}).size(), 5u);
  v.num_prompts = 0;
  EXPECT_EQ(v.Preprocess({1}),
            (std::vector<int>{v.start(), v.sep(), 1, v.end()}));
  EXPECT_THROW(v.Preprocess({2}), ValidationError);
}

TEST(ForwardTest, ZeroWeightsGiveUniformSoftmax) {
  const ModelConfig c = SmallConfig();
  const auto out =
      MapInput(TransformerWeights::Zeros(c), c, {1, 0, 1});
  const auto p = Softmax(out);
  EXPECT_DOUBLE_EQ(p(0), 0.5);
  EXPECT_DOUBLE_EQ(p(1), 0.5);
}

TEST(ForwardTest, SoftmaxNormalised) {
  const ModelConfig c = SmallConfig();
  for (unsigned s = 0; s < 20; ++s) {
    const auto w = RandomWeights(c, s, 1.0);
    const auto p = Softmax(MapInput(w, c, {1, 1, 0}));
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_NEAR(LogSoftmax(MapInput(w, c, {0})).array().exp().sum(), 1.0,
                1e-12);
  }
}

TEST(ForwardTest, SharedLayerIsIncremental) {
  const ModelConfig c = SmallConfig();
  const auto w = RandomWeights(c, 5);
  const auto ids = c.vocab.Preprocess({1, 0, 0, 1});
  ForwardOptions o;
  o.keep_trace = true;
  o.num_layers = 3;
  const auto a = Forward(w, c, ids, o);
  Eigen::MatrixXd x = a.trace.back();
  ApplyLayer(w, c, x, 3);
  o.num_layers = 4;
  const auto b = Forward(w, c, ids, o);
  EXPECT_EQ(x, b.trace.back());
}

TEST(ForwardTest, NonFiniteRaisesWithLayer) {
  ModelConfig c = SmallConfig();
  c.normalization = Normalization::kNone;
  auto w = RandomWeights(c, 2);
  w.w2(0, 0) = std::numeric_limits<double>::infinity();
  w.b1.setConstant(1.0);
  w.w1.setZero();
  try {
    MapInput(w, c, {1});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_EQ(e.layer(), 0);
  }
}

TEST(ForwardTest, ShapeMismatchIsValidationError) {
  ModelConfig c = SmallConfig();
  const auto w = RandomWeights(c, 1);
  c.hidden_dim = 7;
  EXPECT_THROW(CheckShapes(w, c), ValidationError);
}

TEST(PruneTest, PrunedPaddedParityIsIdentical) {
  compile::CompilerOptions o;
  o.target = compile::TargetDims{128, 512, 2, 64};
  const auto m = compile::Compile(symprog::BuildParityProgram(5), o);
  TransformerWeights w = m.weights;
  ModelConfig c = m.config;
  PruneDeadDimensions(w, c);
  EXPECT_LT(c.model_dim, 20);
  EXPECT_LT(c.hidden_dim, 20);
  for (unsigned v = 0; v < 128; ++v) {
    std::vector<int> x(7);
    for (int i = 0; i < 7; ++i) x[i] = (v >> i) & 1;
    const auto a = MapInput(m.weights, m.config, x, 9);
    const auto b = MapInput(w, c, x, 9);
    ASSERT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(WeightsIoTest, RoundTrip) {
  const ModelConfig c = SmallConfig();
  const auto w = RandomWeights(c, 9);
  const std::string path = testing::TempDir() + "/w.bin";
  weights_io::Save(path, w, c, {{"note", "x"}});
  const auto back = weights_io::Load(path);
  for (const auto& name : TransformerWeights::ArrayNames())
    EXPECT_EQ(w.Array(name), back.weights.Array(name)) << name;
  EXPECT_EQ(back.config.model_dim, c.model_dim);
  EXPECT_EQ(back.extra["note"], "x");
}

TEST(WeightsIoTest, RejectsGarbage) {
  const std::string path = testing::TempDir() + "/junk.bin";
  {
    std::ofstream os(path);
    os << "not weights";
  }
  EXPECT_THROW(weights_io::Load(path), FormatError);
}

}  // namespace
}  // namespace mdlxf::transformer
