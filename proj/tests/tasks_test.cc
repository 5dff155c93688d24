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

#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "mdlxf/tasks.h"

namespace mdlxf::tasks {
namespace {

int Popcount(const std::vector<int>& bits) {
  int n = 0;
  for (int b : bits) n += b == 1;
  return n;
}

TEST(ParityTest, Labels) {
  EXPECT_EQ(ParityLabel({1, 0, 1, 1}), 1);
  EXPECT_EQ(ParityLabel({}), 0);
}

TEST(ParityTest, TrainSplitShape) {
  const auto ds = GenParity(1, 20, 100000, 1);
  ASSERT_EQ(ds.size(), 100000u);
  std::map<int, std::map<int, int>> hist;
  for (const auto& e : ds) {
    ASSERT_GE(e.bits.size(), 1u);
    ASSERT_LE(e.bits.size(), 20u);
    ASSERT_EQ(e.label, Popcount(e.bits) % 2);
    ++hist[static_cast<int>(e.bits.size())][Popcount(e.bits)];
  }
  for (const auto& [len, counts] : hist) {
    ASSERT_EQ(static_cast<int>(counts.size()), len + 1) << len;
    const double mean = 5000.0 / (len + 1);
    for (const auto& [k, c] : counts) EXPECT_NEAR(c, mean, 0.1 * mean + 1) << len;
  }
}

TEST(ParityTest, DeterministicUnderSeed) {
  const auto a = GenParityPerLength(21, 40, 50, 3);
  const auto b = GenParityPerLength(21, 40, 50, 3);
  const auto c = GenParityPerLength(21, 40, 50, 4);
  ASSERT_EQ(a.size(), 1000u);
  bool same_c = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].bits, b[i].bits);
    same_c &= a[i].bits == c[i].bits;
  }
  EXPECT_FALSE(same_c);
}

TEST(ParityTest, TextRoundTrip) {
  const auto ds = GenParity(1, 6, 40, 5);
  std::stringstream s;
  WriteParity(s, ds);
  const auto back = ReadParity(s);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back[i].bits, ds[i].bits);
    EXPECT_EQ(back[i].label, ds[i].label);
  }
  std::stringstream bad("01x\t1\n");
  EXPECT_THROW(ReadParity(bad), FormatError);
}

TEST(IdentityTest, Dataset) {
  const auto ds = GenIdentity();
  EXPECT_EQ(ds.inputs.size(), 2048u);
  std::set<int> seen;
  for (const auto& x : ds.inputs) {
    int v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<int>(x(i)) << i;
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 16u);
  EXPECT_EQ(ds.inputs[0], Bits4::Zero());
  // A uniform minibatch of 128 holds 128/16 = 8 copies of each vector in
  // expectation.
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> u(0, ds.inputs.size() - 1);
  std::vector<int> count(16);
  const int batches = 2000;
  for (int b = 0; b < batches * 128; ++b) {
    const auto& x = ds.inputs[u(rng)];
    int v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<int>(x(i)) << i;
    ++count[v];
  }
  for (int c : count) EXPECT_NEAR(c / static_cast<double>(batches), 8.0, 0.2);
}

TEST(MlpTest, ManualWeightsExamples) {
  const auto w = MlpManualWeights();
  const Eigen::VectorXd h = w.w1 * Bits4(1, 0, 0, 0).transpose() + w.b1;
  EXPECT_EQ(h(0), 10.0);
  for (int i = 1; i < 16; ++i) EXPECT_EQ(h(i), -10.0);
  const Bits4 p = MlpForward(w, Bits4(1, 0, 0, 0));
  EXPECT_NEAR(p(0), 1.0, 1e-12);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(p(i), 4.54e-5, 1e-7);
  const Bits4 z = MlpForward(w, Bits4::Zero());
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(z(i), Sigmoid(-10.0), 1e-15);
  EXPECT_EQ(w.w2, w.w1.transpose());
}

TEST(MlpTest, ManualWeightsSolveTheTask) {
  const auto e = EvaluateMlp(MlpManualWeights(), GenIdentity(1));
  EXPECT_EQ(e.accuracy, 1.0);
  EXPECT_LT(e.nll_bits / 16, 0.01);
}

TEST(MlpTest, BinaryCrossEntropy) {
  EXPECT_EQ(BceNllBits(Bits4(1, 1, 1, 1), Bits4(1, 1, 1, 1)), 0.0);
  EXPECT_NEAR(BceNllBits(Bits4::Constant(0.5), Bits4(1, 0, 1, 0)), 4.0, 1e-12);
}

TEST(MlpTest, FlattenRoundTrip) {
  const auto w = RandomMlpWeights(3);
  const auto back = UnflattenMlp(FlattenMlp(w));
  for (const auto& n : MlpWeights::ArrayNames()) EXPECT_EQ(back.Array(n), w.Array(n));
}

TEST(MlpTest, ManualBundle) {
  const auto b = MlpManualBundle();
  EXPECT_EQ(b.size(), 148u);
  ASSERT_EQ(b.prior.size(), 1u);
  EXPECT_EQ(b.prior[0].K(), 3);
  const auto kl = codes::MonteCarloKl(b, 10, 1);
  EXPECT_NEAR(kl.bits, 148 * std::log2(3.0), 1e-6);
}

TEST(RandomInitTest, Transformer) {
  RandomModelConfig rc;
  rc.model_dim = 100;
  rc.hidden_dim = 50;
  rc.num_prompts = 3;
  const auto c = MakeParityConfig(rc);
  const auto w = RandomTransformerWeights(c, 7);
  EXPECT_EQ(w.b1, Eigen::MatrixXd::Zero(1, 50));
  EXPECT_EQ(w.b2, Eigen::MatrixXd::Zero(1, 100));
  EXPECT_EQ(w.bout, Eigen::MatrixXd::Zero(1, 2));
  const double var = w.wq.array().square().mean();  // 10^4 draws
  EXPECT_NEAR(var, 2.0 / 100, 0.1 * 2.0 / 100);
  const double var2 = w.w2.array().square().mean();
  EXPECT_NEAR(var2, 2.0 / 50, 0.1 * 2.0 / 50);

  const auto b = RandomTransformerBundle(c, 7);
  for (const auto& q : b.posterior) {
    ASSERT_EQ(q.K(), 1);
    EXPECT_EQ(q.nu[0], -10.0);
  }
  for (const auto& p : b.prior) {
    EXPECT_EQ(p.K(), 3);
    EXPECT_EQ(p.w, std::vector<double>(3, 0.0));
    EXPECT_EQ(p.nu, std::vector<double>(3, 1.0));
  }
  EXPECT_EQ(b.Means(), codes::Flatten(w));
}

TEST(RandomInitTest, Mlp) {
  const auto w = RandomMlpWeights(1);
  EXPECT_EQ(w.b1, Eigen::MatrixXd::Zero(16, 1));
  EXPECT_EQ(w.b2, Eigen::MatrixXd::Zero(4, 1));
  const auto b = RandomMlpBundle(1);
  EXPECT_EQ(b.Means(), FlattenMlp(w));
  EXPECT_EQ(b.prior.size(), 1u);
}

class ManualParityTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { manual_ = new ManualParity(ManualParityBundle()); }
  static void TearDownTestSuite() { delete manual_; }
  static ManualParity* manual_;
};
ManualParity* ManualParityTest::manual_ = nullptr;

TEST_F(ManualParityTest, ShapesAndKl) {
  const auto& m = *manual_;
  EXPECT_EQ(m.config.model_dim, 128);
  EXPECT_EQ(m.config.hidden_dim, 512);
  EXPECT_EQ(m.config.num_heads, 2);
  EXPECT_EQ(m.config.num_layers, 42);
  EXPECT_EQ(m.config.vocab.num_prompts, 20);
  const double kl = codes::MonteCarloKl(m.bundle, 4, 1).bits;
  EXPECT_GT(kl, 1000);
  EXPECT_LT(kl, 4000);
}

TEST_F(ManualParityTest, PrunedModelMatchesPadded) {
  const auto& m = *manual_;
  std::mt19937_64 rng(3);
  for (int t = 0; t < 3; ++t) {
    std::vector<int> x(25 + t * 7);
    for (int& b : x) b = static_cast<int>(rng() & 1);
    const auto a = transformer::MapInput(m.weights, m.config, x);
    const auto b = transformer::MapInput(m.pruned_weights, m.pruned_config, x);
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST_F(ManualParityTest, PerfectOnTrainAndOodSamples) {
  const auto& m = *manual_;
  const auto train = GenParity(1, 20, 2000, 11);
  const auto ood = GenParityPerLength(21, 40, 50, 12);
  const auto et = EvaluateParity(m.pruned_weights, m.pruned_config, train);
  const auto eo = EvaluateParity(m.pruned_weights, m.pruned_config, ood);
  EXPECT_EQ(et.accuracy, 1.0);
  EXPECT_EQ(eo.accuracy, 1.0);
  EXPECT_LT(et.nll_bits / train.size(), 0.01);
}

TEST_F(ManualParityTest, PosteriorSamplesKeepPredictions) {
  const auto& m = *manual_;
  const auto ood = GenParityPerLength(21, 40, 1, 13);
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0, 1);
  Eigen::VectorXd flat = m.bundle.Means();
  for (Eigen::Index i = 0; i < flat.size(); ++i)
    flat(i) += std::sqrt(m.bundle.posterior[i].Variance(0)) * n(rng);
  const auto noisy = codes::Unflatten(flat, m.config);
  EXPECT_EQ(EvaluateParity(noisy, m.config, ood).accuracy, 1.0);
}

}  // namespace
}  // namespace mdlxf::tasks
