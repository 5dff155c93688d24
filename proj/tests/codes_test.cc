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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mdlxf/codes.h"
#include "mdlxf/compile.h"
#include "mdlxf/toys.h"

namespace mdlxf::codes {
namespace {

const double kUnitNu = std::log(std::expm1(1.0));  // softplus(nu) = 1

TEST(GmmTest, StandardNormalAtZero) {
  EXPECT_NEAR(GmmLogPdf(GMMParams::Gaussian(0, kUnitNu), 0.0),
              std::log(0.3989422804014327), 1e-12);
}

TEST(GmmTest, SymmetricEqualMix) {
  const auto p = GMMParams::EqualMix({-1, 1}, -2.0);
  EXPECT_NEAR(GmmLogPdf(p, 1e-9), GmmLogPdf(p, -1e-9), 1e-12);
  EXPECT_NEAR(GmmLogPdf(p, 0.3), GmmLogPdf(p, -0.3), 1e-12);
}

TEST(GmmTest, WeightedSumMatchesDirectSum) {
  GMMParams p{{-0.5, 2.0}, {0.1, -1.0}, {std::log(0.25), std::log(0.75)}};
  for (double x : {-3.0, -0.5, 0.0, 1.7, 4.0}) {
    const double direct =
        0.25 * std::exp(GaussianLogPdf(x, -0.5, p.Variance(0))) +
        0.75 * std::exp(GaussianLogPdf(x, 2.0, p.Variance(1)));
    EXPECT_NEAR(GmmLogPdf(p, x), std::log(direct), 1e-12);
  }
}

TEST(GaussianKlTest, Examples) {
  EXPECT_DOUBLE_EQ(StandardNormalKl(0, 1), 0.0);
  EXPECT_NEAR(StandardNormalKl(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(NatsToBits(StandardNormalKl(1, 1)), 0.7213, 1e-4);
  EXPECT_NEAR(StandardNormalKl(0, 0.25), 0.5 * (0.25 - 1 - std::log(0.25)),
              1e-15);
  EXPECT_NEAR(StandardNormalKl(0, 0.25), 0.3181, 1e-4);
}

TEST(GaussianKlTest, GeneralFormMatchesStandardizedOnRandomCases) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3), v(0.01, 4);
  for (int i = 0; i < 100; ++i) {
    const double mu = u(rng), var = v(rng), mu0 = u(rng), var0 = v(rng);
    const double sd0 = std::sqrt(var0);
    const double standardized = StandardNormalKl((mu - mu0) / sd0, var / var0);
    EXPECT_NEAR(GaussianKl(mu, var, mu0, var0), standardized, 1e-12);
    EXPECT_GE(GaussianKl(mu, var, mu0, var0), 0.0);
  }
}

DistributionBundle OneGroupBundle(std::vector<GMMParams> post, GMMParams prior) {
  DistributionBundle b;
  b.blocks = {{"w", 1, static_cast<int>(post.size())}};
  b.group.assign(post.size(), 0);
  b.group_names = {"w"};
  b.prior = {std::move(prior)};
  b.posterior = std::move(post);
  return b;
}

TEST(MonteCarloKlTest, PosteriorEqualsPriorIsZero) {
  const auto prior = GMMParams::EqualMix({-1, 1}, -3);
  const auto b = OneGroupBundle({prior, prior, prior}, prior);
  const auto e = MonteCarloKl(b, 100, 1);
  EXPECT_EQ(e.bits, 0.0);
  // Forcing the MC branch with a copy that differs only in storage.
  GMMParams q = prior;
  q.w = {1e-300, 0.0};
  const auto m = WeightKl(q, prior, 2000, 3);
  EXPECT_LE(std::abs(m.bits), 3 * m.stderr_bits + 1e-12);
}

TEST(MonteCarloKlTest, BitTransmissionCostsOneBit) {
  const auto prior = GMMParams::EqualMix({-1, 1}, -10);
  const auto e = WeightKl(GMMParams::Gaussian(1, -10), prior, 1000, 5);
  EXPECT_NEAR(e.bits, 1.0, 0.02);
  EXPECT_LE(std::abs(e.bits - 1.0), 3 * e.stderr_bits + 1e-9);
}

TEST(MonteCarloKlTest, MatchesClosedFormWithinThreeStderr) {
  // A 2-component prior whose components coincide is N(0,1), but it routes
  // the estimate through the sampling branch.
  GMMParams prior{{0, 0}, {kUnitNu, kUnitNu}, {0, 0}};
  const auto e = WeightKl(GMMParams::Gaussian(1, kUnitNu), prior, 100000, 11);
  EXPECT_NEAR(e.bits, 0.7213475204444817, 3 * e.stderr_bits);
  EXPECT_GT(e.stderr_bits, 0.0);
}

TEST(MonteCarloKlTest, FactorizesAcrossWeights) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  const GMMParams prior{{-1, 0.5}, {-1, 0}, {0.2, -0.3}};
  std::vector<GMMParams> post;
  for (int i = 0; i < 40; ++i) {
    if (i % 2)
      post.push_back(GMMParams::Gaussian(n(rng), -2 + n(rng)));
    else
      post.push_back({{n(rng), n(rng)}, {-2, -1}, {n(rng), 0}});
  }
  const auto b = OneGroupBundle(post, prior);
  const auto total = MonteCarloKl(b, 20000, 9);
  double sum = 0, var = 0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    const auto e = WeightKl(post[i], prior, 20000, 100 + i);
    sum += e.bits;
    var += e.stderr_bits * e.stderr_bits;
  }
  const double tol =
      3 * std::sqrt(var + total.stderr_bits * total.stderr_bits);
  EXPECT_NEAR(total.bits, sum, tol);
}

TEST(MonteCarloKlTest, ReproducibleUnderSeed) {
  const GMMParams prior = GMMParams::EqualMix({-1, 1}, -1);
  std::vector<GMMParams> post(5000, GMMParams{{0.3, -0.2}, {-2, -2}, {0, 1}});
  const auto b = OneGroupBundle(post, prior);
  EXPECT_EQ(MonteCarloKl(b, 8, 42).bits, MonteCarloKl(b, 8, 42).bits);
  EXPECT_NE(MonteCarloKl(b, 8, 42).bits, MonteCarloKl(b, 8, 43).bits);
}

TEST(CodelengthTest, Sums) {
  EXPECT_EQ(TwoPartCodelength(3, 5), 8);
  EXPECT_EQ(TwoPartCodelength(0, 12.5), 12.5);
  EXPECT_EQ(VariationalCodelength(0, 7), 7);
  EXPECT_EQ(AdaptiveVariationalCodelength(0, 4, 7), VariationalCodelength(4, 7));
  EXPECT_EQ(AdaptiveVariationalCodelength(96, 0, 0), 96);
  const auto r = MakeReport(96, {10, 0.5, 100, 1}, 3, 1.0, std::nullopt);
  EXPECT_EQ(r.total_bits, 109);
  EXPECT_EQ(r.variational_bits(), 13);
  EXPECT_TRUE(r.ToJson()["ood_acc"].is_null());
}

TEST(OptimalPriorTest, Examples) {
  const auto half = OptimalMixturePrior({{0.5, 0.5, 0.5, 0.5, -2, -2, -2, -2}},
                                        8, -10);
  EXPECT_NEAR(half.kl_bits, 8.0, 1e-12);
  ASSERT_EQ(half.priors[0].K(), 2);
  EXPECT_NEAR(half.priors[0].Mixing()[0], 0.5, 1e-12);
  EXPECT_EQ(OptimalMixturePrior({{1.5, 1.5, 1.5}}, 8, -10).kl_bits, 0.0);
  EXPECT_THROW(OptimalMixturePrior({{1, 2}, {1, 2, 3}}, 2, -10),
               ValidationError);
}

// Random grouping with values drawn from a small alphabet.
std::vector<std::vector<double>> RandomGroups(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ng(1, 4), size(1, 60), sym(0, 5);
  std::vector<std::vector<double>> groups(ng(rng));
  for (auto& g : groups) {
    const int n = size(rng);
    for (int i = 0; i < n; ++i) g.push_back(0.25 * sym(rng) - 0.5);
  }
  return groups;
}

double EntropyOracle(const std::vector<std::vector<double>>& groups) {
  double bits = 0;
  for (const auto& g : groups)
    for (double v : g) {
      const double c = static_cast<double>(std::count(g.begin(), g.end(), v));
      bits -= std::log2(c / g.size());
    }
  return bits;
}

TEST(OptimalPriorTest, ExactEntropyOnRandomGroupings) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const auto groups = RandomGroups(rng);
    EXPECT_NEAR(OptimalMixturePrior(groups, 8, -10).kl_bits,
                EntropyOracle(groups), 1e-9);
  }
}

TEST(OptimalPriorTest, RandomMixingNeverBeatsEntropy) {
  std::mt19937_64 rng(17);
  const auto groups = RandomGroups(rng);
  const auto best = OptimalMixturePrior(groups, 8, -30);
  std::normal_distribution<double> n(0, 2);
  for (int restart = 0; restart < 1000; ++restart) {
    double bits = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      GMMParams p = best.priors[g];
      for (double& w : p.w) w += n(rng);
      const auto pi = p.Mixing();
      for (double v : groups[g])
        for (int k = 0; k < p.K(); ++k)
          if (p.mu[k] == v) bits -= std::log2(pi[k]);
    }
    EXPECT_GE(bits, best.kl_bits - 1e-3);
  }
}

TEST(EquivalenceTest, DeltaVariationalEqualsTwoPart) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 10; ++t) {
    const auto groups = RandomGroups(rng);
    const auto prior = OptimalMixturePrior(groups, 8, -30);
    DistributionBundle b;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      b.group_names.push_back("g" + std::to_string(g));
      for (double v : groups[g]) {
        b.group.push_back(static_cast<int>(g));
        b.posterior.push_back(GMMParams::Gaussian(v, -30));
      }
    }
    b.blocks = {{"w", 1, static_cast<int>(b.group.size())}};
    b.prior = prior.priors;
    // Two-part: -log2 alpha(h) under the discrete prior with the same mixing.
    double two_part_prior = 0;
    for (std::size_t i = 0; i < b.group.size(); ++i) {
      const auto& p = b.prior[b.group[i]];
      const auto pi = p.Mixing();
      for (int k = 0; k < p.K(); ++k)
        if (p.mu[k] == b.posterior[i].mu[0]) two_part_prior -= std::log2(pi[k]);
    }
    const double nll = 17.25;
    const auto kl = MonteCarloKl(b, 16, 5);
    EXPECT_NEAR(VariationalCodelength(kl.bits, nll),
                TwoPartCodelength(two_part_prior, nll), 1e-6);
  }
}

TEST(BundleTest, GroupingAndFlattenRoundTrip) {
  const auto p = symprog::BuildParityProgram();
  const auto m = compile::Compile(p);
  const auto g = GroupTransformer(m.config);
  std::size_t prompt_groups = 0;
  for (const auto& n : g.group_names) prompt_groups += n.rfind("prompt", 0) == 0;
  EXPECT_EQ(prompt_groups, static_cast<std::size_t>(m.config.model_dim));
  EXPECT_EQ(g.group.size(), m.weights.NumWeights());
  const auto back = Unflatten(Flatten(m.weights), m.config);
  for (const auto& name : transformer::TransformerWeights::ArrayNames())
    EXPECT_EQ(back.Array(name), m.weights.Array(name)) << name;
}

TEST(BundleTest, JsonRoundTrip) {
  const auto m = compile::Compile(symprog::BuildParityProgram());
  const auto b = DeltaPosteriorBundle(m.weights, m.config, {});
  const auto c = BundleFromJson(nlohmann::json::parse(BundleToJson(b).dump()));
  EXPECT_EQ(c.group, b.group);
  EXPECT_EQ(c.posterior, b.posterior);
  EXPECT_EQ(c.prior, b.prior);
  EXPECT_EQ(c.PriorCostBits(), b.PriorCostBits());
  EXPECT_THROW(BundleFromJson(nlohmann::json::object()), ValidationError);
}

TEST(BundleTest, DeltaBundleKlMatchesEntropy) {
  const auto m = compile::Compile(symprog::BuildParityProgram());
  const auto b = DeltaPosteriorBundle(m.weights, m.config, {});
  const Eigen::VectorXd flat = Flatten(m.weights);
  std::vector<std::vector<double>> groups(b.group_names.size());
  for (std::size_t i = 0; i < b.group.size(); ++i)
    groups[b.group[i]].push_back(flat(static_cast<Eigen::Index>(i)));
  const auto kl = MonteCarloKl(b, 4, 1);
  EXPECT_NEAR(kl.bits, EntropyOracle(groups), 1e-3);
  EXPECT_EQ(b.Means(), flat);
}

double PromptColumnZeroKl(const DistributionBundle& b) {
  DistributionBundle col = b;
  col.posterior.clear();
  col.group.clear();
  int c0 = 0;
  while (b.group_names[c0] != "prompt.col0") ++c0;
  for (std::size_t i = 0; i < b.group.size(); ++i)
    if (b.group[i] == c0) {
      col.posterior.push_back(b.posterior[i]);
      col.group.push_back(c0);
    }
  col.blocks = {{"prompt.col0", 1, static_cast<int>(col.group.size())}};
  return MonteCarloKl(col, 8, 3).bits;
}

TEST(BundleTest, RademacherTailCostsOneBitPerProgramBit) {
  const ptm::Machine tm(toys::EchoMachine());
  const ptm::ProgramBits z = {0, 1, 1, 0, 1};
  const auto m = compile::Zmap(tm, {40, 20}, z);
  DeltaBundleOptions o;
  o.tail = RademacherTail{5};
  const auto b = DeltaPosteriorBundle(m.weights, m.config, o);
  EXPECT_NEAR(PromptColumnZeroKl(b), 5.0, 1e-9);

  const ptm::ProgramBits full = {1, 0, 1, 1};
  const auto mf = compile::Zmap(tm, {20, 4}, full);
  o.tail = RademacherTail{4};
  EXPECT_NEAR(PromptColumnZeroKl(DeltaPosteriorBundle(mf.weights, mf.config, o)),
              4.0, 1e-9);
}

TEST(BundleTest, PosteriorSampleKeepsParityPredictions) {
  const auto p = symprog::BuildParityProgram();
  const auto m = compile::Compile(p);
  const auto b = DeltaPosteriorBundle(m.weights, m.config, {});
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0, 1);
  Eigen::VectorXd sample = b.Means();
  for (Eigen::Index i = 0; i < sample.size(); ++i)
    sample(i) += std::sqrt(b.posterior[i].Variance(0)) * n(rng);
  const auto noisy = Unflatten(sample, m.config);
  for (unsigned v = 0; v < 256; ++v) {
    std::vector<int> x(8);
    for (int i = 0; i < 8; ++i) x[i] = (v >> i) & 1;
    Eigen::Index a, c;
    transformer::MapInput(m.weights, m.config, x).maxCoeff(&a);
    transformer::MapInput(noisy, m.config, x).maxCoeff(&c);
    EXPECT_EQ(a, c);
  }
}

TEST(FrontierTest, UnimodalNeedsMoreThanOneBit) {
  FrontierGrid g;
  g.mu_max = 4;
  for (const auto& p : FrontierSweep(false, g))
    if (p.probability >= 0.99) EXPECT_GT(p.kl_bits, 1.0);
  EXPECT_GT(UnimodalFrontierBits(0.99), 1.0);
  EXPECT_NEAR(UnimodalFrontierBits(0.5), 0.0, 1e-9);
}

TEST(FrontierTest, MultimodalReachesOneBit) {
  FrontierGrid g;
  g.mu_min = 0.9;
  g.mu_max = 1.1;
  g.mu_steps = 5;
  g.log10_var_min = -5;
  g.log10_var_max = -3;
  g.var_steps = 5;
  bool hit = false;
  for (const auto& p : FrontierSweep(true, g))
    hit |= p.probability >= 0.999 && p.kl_bits <= 1.05;
  EXPECT_TRUE(hit);
  const auto env = FrontierEnvelope(FrontierSweep(true, g));
  for (std::size_t i = 1; i < env.size(); ++i) {
    EXPECT_GE(env[i].probability, env[i - 1].probability);
    EXPECT_GE(env[i].kl_bits, env[i - 1].kl_bits);
  }
}

TEST(FrontierTest, QuadratureMatchesClosedForm) {
  const GMMParams unit = GMMParams::Gaussian(0, kUnitNu);
  EXPECT_NEAR(QuadratureKl(0.7, 0.3, unit), StandardNormalKl(0.7, 0.3), 1e-9);
}

}  // namespace
}  // namespace mdlxf::codes
