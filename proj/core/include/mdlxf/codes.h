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

#ifndef MDLXF_CODES_H_
#define MDLXF_CODES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mdlxf/transformer.h"

// Gaussian mixtures, KL estimators and codelength bookkeeping. Internal
// math is in nats; reported quantities are in bits.
namespace mdlxf::codes {

// Bits charged per transmitted prior scalar (mean, raw variance, logit).
inline constexpr double kPriorScalarBits = 32.0;

struct GMMParams {
  std::vector<double> mu;
  std::vector<double> nu;  // raw variance; sigma^2 = softplus(nu)
  std::vector<double> w;   // mixing logits

  static GMMParams Gaussian(double mu, double nu);
  // Equal-mix components at `means`, all with raw variance nu.
  static GMMParams EqualMix(const std::vector<double>& means, double nu);

  int K() const { return static_cast<int>(mu.size()); }
  double Variance(int k) const { return Softplus(nu[k]); }
  std::vector<double> Mixing() const;
  bool operator==(const GMMParams& o) const {
    return mu == o.mu && nu == o.nu && w == o.w;
  }
};

double GaussianLogPdf(double x, double mu, double var);
double GmmLogPdf(const GMMParams& p, double x);

// KL(N(mu, var) || N(mu0, var0)) in nats.
double GaussianKl(double mu, double var, double mu0, double var0);
// KL(N(mu, var) || N(0, 1)) = (var + mu^2 - 1 - log var) / 2 in nats.
double StandardNormalKl(double mu, double var);

// A contiguous run of weights taken row-major from a named array.
struct Block {
  std::string name;
  int rows = 0;
  int cols = 0;
};

// Per-weight posteriors plus grouped adaptive priors.
struct DistributionBundle {
  std::vector<Block> blocks;
  std::vector<GMMParams> posterior;  // one per weight
  std::vector<int> group;            // weight -> prior group
  std::vector<std::string> group_names;
  std::vector<GMMParams> prior;      // one per group

  std::size_t size() const { return posterior.size(); }
  // Throws ValidationError when sizes disagree.
  void Check() const;
  // Posterior means laid out like the blocks.
  Eigen::VectorXd Means() const;
  // L^Psi: kPriorScalarBits for every prior scalar.
  double PriorCostBits() const;
};

nlohmann::json BundleToJson(const DistributionBundle& b);
DistributionBundle BundleFromJson(const nlohmann::json& j);

struct KlEstimate {
  double bits = 0;
  double stderr_bits = 0;  // zero when every term is closed form
  int samples = 0;
  std::uint64_t seed = 0;
};

// KL of a single posterior against its prior. Closed form when both are
// single Gaussians, zero when they are identical, otherwise Monte Carlo.
KlEstimate WeightKl(const GMMParams& posterior, const GMMParams& prior,
                    int samples, std::uint64_t seed);

// Sum of per-weight KL terms. Multi-component posteriors are sampled with
// hard (straight-through forward) Gumbel selection; estimates are not
// clipped. Deterministic for a fixed seed regardless of thread count.
KlEstimate MonteCarloKl(const DistributionBundle& bundle, int samples,
                        std::uint64_t seed, double temperature = 0.1);

double TwoPartCodelength(double prior_bits_of_h, double nll_bits);
double VariationalCodelength(double kl_bits, double expected_nll_bits);
double AdaptiveVariationalCodelength(double prior_cost_bits, double kl_bits,
                                     double expected_nll_bits);

struct CodelengthReport {
  double prior_cost_bits = 0;
  double kl_bits = 0;
  double kl_stderr_bits = 0;
  double nll_bits = 0;
  double total_bits = 0;  // prior cost + KL + NLL
  double train_acc = 0;
  std::optional<double> ood_acc;
  int mc_samples = 0;
  std::uint64_t mc_seed = 0;

  // KL + NLL, the codelength column of the result tables.
  double variational_bits() const { return kl_bits + nll_bits; }
  nlohmann::json ToJson() const;
};

CodelengthReport MakeReport(double prior_cost_bits, const KlEstimate& kl,
                            double nll_bits, double train_acc,
                            std::optional<double> ood_acc = std::nullopt);

struct MixturePrior {
  std::vector<GMMParams> priors;  // one per group
  double kl_bits = 0;             // sum over groups of N_g * H(p_g)
};

// Components at each group's distinct values with frequency mixing.
// Throws ValidationError when a group has more than max_components values.
MixturePrior OptimalMixturePrior(const std::vector<std::vector<double>>& groups,
                                 int max_components, double nu);

// One group per named array, except "prompt" which gets one per column.
struct TransformerGrouping {
  std::vector<Block> blocks;
  std::vector<int> group;
  std::vector<std::string> group_names;
};
TransformerGrouping GroupTransformer(const transformer::ModelConfig& config);

Eigen::VectorXd Flatten(const transformer::TransformerWeights& w);
transformer::TransformerWeights Unflatten(const Eigen::VectorXd& flat,
                                          const transformer::ModelConfig& c);

// Prompt rows past |z| in column 0 that carry no program bit.
struct RademacherTail {
  int program_length = 0;
};

struct DeltaBundleOptions {
  double posterior_nu = -10.0;
  double prior_nu = -10.0;
  int min_components = 8;
  std::optional<RademacherTail> tail;
};

// Delta-like posteriors at the weights and optimal mixture priors. With a
// tail, column 0 of the prompt table uses the equal +-1 prior and the rows
// past |z| take that prior as their posterior.
DistributionBundle DeltaPosteriorBundle(
    const transformer::TransformerWeights& w,
    const transformer::ModelConfig& config,
    const DeltaBundleOptions& options = {});

// Bit transmission through one weight: the decoded bit is the sign of a
// sample from N(mu, var).
double DecodeProbability(double mu, double var);
// KL(N(mu, var) || prior) in nats by dense quadrature.
double QuadratureKl(double mu, double var, const GMMParams& prior);
// Least KL in bits under the N(0, 1) prior for a decode probability p.
double UnimodalFrontierBits(double p);

struct FrontierPoint {
  double mu = 0;
  double var = 0;
  double probability = 0;
  double kl_bits = 0;
};

struct FrontierGrid {
  double mu_min = 0.0, mu_max = 3.0;
  int mu_steps = 61;
  double log10_var_min = -6.0, log10_var_max = 0.0;
  int var_steps = 61;
  double prior_nu = -10.0;  // multimodal component raw variance
};

// Sweeps posteriors N(mu, var) against the unimodal N(0,1) prior or the
// equal +-1 mixture and returns every grid point.
std::vector<FrontierPoint> FrontierSweep(bool multimodal,
                                         const FrontierGrid& grid);
// Lower envelope: least KL among points with at least each probability.
std::vector<FrontierPoint> FrontierEnvelope(std::vector<FrontierPoint> pts);

}  // namespace mdlxf::codes

#endif  // MDLXF_CODES_H_
