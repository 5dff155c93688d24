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

#ifndef MDLXF_TASKS_H_
#define MDLXF_TASKS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdlxf/codes.h"
#include "mdlxf/compile.h"
#include "mdlxf/transformer.h"

// Datasets, hand-built solutions and initializations for the parity and
// identity tasks.
namespace mdlxf::tasks {

// ---- parity ----

struct ParityExample {
  std::vector<int> bits;
  int label = 0;  // 1 when the number of ones is odd
};
using ParityDataset = std::vector<ParityExample>;

int ParityLabel(const std::vector<int>& bits);

// `count` strings with lengths in [min_len, max_len]. Each length gets an
// equal share and, within a length, ones-counts cycle through 0..len so the
// histogram is flat. Shuffled; deterministic under seed.
ParityDataset GenParity(int min_len, int max_len, int count,
                        std::uint64_t seed);
// `per_length` strings for every length in [min_len, max_len].
ParityDataset GenParityPerLength(int min_len, int max_len, int per_length,
                                 std::uint64_t seed);

// Line format: bit string, a tab, then the label.
void WriteParity(std::ostream& out, const ParityDataset& ds);
ParityDataset ReadParity(std::istream& in);

struct ParityEvaluation {
  double nll_bits = 0;  // summed over examples
  double accuracy = 0;
  std::size_t count = 0;
};

// Readout logit 1 is "odd".
ParityEvaluation EvaluateParity(const transformer::TransformerWeights& w,
                                const transformer::ModelConfig& config,
                                const ParityDataset& ds);

// ---- identity task ----

using Bits4 = Eigen::Matrix<double, 1, 4>;

struct IdentityDataset {
  std::vector<Bits4> inputs;  // targets equal inputs
};

// Each of the 16 vectors `repeats` times, in a fixed order.
IdentityDataset GenIdentity(int repeats = 128);

// f(x) = sigmoid(W2 relu(W1 x + b1) + b2).
struct MlpWeights {
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(16, 4);
  Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(16, 1);
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(4, 16);
  Eigen::MatrixXd b2 = Eigen::MatrixXd::Zero(4, 1);

  static const std::vector<std::string>& ArrayNames();
  Eigen::MatrixXd& Array(const std::string& name);
  const Eigen::MatrixXd& Array(const std::string& name) const;
  std::vector<codes::Block> Blocks() const;
};

MlpWeights MlpManualWeights(double lambda = 20.0);
Bits4 MlpForward(const MlpWeights& w, const Bits4& x);
// Binary cross-entropy summed over the 4 outputs, in bits.
double BceNllBits(const Bits4& probs, const Bits4& y);

struct MlpEvaluation {
  double nll_bits = 0;  // summed over examples
  double accuracy = 0;  // fraction of output bits right at threshold 0.5
};
MlpEvaluation EvaluateMlp(const MlpWeights& w, const IdentityDataset& ds);

Eigen::VectorXd FlattenMlp(const MlpWeights& w);
MlpWeights UnflattenMlp(const Eigen::VectorXd& flat);

// ---- manual bundles ----

struct ManualParityConfig {
  int model_dim = 128;
  int hidden_dim = 512;
  int num_heads = 2;
  int head_dim = 64;
  int num_prompts = 20;
  int num_layers = 42;
  int min_components = 8;
  double nu = -10.0;
};

struct ManualParity {
  transformer::TransformerWeights weights;
  transformer::ModelConfig config;
  codes::DistributionBundle bundle;
  // Equivalent model with the zero padding removed, for fast evaluation.
  transformer::TransformerWeights pruned_weights;
  transformer::ModelConfig pruned_config;
};

ManualParity ManualParityBundle(const ManualParityConfig& c = {});

// Posterior at the manual weights; a single 3-component prior at
// {lambda, 0, -lambda/2} with equal mixing.
codes::DistributionBundle MlpManualBundle(double lambda = 20.0,
                                          double nu = -10.0);

// ---- random initialization ----

// Shapes of a freshly initialized parity Transformer.
struct RandomModelConfig {
  int model_dim = 128;
  int hidden_dim = 512;
  int num_heads = 2;
  int num_prompts = 20;
  int num_layers = 42;
};

transformer::ModelConfig MakeParityConfig(const RandomModelConfig& c);

// Matrices ~ N(0, 2 / fan_in), embedding tables ~ N(0, 1), biases and
// relative-position scalars zero.
transformer::TransformerWeights RandomTransformerWeights(
    const transformer::ModelConfig& config, std::uint64_t seed);
MlpWeights RandomMlpWeights(std::uint64_t seed);

struct VariationalInit {
  double posterior_nu = -10.0;
  double prior_nu = 1.0;
  int prior_components = 3;
};

// Posterior means from the random weights; per group, prior means drawn
// from the group's initialization distribution, equal mixing.
codes::DistributionBundle RandomTransformerBundle(
    const transformer::ModelConfig& config, std::uint64_t seed,
    const VariationalInit& init = {});
codes::DistributionBundle RandomMlpBundle(std::uint64_t seed,
                                          const VariationalInit& init = {});

}  // namespace mdlxf::tasks

#endif  // MDLXF_TASKS_H_
