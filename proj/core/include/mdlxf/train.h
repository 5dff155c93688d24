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

#ifndef MDLXF_TRAIN_H_
#define MDLXF_TRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mdlxf/codes.h"
#include "mdlxf/grad.h"
#include "mdlxf/tasks.h"
#include "mdlxf/transformer.h"

// Differentiable task losses and the MLE / variational training loops.
namespace mdlxf::train {

using grad::Matrix;

struct TrainConfig {
  double lr = 1e-3;
  int warmup_steps = 1000;
  int total_steps = 50000;
  double final_lr_fraction = 0.1;
  int batch = 128;
  int mc_weight_samples = 2;
  double kl_coefficient = 1e-3;
  double gumbel_temperature = 0.1;
  std::uint64_t seed = 0;
  int eval_mc_samples = 100;
  // Posterior weight samples averaged for the reported NLL and accuracy.
  int eval_nll_samples = 2;
  int log_every = 100;
};

// A dataset plus a differentiable per-example loss over named arrays.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::vector<codes::Block> Blocks() const = 0;
  virtual std::size_t NumExamples() const = 0;
  // Summed NLL in nats over `examples`; adds correct predictions to
  // *correct and the number of predictions to *total.
  virtual grad::Var BatchNll(grad::Tape& tape,
                             const std::vector<grad::Var>& params,
                             const std::vector<std::size_t>& examples,
                             double* correct, double* total) const = 0;
  // Full-dataset summed NLL in bits and accuracy at fixed weights.
  virtual std::pair<double, double> Evaluate(
      const std::vector<Matrix>& params) const = 0;
};

class MlpIdentityObjective : public Objective {
 public:
  explicit MlpIdentityObjective(tasks::IdentityDataset data);
  std::vector<codes::Block> Blocks() const override;
  std::size_t NumExamples() const override { return data_.inputs.size(); }
  grad::Var BatchNll(grad::Tape& tape, const std::vector<grad::Var>& params,
                     const std::vector<std::size_t>& examples, double* correct,
                     double* total) const override;
  std::pair<double, double> Evaluate(
      const std::vector<Matrix>& params) const override;

 private:
  tasks::IdentityDataset data_;
};

class ParityObjective : public Objective {
 public:
  ParityObjective(transformer::ModelConfig config, tasks::ParityDataset data);
  std::vector<codes::Block> Blocks() const override;
  std::size_t NumExamples() const override { return data_.size(); }
  grad::Var BatchNll(grad::Tape& tape, const std::vector<grad::Var>& params,
                     const std::vector<std::size_t>& examples, double* correct,
                     double* total) const override;
  std::pair<double, double> Evaluate(
      const std::vector<Matrix>& params) const override;
  const transformer::ModelConfig& config() const { return config_; }

 private:
  transformer::ModelConfig config_;
  tasks::ParityDataset data_;
};

// Readout logits for a batch of token-id sequences, one row per sequence.
// params follow TransformerWeights::ArrayNames().
grad::Var TransformerBatchLogits(grad::Tape& tape,
                                 const std::vector<grad::Var>& params,
                                 const transformer::ModelConfig& config,
                                 const std::vector<std::vector<int>>& ids);

// Sigmoid logits of the identity MLP for a batch of inputs (rows).
grad::Var MlpBatchLogits(const std::vector<grad::Var>& params,
                         const Matrix& inputs);

std::vector<Matrix> SplitFlat(const Eigen::VectorXd& flat,
                              const std::vector<codes::Block>& blocks);
Eigen::VectorXd JoinFlat(const std::vector<Matrix>& arrays);

struct TrajectoryRow {
  int step = 0;
  double lr = 0;
  double loss = 0;     // kl_coefficient * kl_bits + nll_bits
  double kl_bits = 0;  // training estimate, whole model
  double nll_bits = 0; // minibatch sum (variational) or mean (MLE)
  double acc = 0;
};

std::string TrajectoryCsv(const std::vector<TrajectoryRow>& rows);

struct TrainResult {
  codes::DistributionBundle bundle;  // variational runs
  std::vector<Matrix> weights;       // MLE runs, or posterior means
  std::vector<TrajectoryRow> trajectory;
  codes::CodelengthReport report;
  bool diverged = false;
  std::string error;
};

// Minimizes kl_coefficient * KL + summed minibatch NLL (both in bits) over
// posterior means, posterior raw variances and all prior parameters.
// Posteriors must be single Gaussians.
TrainResult TrainVariational(const Objective& objective,
                             codes::DistributionBundle bundle,
                             const TrainConfig& config);

// Minimizes mean minibatch NLL over point weights.
TrainResult TrainMle(const Objective& objective, std::vector<Matrix> weights,
                     const TrainConfig& config);

// Full-dataset report for a bundle: prior cost, MC KL, and NLL and accuracy
// averaged over posterior samples (posterior means when nll_samples is 0).
codes::CodelengthReport EvaluateBundle(const Objective& objective,
                                       const codes::DistributionBundle& bundle,
                                       int mc_samples, int nll_samples,
                                       std::uint64_t seed);

}  // namespace mdlxf::train

#endif  // MDLXF_TRAIN_H_
