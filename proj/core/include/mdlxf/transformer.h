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

#ifndef MDLXF_TRANSFORMER_H_
#define MDLXF_TRANSFORMER_H_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdlxf/common.h"
#include "mdlxf/vocab.h"

// Encoder-only Transformer with one weight block shared by every layer.
namespace mdlxf::transformer {

enum class Normalization { kNone, kTanh };

const char* NormalizationName(Normalization n);
Normalization NormalizationFromString(const std::string& s);

struct ModelConfig {
  int num_layers = 1;
  int num_heads = 1;
  int model_dim = 1;
  int head_dim = 1;
  int hidden_dim = 1;
  int num_outputs = 2;
  Vocabulary vocab;
  Normalization normalization = Normalization::kTanh;
  // Multiplier on q.k; 0 selects 1/sqrt(head_dim).
  double attention_scale = 0;

  double AttentionScale() const {
    return attention_scale > 0 ? attention_scale
                               : 1.0 / std::sqrt(static_cast<double>(head_dim));
  }
};

// Row-vector convention: activations are (positions x model_dim) and each
// projection right-multiplies. Heads are stacked along the columns of
// wq/wk/wv and the rows of wo.
struct TransformerWeights {
  Eigen::MatrixXd embed;   // (|V| + 3) x d: tokens, START, SEP, END
  Eigen::MatrixXd prompt;  // r_s x d
  Eigen::MatrixXd wq, wk, wv;  // d x (H * dh)
  Eigen::MatrixXd wo;          // (H * dh) x d
  Eigen::MatrixXd rel;         // 2 x H: row 0 offset -1, row 1 offset +1
  Eigen::MatrixXd w1;          // d x m
  Eigen::MatrixXd b1;          // 1 x m
  Eigen::MatrixXd w2;          // m x d
  Eigen::MatrixXd b2;          // 1 x d
  Eigen::MatrixXd wout;        // d x |Y|
  Eigen::MatrixXd bout;        // 1 x |Y|

  static TransformerWeights Zeros(const ModelConfig& config);

  // Stable names and order used by serialization and prior grouping.
  static const std::vector<std::string>& ArrayNames();
  Eigen::MatrixXd& Array(const std::string& name);
  const Eigen::MatrixXd& Array(const std::string& name) const;
  std::size_t NumWeights() const;
  bool AllFinite() const;
};

// Throws ValidationError when shapes disagree with the config.
void CheckShapes(const TransformerWeights& w, const ModelConfig& config);

struct ForwardResult {
  Eigen::VectorXd readout;          // logits at the readout position
  Eigen::MatrixXd position_logits;  // positions x |Y|
  std::vector<Eigen::MatrixXd> trace;  // residual stream after each layer
};

struct ForwardOptions {
  bool keep_trace = false;
  int num_layers = -1;  // overrides config.num_layers when >= 0
};

Eigen::MatrixXd Embed(const TransformerWeights& w, const ModelConfig& config,
                      const std::vector<int>& ids);

// One application of the shared block. Throws NumericError on non-finite
// activations, tagged with `layer`.
void ApplyLayer(const TransformerWeights& w, const ModelConfig& config,
                Eigen::MatrixXd& x, int layer);

Eigen::MatrixXd Logits(const TransformerWeights& w, const Eigen::MatrixXd& x);

ForwardResult Forward(const TransformerWeights& w, const ModelConfig& config,
                      const std::vector<int>& ids,
                      const ForwardOptions& options = {});

// preprocess then forward; the readout logits of x.
Eigen::VectorXd MapInput(const TransformerWeights& w,
                         const ModelConfig& config, const std::vector<int>& x,
                         int num_layers = -1);

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd LogSoftmax(const Eigen::VectorXd& logits);

// Drops residual dimensions, hidden units and heads that provably stay zero
// for every input. The pruned model computes the same function.
void PruneDeadDimensions(TransformerWeights& w, ModelConfig& config);

}  // namespace mdlxf::transformer

#endif  // MDLXF_TRANSFORMER_H_
