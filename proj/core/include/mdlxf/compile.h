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

#ifndef MDLXF_COMPILE_H_
#define MDLXF_COMPILE_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mdlxf/ptm.h"
#include "mdlxf/symprog.h"
#include "mdlxf/transformer.h"

// Lowers symbolic programs to shared-layer Transformer weights.
namespace mdlxf::compile {

using transformer::ModelConfig;
using transformer::Normalization;
using transformer::TransformerWeights;

// Zero means keep the compiled size.
struct TargetDims {
  int model_dim = 0;
  int hidden_dim = 0;
  int num_heads = 0;
  int head_dim = 0;
};

struct CompilerOptions {
  double saturation_scale = 100.0;
  double attention_sharpness = 100.0;
  double readout_scale = 10.0;
  Normalization normalization = Normalization::kTanh;
  std::optional<TargetDims> target;
  int num_layers = 0;  // 0 uses the program's hint
};

// Which residual dimensions hold what.
struct DimSlot {
  enum class Role { kVariable, kHead, kReadout, kBias };
  std::string name;
  Role role = Role::kVariable;
  int offset = 0;
  int width = 1;
};

struct CompiledModel {
  TransformerWeights weights;
  ModelConfig config;
  std::vector<DimSlot> layout;
  int rule_units = 0;  // hidden units spent on program rules

  const DimSlot& Slot(const std::string& name) const;
};

// Throws CompileError when the program fails validation, uses features the
// chosen normalization cannot carry, or the target dims are too small.
CompiledModel Compile(const symprog::SymbolicProgram& program,
                      const CompilerOptions& options = {});

// Weights emulating machine `machine` with program tape z under `bound`.
// Always compiled without normalization; r_t + 2 layers.
CompiledModel Zmap(const ptm::Machine& machine, const ptm::ResourceBound& bound,
                   const ptm::ProgramBits& z, CompilerOptions options = {});

// r_s rows whose column 0 holds +1/-1 for the bits of z and 0 after it; the
// remaining columns repeat `tail` in every row.
Eigen::MatrixXd PromptEmbeddingRows(const ptm::ProgramBits& z, int r_s,
                                    const Eigen::RowVectorXd& tail);
Eigen::MatrixXd PromptEmbeddingRows(const ptm::ProgramBits& z, int r_s,
                                    int tail_width = 0);

// Zero-pads to the target dims. Throws CompileError below the current size.
void Pad(TransformerWeights& weights, ModelConfig& config,
         const TargetDims& target);

// The logits a perfectly saturated model produces for interpreter outputs.
Eigen::VectorXd ExactReadout(const symprog::SymbolicProgram& program,
                             const std::vector<symprog::Value>& outputs,
                             const CompilerOptions& options = {});

}  // namespace mdlxf::compile

#endif  // MDLXF_COMPILE_H_
