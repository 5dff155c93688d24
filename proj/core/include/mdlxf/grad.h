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

#ifndef MDLXF_GRAD_H_
#define MDLXF_GRAD_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mdlxf/common.h"

// Reverse-mode differentiation over dense matrices, plus the Adam optimizer
// and its learning-rate schedule.
namespace mdlxf::grad {

using Matrix = Eigen::MatrixXd;

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  // Zero-sized until Backward reaches this node.
  const Matrix& grad() const;
  double scalar() const { return value()(0, 0); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A trainable input; Backward fills its gradient.
  Var Leaf(Matrix value);
  // An input that takes no gradient.
  Var Constant(Matrix value);

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws NumericError naming the
  // first node whose incoming gradient is not finite.
  void Backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }

  // Used by operations.
  Var Push(const char* op, Matrix value, const std::vector<Var>& inputs,
           BackwardFn backward);
  bool NeedsGrad(const Var& v) const { return nodes_[v.id()].needs_grad; }
  void Accumulate(const Var& v, const Matrix& g);
  const Matrix& Value(int id) const { return nodes_[id].value; }
  const Matrix& Grad(int id) const { return nodes_[id].grad; }

 private:
  struct Node {
    const char* op;
    Matrix value;
    Matrix grad;
    bool needs_grad;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

// Elementwise and linear algebra. Shapes follow Eigen; mismatches throw
// ValidationError.
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double s);
Var MatMul(const Var& a, const Var& b);
Var Transpose(const Var& a);
Var AddRow(const Var& a, const Var& row);  // adds a 1 x n row to every row
Var Tanh(const Var& a);
Var Relu(const Var& a);
Var Sigmoid(const Var& a);
Var Softplus(const Var& a);
Var Exp(const Var& a);
Var Log(const Var& a);
Var Square(const Var& a);
Var Sum(const Var& a);  // 1 x 1
Var Cols(const Var& a, Eigen::Index start, Eigen::Index n);
Var GatherRows(const Var& table, const std::vector<int>& rows);
Var ConcatRows(const std::vector<Var>& parts);

// Sum over rows of -log softmax(logits)[label], in nats.
Var SoftmaxCrossEntropy(const Var& logits, const std::vector<int>& labels);
// Sum of binary cross-entropies of sigmoid(logits) against 0/1 targets, in
// nats.
Var SigmoidCrossEntropy(const Var& logits, const Matrix& targets);

// Multi-head softmax attention over independent row segments (start,
// length). rel is 2 x H: scalar biases on offsets -1 and +1.
Var SegmentAttention(const Var& q, const Var& k, const Var& v, const Var& rel,
                     const std::vector<std::pair<int, int>>& segments,
                     int num_heads, double scale);

// mu + sqrt(softplus(nu)) * noise, elementwise.
Var Reparameterize(const Var& mu, const Var& nu, const Matrix& noise);
// Sum of log N(x; mu, softplus(nu)) over matching elements.
Var GaussianLogDensitySum(const Var& x, const Var& mu, const Var& nu);
// Sum over every element of x of log GMM(x) with 1 x K parameter rows.
Var GmmLogDensitySum(const Var& x, const Var& mu, const Var& nu,
                     const Var& logits);
// Sum of closed-form KL(N(mu, softplus(nu)) || N(mu0, softplus(nu0))), nats.
Var GaussianKlSum(const Var& mu, const Var& nu, const Var& mu0,
                  const Var& nu0);

// Rows of softmax((logits + gumbel) / temperature). With straight_through
// the forward value is the one-hot argmax and the gradient is the soft one.
Var GumbelSoftmax(const Var& logits, const Matrix& gumbel, double temperature,
                  bool straight_through);
// Standard Gumbel noise of the given shape.
Matrix SampleGumbel(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

// Learning rate at a 1-based step: linear warmup, then exponential decay
// that reaches final_fraction * base at total_steps.
double LearningRate(int step, double base, int warmup_steps, int total_steps,
                    double final_fraction = 0.1);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(const std::vector<Matrix*>& params, AdamConfig config = {});

  // One update with the given per-parameter gradients. Empty gradients count
  // as zero.
  void Step(const std::vector<Matrix>& grads, double lr);
  int step() const { return step_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  std::vector<Matrix*> params_;
  AdamConfig config_;
  std::vector<Matrix> m_, v_;
  int step_ = 0;
};

}  // namespace mdlxf::grad

#endif  // MDLXF_GRAD_H_
