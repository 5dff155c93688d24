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

#include "mdlxf/train.h"

#include <cmath>
#include <random>
#include <sstream>

namespace mdlxf::train {
namespace {

using grad::Tape;
using grad::Var;

void CheckBlocks(const std::vector<codes::Block>& got,
                 const std::vector<codes::Block>& want) {
  bool ok = got.size() == want.size();
  for (std::size_t i = 0; ok && i < got.size(); ++i)
    ok = got[i].name == want[i].name && got[i].rows == want[i].rows &&
         got[i].cols == want[i].cols;
  if (!ok) throw ValidationError("parameter blocks do not match the objective");
}

// Which prior group covers each block: the whole block, or one per column.
struct BlockGroups {
  bool per_column = false;
  std::vector<int> groups;  // one entry, or one per column
};

std::vector<BlockGroups> ResolveGroups(const codes::DistributionBundle& b) {
  std::vector<BlockGroups> out;
  std::size_t off = 0;
  for (const auto& bl : b.blocks) {
    const std::size_t n = static_cast<std::size_t>(bl.rows) * bl.cols;
    BlockGroups g;
    bool uniform = true;
    for (std::size_t i = 0; i < n; ++i) uniform &= b.group[off + i] == b.group[off];
    if (uniform || n == 0) {
      g.groups = {n ? b.group[off] : 0};
    } else {
      g.per_column = true;
      for (int c = 0; c < bl.cols; ++c) {
        g.groups.push_back(b.group[off + c]);
        for (int r = 0; r < bl.rows; ++r)
          if (b.group[off + static_cast<std::size_t>(r) * bl.cols + c] !=
              g.groups.back())
            throw ValidationError("block '" + bl.name +
                                  "' mixes prior groups within a column");
      }
    }
    out.push_back(std::move(g));
    off += n;
  }
  return out;
}

Matrix RowOf(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(),
                                              static_cast<Eigen::Index>(v.size()));
}

std::vector<double> VecOf(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

Matrix NormalNoise(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = n(rng);
  return m;
}

std::vector<std::size_t> SampleBatch(std::size_t n, int batch,
                                     std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> u(0, n - 1);
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = u(rng);
  return idx;
}

// One posterior draw for every weight.
Eigen::VectorXd SampleWeights(const codes::DistributionBundle& b,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto& q = b.posterior[i];
    int k = 0;
    if (q.K() > 1) {
      const auto pi = q.Mixing();
      double r = u(rng);
      while (k + 1 < q.K() && r > pi[k]) r -= pi[k++];
    }
    w(static_cast<Eigen::Index>(i)) = q.mu[k] + std::sqrt(q.Variance(k)) * n(rng);
  }
  return w;
}

}  // namespace

std::vector<Matrix> SplitFlat(const Eigen::VectorXd& flat,
                              const std::vector<codes::Block>& blocks) {
  std::vector<Matrix> out;
  Eigen::Index i = 0;
  for (const auto& b : blocks) {
    Matrix m(b.rows, b.cols);
    for (int r = 0; r < b.rows; ++r)
      for (int c = 0; c < b.cols; ++c) {
        if (i >= flat.size()) throw ValidationError("flat vector too short");
        m(r, c) = flat(i++);
      }
    out.push_back(std::move(m));
  }
  if (i != flat.size()) throw ValidationError("flat vector too long");
  return out;
}

Eigen::VectorXd JoinFlat(const std::vector<Matrix>& arrays) {
  Eigen::Index n = 0;
  for (const auto& a : arrays) n += a.size();
  Eigen::VectorXd flat(n);
  Eigen::Index i = 0;
  for (const auto& a : arrays)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) flat(i++) = a(r, c);
  return flat;
}

// ---- MLP ----

MlpIdentityObjective::MlpIdentityObjective(tasks::IdentityDataset data)
    : data_(std::move(data)) {
  if (data_.inputs.empty()) throw ValidationError("empty identity dataset");
}

std::vector<codes::Block> MlpIdentityObjective::Blocks() const {
  return tasks::MlpWeights().Blocks();
}

Var MlpBatchLogits(const std::vector<Var>& p, const Matrix& inputs) {
  Tape& t = *p[0].tape();
  const Var x = t.Constant(inputs);
  const Var h =
      grad::Relu(grad::AddRow(grad::MatMul(x, grad::Transpose(p[0])),
                              grad::Transpose(p[1])));
  return grad::AddRow(grad::MatMul(h, grad::Transpose(p[2])),
                      grad::Transpose(p[3]));
}

Var MlpIdentityObjective::BatchNll(Tape& tape, const std::vector<Var>& params,
                                   const std::vector<std::size_t>& examples,
                                   double* correct, double* total) const {
  (void)tape;
  Matrix x(static_cast<Eigen::Index>(examples.size()), 4);
  for (std::size_t i = 0; i < examples.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = data_.inputs[examples[i]];
  const Var logits = MlpBatchLogits(params, x);
  if (correct) {
    const Matrix& o = logits.value();
    for (Eigen::Index i = 0; i < o.size(); ++i)
      *correct += (o(i) > 0) == (x(i) > 0.5);
    *total += static_cast<double>(o.size());
  }
  return grad::SigmoidCrossEntropy(logits, x);
}

std::pair<double, double> MlpIdentityObjective::Evaluate(
    const std::vector<Matrix>& params) const {
  tasks::MlpWeights w;
  for (std::size_t i = 0; i < params.size(); ++i)
    w.Array(tasks::MlpWeights::ArrayNames()[i]) = params[i];
  const auto e = tasks::EvaluateMlp(w, data_);
  return {e.nll_bits, e.accuracy};
}

// ---- parity Transformer ----

ParityObjective::ParityObjective(transformer::ModelConfig config,
                                 tasks::ParityDataset data)
    : config_(std::move(config)), data_(std::move(data)) {
  if (data_.empty()) throw ValidationError("empty parity dataset");
  if (config_.num_outputs != 2)
    throw ValidationError("parity models need 2 outputs");
}

std::vector<codes::Block> ParityObjective::Blocks() const {
  return codes::GroupTransformer(config_).blocks;
}

Var TransformerBatchLogits(Tape& tape, const std::vector<Var>& p,
                           const transformer::ModelConfig& c,
                           const std::vector<std::vector<int>>& ids) {
  if (p.size() != transformer::TransformerWeights::ArrayNames().size())
    throw ValidationError("expected one parameter per Transformer array");
  enum { kEmbed, kPrompt, kQ, kK, kV, kO, kRel, kW1, kB1, kW2, kB2, kOutW, kOutB };
  std::vector<int> all;
  std::vector<std::pair<int, int>> segments;
  std::vector<int> readout;
  const int pos = c.vocab.ReadoutPosition();
  for (const auto& seq : ids) {
    const int start = static_cast<int>(all.size());
    const int len = static_cast<int>(seq.size());
    segments.emplace_back(start, len);
    readout.push_back(start + (pos >= 0 ? pos : len - 1));
    all.insert(all.end(), seq.begin(), seq.end());
  }
  for (int id : all)
    if (id < 0 || id >= c.vocab.size())
      throw ValidationError("token id outside the vocabulary");
  Var x = grad::GatherRows(grad::ConcatRows({p[kEmbed], p[kPrompt]}), all);
  const bool tanh = c.normalization == transformer::Normalization::kTanh;
  for (int l = 0; l < c.num_layers; ++l) {
    const Var att = grad::SegmentAttention(
        grad::MatMul(x, p[kQ]), grad::MatMul(x, p[kK]), grad::MatMul(x, p[kV]),
        p[kRel], segments, c.num_heads, c.AttentionScale());
    x = grad::Add(x, grad::MatMul(att, p[kO]));
    if (tanh) x = grad::Tanh(x);
    const Var h = grad::Relu(grad::AddRow(grad::MatMul(x, p[kW1]), p[kB1]));
    x = grad::Add(x, grad::AddRow(grad::MatMul(h, p[kW2]), p[kB2]));
    if (tanh) x = grad::Tanh(x);
  }
  (void)tape;
  const Var r = grad::GatherRows(x, readout);
  const Var logits = grad::AddRow(grad::MatMul(r, p[kOutW]), p[kOutB]);
  if (!logits.value().allFinite())
    throw NumericError("non-finite logits", c.num_layers - 1);
  return logits;
}

Var ParityObjective::BatchNll(Tape& tape, const std::vector<Var>& params,
                              const std::vector<std::size_t>& examples,
                              double* correct, double* total) const {
  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
  for (std::size_t i : examples) {
    ids.push_back(config_.vocab.Preprocess(data_[i].bits));
    labels.push_back(data_[i].label);
  }
  const Var logits = TransformerBatchLogits(tape, params, config_, ids);
  if (correct) {
    const Matrix& o = logits.value();
    for (Eigen::Index i = 0; i < o.rows(); ++i) {
      Eigen::Index arg;
      o.row(i).maxCoeff(&arg);
      *correct += arg == labels[i];
    }
    *total += static_cast<double>(o.rows());
  }
  return grad::SoftmaxCrossEntropy(logits, labels);
}

std::pair<double, double> ParityObjective::Evaluate(
    const std::vector<Matrix>& params) const {
  auto w = transformer::TransformerWeights::Zeros(config_);
  const auto& names = transformer::TransformerWeights::ArrayNames();
  for (std::size_t i = 0; i < names.size(); ++i) w.Array(names[i]) = params[i];
  const auto e = tasks::EvaluateParity(w, config_, data_);
  return {e.nll_bits, e.accuracy};
}

// ---- training ----

std::string TrajectoryCsv(const std::vector<TrajectoryRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  out << "step,lr,loss,kl_bits,nll_bits,acc\n";
  for (const auto& r : rows)
    out << r.step << ',' << r.lr << ',' << r.loss << ',' << r.kl_bits << ','
        << r.nll_bits << ',' << r.acc << '\n';
  return out.str();
}

codes::CodelengthReport EvaluateBundle(const Objective& objective,
                                       const codes::DistributionBundle& bundle,
                                       int mc_samples, int nll_samples,
                                       std::uint64_t seed) {
  CheckBlocks(bundle.blocks, objective.Blocks());
  const codes::KlEstimate kl = codes::MonteCarloKl(bundle, mc_samples, seed);
  std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dull);
  double nll = 0, acc = 0;
  for (int s = 0; s < nll_samples; ++s) {
    const auto [n, a] = objective.Evaluate(
        SplitFlat(SampleWeights(bundle, rng), bundle.blocks));
    nll += n;
    acc += a;
  }
  if (nll_samples > 0) {
    nll /= nll_samples;
    acc /= nll_samples;
  } else {
    acc = objective.Evaluate(SplitFlat(bundle.Means(), bundle.blocks)).second;
  }
  return codes::MakeReport(bundle.PriorCostBits(), kl, nll, acc, std::nullopt);
}

TrainResult TrainVariational(const Objective& objective,
                             codes::DistributionBundle bundle,
                             const TrainConfig& cfg) {
  bundle.Check();
  CheckBlocks(bundle.blocks, objective.Blocks());
  for (const auto& q : bundle.posterior)
    if (q.K() != 1)
      throw ValidationError("variational training needs single-Gaussian posteriors");
  if (cfg.mc_weight_samples < 1 || cfg.batch < 1 || cfg.total_steps < 0)
    throw ValidationError("bad training configuration");

  const auto groups = ResolveGroups(bundle);
  const std::size_t nb = bundle.blocks.size(), ng = bundle.prior.size();
  // Parameter storage: posterior means, posterior raw variances, then per
  // group prior means, raw variances and mixing logits.
  std::vector<Matrix> params;
  {
    Eigen::VectorXd mu(static_cast<Eigen::Index>(bundle.size())), nu(mu.size());
    for (std::size_t i = 0; i < bundle.size(); ++i) {
      mu(static_cast<Eigen::Index>(i)) = bundle.posterior[i].mu[0];
      nu(static_cast<Eigen::Index>(i)) = bundle.posterior[i].nu[0];
    }
    for (auto& m : SplitFlat(mu, bundle.blocks)) params.push_back(std::move(m));
    for (auto& m : SplitFlat(nu, bundle.blocks)) params.push_back(std::move(m));
    for (const auto& p : bundle.prior) {
      params.push_back(RowOf(p.mu));
      params.push_back(RowOf(p.nu));
      params.push_back(RowOf(p.w));
    }
  }
  std::vector<Matrix*> ptrs;
  for (auto& m : params) ptrs.push_back(&m);
  grad::Adam adam(ptrs);
  std::mt19937_64 rng(cfg.seed);
  TrainResult result;

  const double S = cfg.mc_weight_samples;
  for (int step = 1; step <= cfg.total_steps; ++step) {
    const double lr = grad::LearningRate(step, cfg.lr, cfg.warmup_steps,
                                         cfg.total_steps, cfg.final_lr_fraction);
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& m : params) leaves.push_back(tape.Leaf(m));
    const auto batch = SampleBatch(objective.NumExamples(), cfg.batch, rng);
    double correct = 0, total = 0;
    Var nll_sum, kl_sum;
    try {
      for (int s = 0; s < cfg.mc_weight_samples; ++s) {
        std::vector<Var> w;
        for (std::size_t b = 0; b < nb; ++b) {
          const Matrix noise =
              NormalNoise(params[b].rows(), params[b].cols(), rng);
          w.push_back(grad::Reparameterize(leaves[b], leaves[nb + b], noise));
        }
        const Var nll = objective.BatchNll(tape, w, batch, &correct, &total);
        Var kl;
        for (std::size_t b = 0; b < nb; ++b) {
          if (w[b].value().size() == 0) continue;
          Var lq = grad::GaussianLogDensitySum(w[b], leaves[b], leaves[nb + b]);
          auto prior = [&](const Var& x, int g) {
            const std::size_t base = 2 * nb + 3 * static_cast<std::size_t>(g);
            return grad::GmmLogDensitySum(x, leaves[base], leaves[base + 1],
                                          leaves[base + 2]);
          };
          if (!groups[b].per_column) {
            lq = grad::Sub(lq, prior(w[b], groups[b].groups[0]));
          } else {
            for (std::size_t c = 0; c < groups[b].groups.size(); ++c)
              lq = grad::Sub(lq, prior(grad::Cols(w[b], c, 1), groups[b].groups[c]));
          }
          kl = kl.tape() ? grad::Add(kl, lq) : lq;
        }
        nll_sum = nll_sum.tape() ? grad::Add(nll_sum, nll) : nll;
        kl_sum = kl_sum.tape() ? grad::Add(kl_sum, kl) : kl;
      }
      const Var loss = grad::Scale(
          grad::Add(grad::Scale(kl_sum, cfg.kl_coefficient / S),
                    grad::Scale(nll_sum, 1.0 / S)),
          1.0 / kLn2);
      if (!std::isfinite(loss.scalar()))
        throw NumericError("non-finite loss at step " + std::to_string(step), -1);
      tape.Backward(loss);
      std::vector<Matrix> grads;
      for (const Var& l : leaves) grads.push_back(l.grad());
      adam.Step(grads, lr);
      if (step % cfg.log_every == 0 || step == cfg.total_steps || step == 1) {
        TrajectoryRow row;
        row.step = step;
        row.lr = lr;
        row.loss = loss.scalar();
        row.kl_bits = NatsToBits(kl_sum.scalar() / S);
        row.nll_bits = NatsToBits(nll_sum.scalar() / S);
        row.acc = correct / total;
        result.trajectory.push_back(row);
      }
    } catch (const NumericError& e) {
      result.diverged = true;
      result.error = e.what();
      break;
    }
  }

  for (std::size_t b = 0, off = 0; b < nb; ++b) {
    const Matrix& mu = params[b];
    const Matrix& nu = params[nb + b];
    for (Eigen::Index r = 0; r < mu.rows(); ++r)
      for (Eigen::Index c = 0; c < mu.cols(); ++c)
        bundle.posterior[off++] = codes::GMMParams::Gaussian(mu(r, c), nu(r, c));
  }
  for (std::size_t g = 0; g < ng; ++g) {
    const std::size_t base = 2 * nb + 3 * g;
    bundle.prior[g] = {VecOf(params[base]), VecOf(params[base + 1]),
                       VecOf(params[base + 2])};
  }
  result.weights = SplitFlat(bundle.Means(), bundle.blocks);
  result.report = EvaluateBundle(objective, bundle, cfg.eval_mc_samples,
                                 cfg.eval_nll_samples, cfg.seed + 1);
  result.bundle = std::move(bundle);
  return result;
}

TrainResult TrainMle(const Objective& objective, std::vector<Matrix> weights,
                     const TrainConfig& cfg) {
  const auto blocks = objective.Blocks();
  if (weights.size() != blocks.size())
    throw ValidationError("one weight array per objective block");
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (weights[i].rows() != blocks[i].rows || weights[i].cols() != blocks[i].cols)
      throw ValidationError("weight array '" + blocks[i].name + "' has the wrong shape");
  std::vector<Matrix*> ptrs;
  for (auto& m : weights) ptrs.push_back(&m);
  grad::Adam adam(ptrs);
  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  for (int step = 1; step <= cfg.total_steps; ++step) {
    const double lr = grad::LearningRate(step, cfg.lr, cfg.warmup_steps,
                                         cfg.total_steps, cfg.final_lr_fraction);
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& m : weights) leaves.push_back(tape.Leaf(m));
    const auto batch = SampleBatch(objective.NumExamples(), cfg.batch, rng);
    double correct = 0, total = 0;
    try {
      const Var nll = objective.BatchNll(tape, leaves, batch, &correct, &total);
      const Var loss = grad::Scale(nll, 1.0 / (cfg.batch * kLn2));
      if (!std::isfinite(loss.scalar()))
        throw NumericError("non-finite loss at step " + std::to_string(step), -1);
      tape.Backward(loss);
      std::vector<Matrix> grads;
      for (const Var& l : leaves) grads.push_back(l.grad());
      adam.Step(grads, lr);
      if (step % cfg.log_every == 0 || step == cfg.total_steps || step == 1) {
        result.trajectory.push_back(
            {step, lr, loss.scalar(), 0.0, loss.scalar(), correct / total});
      }
    } catch (const NumericError& e) {
      result.diverged = true;
      result.error = e.what();
      break;
    }
  }
  const auto [nll, acc] = objective.Evaluate(weights);
  result.report = codes::MakeReport(0.0, {}, nll, acc, std::nullopt);
  result.weights = std::move(weights);
  return result;
}

}  // namespace mdlxf::train
