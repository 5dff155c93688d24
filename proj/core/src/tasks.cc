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

#include "mdlxf/tasks.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "mdlxf/symprog.h"

namespace mdlxf::tasks {
namespace {

using transformer::ModelConfig;
using transformer::TransformerWeights;

ParityExample MakeExample(int len, int ones, std::mt19937_64& rng) {
  ParityExample e;
  e.bits.assign(len, 0);
  std::fill(e.bits.begin(), e.bits.begin() + ones, 1);
  std::shuffle(e.bits.begin(), e.bits.end(), rng);
  e.label = ones % 2;
  return e;
}

void Normal(Eigen::MatrixXd& m, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, sd);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = n(rng);
}

codes::DistributionBundle BundleFromMeans(
    std::vector<codes::Block> blocks, const Eigen::VectorXd& means,
    std::vector<int> group, std::vector<std::string> group_names,
    const std::vector<double>& group_sd, std::uint64_t seed,
    const VariationalInit& init) {
  codes::DistributionBundle b;
  b.blocks = std::move(blocks);
  b.group = std::move(group);
  b.group_names = std::move(group_names);
  for (Eigen::Index i = 0; i < means.size(); ++i)
    b.posterior.push_back(codes::GMMParams::Gaussian(means(i), init.posterior_nu));
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dull);
  for (std::size_t g = 0; g < b.group_names.size(); ++g) {
    std::normal_distribution<double> n(0.0, group_sd[g]);
    std::vector<double> mu(init.prior_components);
    for (double& m : mu) m = n(rng);
    b.prior.push_back(codes::GMMParams::EqualMix(mu, init.prior_nu));
  }
  b.Check();
  return b;
}

double InitSd(const std::string& name, const ModelConfig& c) {
  if (name == "embed" || name == "prompt") return 1.0;
  if (name == "attn.q" || name == "attn.k" || name == "attn.v" ||
      name == "mlp.w1" || name == "out.w")
    return std::sqrt(2.0 / c.model_dim);
  if (name == "attn.o") return std::sqrt(2.0 / (c.num_heads * c.head_dim));
  if (name == "mlp.w2") return std::sqrt(2.0 / c.hidden_dim);
  return 0.0;
}

}  // namespace

int ParityLabel(const std::vector<int>& bits) {
  return std::accumulate(bits.begin(), bits.end(), 0) % 2;
}

ParityDataset GenParity(int min_len, int max_len, int count,
                        std::uint64_t seed) {
  if (min_len < 0 || max_len < min_len || count < 0)
    throw ValidationError("bad parity length range or count");
  std::mt19937_64 rng(seed);
  const int lengths = max_len - min_len + 1;
  ParityDataset ds;
  ds.reserve(count);
  for (int i = 0; i < lengths; ++i) {
    const int len = min_len + i;
    const int share = count / lengths + (i < count % lengths ? 1 : 0);
    for (int j = 0; j < share; ++j) ds.push_back(MakeExample(len, j % (len + 1), rng));
  }
  std::shuffle(ds.begin(), ds.end(), rng);
  return ds;
}

ParityDataset GenParityPerLength(int min_len, int max_len, int per_length,
                                 std::uint64_t seed) {
  return GenParity(min_len, max_len, per_length * (max_len - min_len + 1),
                   seed);
}

void WriteParity(std::ostream& out, const ParityDataset& ds) {
  for (const auto& e : ds) {
    for (int b : e.bits) out << b;
    out << '\t' << e.label << '\n';
  }
}

ParityDataset ReadParity(std::istream& in) {
  ParityDataset ds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 2 != line.size())
      throw FormatError("parity line " + std::to_string(lineno) +
                        ": expected bits<TAB>label");
    ParityExample e;
    for (std::size_t i = 0; i < tab; ++i) {
      if (line[i] != '0' && line[i] != '1')
        throw FormatError("parity line " + std::to_string(lineno) +
                          ": non-binary symbol");
      e.bits.push_back(line[i] - '0');
    }
    const char l = line[tab + 1];
    if (l != '0' && l != '1')
      throw FormatError("parity line " + std::to_string(lineno) + ": bad label");
    e.label = l - '0';
    ds.push_back(std::move(e));
  }
  return ds;
}

ParityEvaluation EvaluateParity(const TransformerWeights& w,
                                const ModelConfig& c, const ParityDataset& ds) {
  std::vector<double> nll(ds.size());
  std::vector<char> right(ds.size());
  ParallelFor(ds.size(), [&](std::size_t i) {
    const Eigen::VectorXd logits = transformer::MapInput(w, c, ds[i].bits);
    const Eigen::VectorXd lp = transformer::LogSoftmax(logits);
    nll[i] = -NatsToBits(lp(ds[i].label));
    Eigen::Index arg;
    logits.maxCoeff(&arg);
    right[i] = arg == ds[i].label;
  });
  ParityEvaluation r;
  r.count = ds.size();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    r.nll_bits += nll[i];
    r.accuracy += right[i];
  }
  if (!ds.empty()) r.accuracy /= static_cast<double>(ds.size());
  return r;
}

IdentityDataset GenIdentity(int repeats) {
  IdentityDataset ds;
  for (int r = 0; r < repeats; ++r)
    for (int v = 0; v < 16; ++v) {
      Bits4 x;
      for (int i = 0; i < 4; ++i) x(i) = (v >> i) & 1;
      ds.inputs.push_back(x);
    }
  return ds;
}

const std::vector<std::string>& MlpWeights::ArrayNames() {
  static const std::vector<std::string> names = {"w1", "b1", "w2", "b2"};
  return names;
}

Eigen::MatrixXd& MlpWeights::Array(const std::string& name) {
  return const_cast<Eigen::MatrixXd&>(std::as_const(*this).Array(name));
}

const Eigen::MatrixXd& MlpWeights::Array(const std::string& name) const {
  if (name == "w1") return w1;
  if (name == "b1") return b1;
  if (name == "w2") return w2;
  if (name == "b2") return b2;
  throw ValidationError("no MLP array named '" + name + "'");
}

std::vector<codes::Block> MlpWeights::Blocks() const {
  std::vector<codes::Block> out;
  for (const auto& n : ArrayNames())
    out.push_back({n, static_cast<int>(Array(n).rows()),
                   static_cast<int>(Array(n).cols())});
  return out;
}

MlpWeights MlpManualWeights(double lambda) {
  if (!(lambda > 0)) throw ValidationError("lambda must be positive");
  MlpWeights w;
  for (int i = 0; i < 4; ++i) w.w1(i, i) = lambda;
  w.w2 = w.w1.transpose();
  w.b1.setConstant(-lambda / 2);
  w.b2.setConstant(-lambda / 2);
  return w;
}

Bits4 MlpForward(const MlpWeights& w, const Bits4& x) {
  const Eigen::VectorXd h = (w.w1 * x.transpose() + w.b1).cwiseMax(0.0);
  const Eigen::VectorXd o = w.w2 * h + w.b2;
  Bits4 p;
  for (int i = 0; i < 4; ++i) p(i) = Sigmoid(o(i));
  return p;
}

double BceNllBits(const Bits4& probs, const Bits4& y) {
  double nats = 0;
  for (int i = 0; i < 4; ++i) {
    const double p = y(i) > 0.5 ? probs(i) : 1.0 - probs(i);
    nats -= std::log(p);
  }
  return NatsToBits(nats);
}

MlpEvaluation EvaluateMlp(const MlpWeights& w, const IdentityDataset& ds) {
  MlpEvaluation r;
  double right = 0;
  for (const auto& x : ds.inputs) {
    // Logit form keeps saturated outputs finite.
    const Eigen::VectorXd h = (w.w1 * x.transpose() + w.b1).cwiseMax(0.0);
    const Eigen::VectorXd o = w.w2 * h + w.b2;
    for (int i = 0; i < 4; ++i) {
      const double z = x(i) > 0.5 ? o(i) : -o(i);
      r.nll_bits += NatsToBits(Softplus(-z));
      right += (o(i) > 0) == (x(i) > 0.5);
    }
  }
  if (!ds.inputs.empty()) r.accuracy = right / (4.0 * ds.inputs.size());
  return r;
}

Eigen::VectorXd FlattenMlp(const MlpWeights& w) {
  Eigen::VectorXd flat(148);
  Eigen::Index i = 0;
  for (const auto& n : MlpWeights::ArrayNames()) {
    const auto& a = w.Array(n);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) flat(i++) = a(r, c);
  }
  return flat;
}

MlpWeights UnflattenMlp(const Eigen::VectorXd& flat) {
  if (flat.size() != 148) throw ValidationError("MLP has 148 weights");
  MlpWeights w;
  Eigen::Index i = 0;
  for (const auto& n : MlpWeights::ArrayNames()) {
    auto& a = w.Array(n);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = flat(i++);
  }
  return w;
}

ManualParity ManualParityBundle(const ManualParityConfig& c) {
  compile::CompilerOptions o;
  o.target = compile::TargetDims{c.model_dim, c.hidden_dim, c.num_heads,
                                 c.head_dim};
  o.num_layers = c.num_layers;
  compile::CompiledModel m =
      compile::Compile(symprog::BuildParityProgram(c.num_prompts), o);
  ManualParity out;
  out.weights = m.weights;
  out.config = m.config;
  codes::DeltaBundleOptions bo;
  bo.posterior_nu = c.nu;
  bo.prior_nu = c.nu;
  bo.min_components = c.min_components;
  out.bundle = codes::DeltaPosteriorBundle(out.weights, out.config, bo);
  out.pruned_weights = out.weights;
  out.pruned_config = out.config;
  transformer::PruneDeadDimensions(out.pruned_weights, out.pruned_config);
  return out;
}

codes::DistributionBundle MlpManualBundle(double lambda, double nu) {
  const MlpWeights w = MlpManualWeights(lambda);
  const Eigen::VectorXd flat = FlattenMlp(w);
  codes::DistributionBundle b;
  b.blocks = w.Blocks();
  b.group.assign(148, 0);
  b.group_names = {"mlp"};
  for (Eigen::Index i = 0; i < flat.size(); ++i)
    b.posterior.push_back(codes::GMMParams::Gaussian(flat(i), nu));
  b.prior = {codes::GMMParams::EqualMix({lambda, 0.0, -lambda / 2}, nu)};
  b.Check();
  return b;
}

ModelConfig MakeParityConfig(const RandomModelConfig& c) {
  if (c.num_heads < 1 || c.model_dim % c.num_heads != 0)
    throw ValidationError("model_dim must be a multiple of num_heads");
  ModelConfig m;
  m.num_layers = c.num_layers;
  m.num_heads = c.num_heads;
  m.model_dim = c.model_dim;
  m.head_dim = c.model_dim / c.num_heads;
  m.hidden_dim = c.hidden_dim;
  m.num_outputs = 2;
  m.vocab.num_tokens = 2;
  m.vocab.num_prompts = c.num_prompts;
  m.vocab.layout = Vocabulary::Layout::kPrompted;
  m.normalization = transformer::Normalization::kTanh;
  return m;
}

TransformerWeights RandomTransformerWeights(const ModelConfig& c,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TransformerWeights w = TransformerWeights::Zeros(c);
  for (const auto& name : TransformerWeights::ArrayNames()) {
    const double sd = InitSd(name, c);
    if (sd > 0) Normal(w.Array(name), sd, rng);
  }
  return w;
}

MlpWeights RandomMlpWeights(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MlpWeights w;
  Normal(w.w1, std::sqrt(2.0 / 4), rng);
  Normal(w.w2, std::sqrt(2.0 / 16), rng);
  return w;
}

codes::DistributionBundle RandomTransformerBundle(const ModelConfig& c,
                                                  std::uint64_t seed,
                                                  const VariationalInit& init) {
  const auto grouping = codes::GroupTransformer(c);
  std::vector<double> sd;
  for (const auto& name : grouping.group_names) {
    const std::string array = name.rfind("prompt", 0) == 0 ? "prompt" : name;
    const double s = InitSd(array, c);
    sd.push_back(s > 0 ? s : 1.0);
  }
  return BundleFromMeans(grouping.blocks,
                         codes::Flatten(RandomTransformerWeights(c, seed)),
                         grouping.group, grouping.group_names, sd, seed, init);
}

codes::DistributionBundle RandomMlpBundle(std::uint64_t seed,
                                          const VariationalInit& init) {
  const MlpWeights w = RandomMlpWeights(seed);
  return BundleFromMeans(w.Blocks(), FlattenMlp(w), std::vector<int>(148, 0),
                         {"mlp"}, {std::sqrt(2.0 / 4)}, seed, init);
}

}  // namespace mdlxf::tasks
