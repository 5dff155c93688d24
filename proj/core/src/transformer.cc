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

#include "mdlxf/transformer.h"

#include <algorithm>
#include <sstream>

namespace mdlxf::transformer {
namespace {

bool ColZero(const Eigen::MatrixXd& m, Eigen::Index c) {
  return m.rows() == 0 || m.col(c).cwiseAbs().maxCoeff() == 0.0;
}
bool RowZero(const Eigen::MatrixXd& m, Eigen::Index r) {
  return m.cols() == 0 || m.row(r).cwiseAbs().maxCoeff() == 0.0;
}

Eigen::MatrixXd KeepRows(const Eigen::MatrixXd& m,
                         const std::vector<Eigen::Index>& keep) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(keep.size()), m.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(i) = m.row(keep[i]);
  return out;
}
Eigen::MatrixXd KeepCols(const Eigen::MatrixXd& m,
                         const std::vector<Eigen::Index>& keep) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(i) = m.col(keep[i]);
  return out;
}

}  // namespace

const char* NormalizationName(Normalization n) {
  return n == Normalization::kTanh ? "tanh" : "none";
}

Normalization NormalizationFromString(const std::string& s) {
  if (s == "tanh") return Normalization::kTanh;
  if (s == "none") return Normalization::kNone;
  throw ValidationError("normalization must be tanh or none, got '" + s + "'");
}

TransformerWeights TransformerWeights::Zeros(const ModelConfig& c) {
  TransformerWeights w;
  const int d = c.model_dim, hd = c.num_heads * c.head_dim;
  w.embed = Eigen::MatrixXd::Zero(c.vocab.num_tokens + 3, d);
  w.prompt = Eigen::MatrixXd::Zero(c.vocab.num_prompts, d);
  w.wq = Eigen::MatrixXd::Zero(d, hd);
  w.wk = Eigen::MatrixXd::Zero(d, hd);
  w.wv = Eigen::MatrixXd::Zero(d, hd);
  w.wo = Eigen::MatrixXd::Zero(hd, d);
  w.rel = Eigen::MatrixXd::Zero(2, c.num_heads);
  w.w1 = Eigen::MatrixXd::Zero(d, c.hidden_dim);
  w.b1 = Eigen::MatrixXd::Zero(1, c.hidden_dim);
  w.w2 = Eigen::MatrixXd::Zero(c.hidden_dim, d);
  w.b2 = Eigen::MatrixXd::Zero(1, d);
  w.wout = Eigen::MatrixXd::Zero(d, c.num_outputs);
  w.bout = Eigen::MatrixXd::Zero(1, c.num_outputs);
  return w;
}

const std::vector<std::string>& TransformerWeights::ArrayNames() {
  static const std::vector<std::string> names = {
      "embed",  "prompt", "attn.q", "attn.k", "attn.v", "attn.o", "attn.rel",
      "mlp.w1", "mlp.b1", "mlp.w2", "mlp.b2", "out.w",  "out.b"};
  return names;
}

Eigen::MatrixXd& TransformerWeights::Array(const std::string& name) {
  return const_cast<Eigen::MatrixXd&>(
      static_cast<const TransformerWeights&>(*this).Array(name));
}

const Eigen::MatrixXd& TransformerWeights::Array(
    const std::string& name) const {
  if (name == "embed") return embed;
  if (name == "prompt") return prompt;
  if (name == "attn.q") return wq;
  if (name == "attn.k") return wk;
  if (name == "attn.v") return wv;
  if (name == "attn.o") return wo;
  if (name == "attn.rel") return rel;
  if (name == "mlp.w1") return w1;
  if (name == "mlp.b1") return b1;
  if (name == "mlp.w2") return w2;
  if (name == "mlp.b2") return b2;
  if (name == "out.w") return wout;
  if (name == "out.b") return bout;
  throw ValidationError("unknown weight array '" + name + "'");
}

std::size_t TransformerWeights::NumWeights() const {
  std::size_t n = 0;
  for (const auto& name : ArrayNames()) n += Array(name).size();
  return n;
}

bool TransformerWeights::AllFinite() const {
  for (const auto& name : ArrayNames())
    if (!Array(name).allFinite()) return false;
  return true;
}

void CheckShapes(const TransformerWeights& w, const ModelConfig& c) {
  const TransformerWeights z = TransformerWeights::Zeros(c);
  for (const auto& name : TransformerWeights::ArrayNames()) {
    const auto& a = w.Array(name);
    const auto& b = z.Array(name);
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      std::ostringstream os;
      os << "weight '" << name << "' has shape " << a.rows() << "x" << a.cols()
         << ", config expects " << b.rows() << "x" << b.cols();
      throw ValidationError(os.str());
    }
  }
}

Eigen::MatrixXd Embed(const TransformerWeights& w, const ModelConfig& c,
                      const std::vector<int>& ids) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ids.size()), c.model_dim);
  const int base = c.vocab.num_tokens + 3;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || id >= c.vocab.size())
      throw ValidationError("token id " + std::to_string(id) +
                            " outside the vocabulary");
    x.row(i) = id < base ? w.embed.row(id) : w.prompt.row(id - base);
  }
  return x;
}

void ApplyLayer(const TransformerWeights& w, const ModelConfig& c,
                Eigen::MatrixXd& x, int layer) {
  const Eigen::Index n = x.rows();
  const int dh = c.head_dim;
  const double scale = c.AttentionScale();
  const Eigen::MatrixXd q = x * w.wq;
  const Eigen::MatrixXd k = x * w.wk;
  const Eigen::MatrixXd v = x * w.wv;
  Eigen::MatrixXd heads(n, c.num_heads * dh);
  Eigen::MatrixXd s(n, n);
  for (int h = 0; h < c.num_heads; ++h) {
    s.noalias() = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose();
    s *= scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i > 0) s(i, i - 1) += w.rel(0, h);
      if (i + 1 < n) s(i, i + 1) += w.rel(1, h);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = s.row(i).maxCoeff();
      s.row(i) = (s.row(i).array() - m).exp();
      s.row(i) /= s.row(i).sum();
    }
    heads.middleCols(h * dh, dh).noalias() = s * v.middleCols(h * dh, dh);
  }
  x.noalias() += heads * w.wo;
  if (c.normalization == Normalization::kTanh) x = x.array().tanh();
  Eigen::MatrixXd hidden = x * w.w1;
  hidden.rowwise() += w.b1.row(0);
  hidden = hidden.cwiseMax(0.0);
  x.noalias() += hidden * w.w2;
  x.rowwise() += w.b2.row(0);
  if (c.normalization == Normalization::kTanh) x = x.array().tanh();
  if (!x.allFinite())
    throw NumericError("non-finite activation at layer " +
                           std::to_string(layer),
                       layer);
}

Eigen::MatrixXd Logits(const TransformerWeights& w, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd l = x * w.wout;
  l.rowwise() += w.bout.row(0);
  return l;
}

ForwardResult Forward(const TransformerWeights& w, const ModelConfig& c,
                      const std::vector<int>& ids,
                      const ForwardOptions& options) {
  Eigen::MatrixXd x = Embed(w, c, ids);
  const int layers = options.num_layers >= 0 ? options.num_layers : c.num_layers;
  ForwardResult r;
  for (int l = 0; l < layers; ++l) {
    ApplyLayer(w, c, x, l);
    if (options.keep_trace) r.trace.push_back(x);
  }
  r.position_logits = Logits(w, x);
  const int pos = c.vocab.ReadoutPosition();
  r.readout = r.position_logits.row(pos >= 0 ? pos : x.rows() - 1).transpose();
  return r;
}

Eigen::VectorXd MapInput(const TransformerWeights& w, const ModelConfig& c,
                         const std::vector<int>& x, int num_layers) {
  ForwardOptions o;
  o.num_layers = num_layers;
  return Forward(w, c, c.vocab.Preprocess(x), o).readout;
}

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

Eigen::VectorXd LogSoftmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

void PruneDeadDimensions(TransformerWeights& w, ModelConfig& c) {
  c.attention_scale = c.AttentionScale();
  bool changed = true;
  while (changed) {
    changed = false;
    // Residual dimensions that nothing ever writes stay exactly zero.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < c.model_dim; ++j) {
      const bool live = !ColZero(w.embed, j) || !ColZero(w.prompt, j) ||
                        !ColZero(w.wo, j) || !ColZero(w.w2, j) ||
                        w.b2(0, j) != 0.0;
      if (live) keep.push_back(j);
    }
    if (static_cast<int>(keep.size()) < c.model_dim) {
      w.embed = KeepCols(w.embed, keep);
      w.prompt = KeepCols(w.prompt, keep);
      w.wo = KeepCols(w.wo, keep);
      w.w2 = KeepCols(w.w2, keep);
      w.b2 = KeepCols(w.b2, keep);
      w.wq = KeepRows(w.wq, keep);
      w.wk = KeepRows(w.wk, keep);
      w.wv = KeepRows(w.wv, keep);
      w.w1 = KeepRows(w.w1, keep);
      w.wout = KeepRows(w.wout, keep);
      c.model_dim = static_cast<int>(keep.size());
      changed = true;
    }
    // Hidden units that can never activate or never write.
    keep.clear();
    for (Eigen::Index u = 0; u < c.hidden_dim; ++u) {
      const bool silent = ColZero(w.w1, u) && w.b1(0, u) <= 0.0;
      if (!silent && !RowZero(w.w2, u)) keep.push_back(u);
    }
    if (static_cast<int>(keep.size()) < c.hidden_dim) {
      w.w1 = KeepCols(w.w1, keep);
      w.b1 = KeepCols(w.b1, keep);
      w.w2 = KeepRows(w.w2, keep);
      c.hidden_dim = static_cast<int>(keep.size());
      changed = true;
    }
    // Heads whose value path is zero.
    const int dh = c.head_dim;
    std::vector<int> live_heads;
    for (int h = 0; h < c.num_heads; ++h) {
      const bool dead =
          w.wv.middleCols(h * dh, dh).cwiseAbs().maxCoeff() == 0.0 ||
          w.wo.middleRows(h * dh, dh).cwiseAbs().maxCoeff() == 0.0;
      if (!dead) live_heads.push_back(h);
    }
    if (static_cast<int>(live_heads.size()) < c.num_heads) {
      std::vector<Eigen::Index> cols;
      for (int h : live_heads)
        for (int i = 0; i < dh; ++i) cols.push_back(h * dh + i);
      w.wq = KeepCols(w.wq, cols);
      w.wk = KeepCols(w.wk, cols);
      w.wv = KeepCols(w.wv, cols);
      w.wo = KeepRows(w.wo, cols);
      std::vector<Eigen::Index> hc(live_heads.begin(), live_heads.end());
      w.rel = KeepCols(w.rel, hc);
      c.num_heads = static_cast<int>(live_heads.size());
      changed = true;
    }
    // Head columns unused by every head.
    std::vector<Eigen::Index> keep_c;
    for (int i = 0; i < dh; ++i) {
      bool needed = false;
      for (int h = 0; h < c.num_heads && !needed; ++h) {
        const Eigen::Index col = h * dh + i;
        const bool qk = !ColZero(w.wq, col) && !ColZero(w.wk, col);
        const bool vo = !ColZero(w.wv, col) && !RowZero(w.wo, col);
        needed = qk || vo;
      }
      if (needed) keep_c.push_back(i);
    }
    if (static_cast<int>(keep_c.size()) < dh && !keep_c.empty()) {
      std::vector<Eigen::Index> cols;
      for (int h = 0; h < c.num_heads; ++h)
        for (Eigen::Index i : keep_c) cols.push_back(h * dh + i);
      w.wq = KeepCols(w.wq, cols);
      w.wk = KeepCols(w.wk, cols);
      w.wv = KeepCols(w.wv, cols);
      w.wo = KeepRows(w.wo, cols);
      c.head_dim = static_cast<int>(keep_c.size());
      changed = true;
    }
  }
}

}  // namespace mdlxf::transformer
