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

#include "mdlxf/compile.h"

#include <cmath>
#include <map>
#include <sstream>

namespace mdlxf::compile {
namespace {

using symprog::AttentionHeadSpec;
using symprog::Condition;
using symprog::HeadKind;
using symprog::Rule;
using symprog::SymbolicProgram;
using symprog::VarKind;
using symprog::VariableSpec;

struct Slot {
  VarKind kind = VarKind::kCategorical;
  int range = 2;
  bool is_signed = false;
  bool is_head = false;
  int offset = 0;
  int width = 1;
  double read_magnitude = 1.0;  // |value| the MLP sees for a set entry
};

int Width(VarKind kind, int range) {
  return kind == VarKind::kCategorical ? range : 1;
}

// Residual encoding of a stored value.
void Encode(const Slot& s, std::int64_t v, Eigen::Ref<Eigen::RowVectorXd> row) {
  switch (s.kind) {
    case VarKind::kCategorical:
      for (int c = 0; c < s.range; ++c) row(s.offset + c) = c == v ? 1.0 : -1.0;
      break;
    case VarKind::kBinary:
      if (s.is_signed)
        row(s.offset) = v == symprog::kUnset ? 0.0 : 2.0 * v - 1.0;
      else
        row(s.offset) = static_cast<double>(v);
      break;
    case VarKind::kNumerical:
      row(s.offset) = static_cast<double>(v);
      break;
  }
}

struct Term {
  int dim;
  double alpha, beta;
};

Term ConditionTerm(const Slot& s, const Condition& c) {
  const double m = s.read_magnitude;
  if (s.kind == VarKind::kCategorical)
    return {s.offset + static_cast<int>(c.value), 0.5,
            (c.negate ? -1.0 : 1.0) / (2 * m)};
  if (s.is_signed)
    return {s.offset, 0.5, (c.value == 1 ? 1.0 : -1.0) / (2 * m)};
  return c.value == 1 ? Term{s.offset, 0.0, 1.0 / m}
                      : Term{s.offset, 1.0, -1.0 / m};
}

class Compiler {
 public:
  Compiler(const SymbolicProgram& p, const CompilerOptions& o)
      : p_(p), o_(o), tanh_(o.normalization == Normalization::kTanh) {}

  CompiledModel Run() {
    const auto diag = symprog::Validate(p_);
    if (!diag.empty()) {
      std::string msg = "program '" + p_.name + "' is invalid:";
      for (const auto& d : diag) msg += "\n  " + d;
      throw CompileError(msg);
    }
    Layout();
    Expand();
    CompiledModel out;
    out.config = Config();
    out.weights = TransformerWeights::Zeros(out.config);
    Embedding(out.weights);
    Attention(out.weights, out.config);
    Mlp(out.weights);
    Readout(out.weights);
    out.layout = layout_;
    out.rule_units = static_cast<int>(units_.size());
    if (o_.target) Pad(out.weights, out.config, *o_.target);
    return out;
  }

 private:
  void Layout() {
    const double stored_m = tanh_ ? std::tanh(1.0) : 1.0;
    int off = 0;
    for (const auto& v : p_.variables) {
      if (tanh_ && v.kind != VarKind::kCategorical)
        throw CompileError("tanh normalization carries categorical "
                           "variables only; '" + v.name + "' is " +
                           symprog::VarKindName(v.kind));
      Slot s{v.kind, v.range, v.signed_embedding, false, off,
             Width(v.kind, v.range), stored_m};
      slots_[v.name] = s;
      layout_.push_back({v.name, DimSlot::Role::kVariable, off, s.width});
      off += s.width;
    }
    for (const auto& h : p_.heads) {
      const VariableSpec& val = *p_.FindVariable(h.value);
      Slot s{val.kind, val.range, false, true, off, Width(val.kind, val.range),
             1.0};
      if (h.aggregate == symprog::Aggregate::kMean) s.kind = VarKind::kNumerical;
      slots_[h.name] = s;
      layout_.push_back({h.name, DimSlot::Role::kHead, off, s.width});
      off += s.width;
    }
    for (const auto& name : p_.outputs) {
      const Slot& s = slots_.at(name);
      if (!s.is_head || s.kind != VarKind::kNumerical) continue;
      if (tanh_)
        throw CompileError("numerical head output '" + name +
                           "' needs normalization none");
      readout_dims_[name] = off;
      layout_.push_back({name + ".readout", DimSlot::Role::kReadout, off, 1});
      ++off;
    }
    bias_ = off;
    layout_.push_back({"bias", DimSlot::Role::kBias, off, 1});
    model_dim_ = off + 1;
    head_dim_ = 1;
    for (const auto& h : p_.heads) {
      int qk = 0;
      if (h.kind == HeadKind::kQKV) qk = slots_.at(h.query).width;
      head_dim_ = std::max({head_dim_, qk, slots_.at(h.name).width});
    }
  }

  // Every rule becomes one unit per combination of old values of the
  // variables it assigns without constraining.
  struct Unit {
    std::vector<Condition> when;
    Rule rule;
  };

  void ExpandRule(const Rule& r, std::vector<Condition> when, std::size_t i) {
    if (i == r.set.size()) {
      units_.push_back({std::move(when), r});
      return;
    }
    const std::string& var = r.set[i].var;
    for (const auto& c : when) {
      if (c.var == var && !c.negate) {
        ExpandRule(r, when, i + 1);
        return;
      }
    }
    const Slot& s = slots_.at(var);
    if (s.is_signed)
      throw CompileError("signed binary '" + var + "' cannot be assigned");
    const int values = s.kind == VarKind::kCategorical ? s.range : 2;
    for (int v = 0; v < values; ++v) {
      bool excluded = false;
      for (const auto& c : when)
        if (c.var == var && c.negate && c.value == v) excluded = true;
      if (excluded) continue;
      auto w = when;
      w.push_back({var, v, false});
      ExpandRule(r, std::move(w), i + 1);
    }
  }

  void Expand() {
    for (const auto& r : p_.rules) ExpandRule(r, r.when, 0);
  }

  ModelConfig Config() {
    ModelConfig c;
    c.num_layers = o_.num_layers > 0 ? o_.num_layers : p_.num_layers;
    c.num_heads = std::max<int>(1, static_cast<int>(p_.heads.size()));
    c.model_dim = model_dim_;
    c.head_dim = head_dim_;
    c.vocab = p_.vocab;
    c.normalization = o_.normalization;
    int outs = 0;
    for (const auto& name : p_.outputs) {
      const Slot& s = slots_.at(name);
      outs += s.kind == VarKind::kCategorical ? s.range
              : s.kind == VarKind::kBinary    ? 2
                                              : 1;
    }
    c.num_outputs = outs;
    int hidden = 0;
    for (const auto& u : units_) hidden += HasEffect(u) ? 1 : 0;
    if (tanh_) {
      for (const auto& v : p_.variables) hidden += v.range;
    } else {
      for (const auto& h : p_.heads) hidden += 2 * slots_.at(h.name).width;
      hidden += 2 * static_cast<int>(readout_dims_.size());
    }
    c.hidden_dim = std::max(1, hidden);
    return c;
  }

  std::int64_t OldValue(const Unit& u, const std::string& var) const {
    for (const auto& c : u.when)
      if (c.var == var && !c.negate) return c.value;
    throw CompileError("internal: no old value for '" + var + "'");
  }

  Eigen::RowVectorXd Delta(const Unit& u) const {
    Eigen::RowVectorXd d = Eigen::RowVectorXd::Zero(model_dim_);
    for (const auto& a : u.rule.set) {
      const Slot& s = slots_.at(a.var);
      const std::int64_t old = OldValue(u, a.var);
      Eigen::RowVectorXd from = Eigen::RowVectorXd::Zero(model_dim_);
      Eigen::RowVectorXd to = Eigen::RowVectorXd::Zero(model_dim_);
      Encode(s, old, from);
      Encode(s, a.value, to);
      d += to - from;
    }
    for (const auto& a : u.rule.add)
      d(slots_.at(a.var).offset) += static_cast<double>(a.delta);
    return d;
  }

  bool HasEffect(const Unit& u) const {
    return Delta(u).cwiseAbs().maxCoeff() > 0.0;
  }

  void Embedding(TransformerWeights& w) const {
    const Vocabulary& voc = p_.vocab;
    const int base = voc.num_tokens + 3;
    for (int id = 0; id < voc.size(); ++id) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(model_dim_);
      for (const auto& v : p_.variables) {
        auto it = v.init.find(id);
        Encode(slots_.at(v.name),
               it != v.init.end() ? it->second : v.default_value, row);
      }
      row(bias_) = 1.0;
      if (id < base)
        w.embed.row(id) = row;
      else
        w.prompt.row(id - base) = row;
    }
  }

  void Attention(TransformerWeights& w, const ModelConfig& c) const {
    const double A = o_.attention_sharpness;
    const double comp = std::sqrt(static_cast<double>(c.head_dim));
    const double out_scale = tanh_ ? o_.saturation_scale : 1.0;
    for (std::size_t hi = 0; hi < p_.heads.size(); ++hi) {
      const AttentionHeadSpec& h = p_.heads[hi];
      const int col = static_cast<int>(hi) * c.head_dim;
      if (h.kind == HeadKind::kRelative) {
        w.rel(h.offset < 0 ? 0 : 1, static_cast<Eigen::Index>(hi)) = A;
      } else {
        const Slot& q = slots_.at(h.query);
        const Slot& k = slots_.at(h.key);
        if (q.kind == VarKind::kCategorical) {
          for (int i = 0; i < q.range; ++i) {
            w.wq(q.offset + i, col + i) = comp;
            w.wk(k.offset + i, col + i) = A / 4;
          }
        } else {
          // (2q - 1)(2k - 1) is +1 on a match and -1 otherwise.
          if (q.is_signed) {
            w.wq(q.offset, col) = comp;
          } else {
            w.wq(q.offset, col) = 2 * comp;
            w.wq(bias_, col) = -comp;
          }
          if (k.is_signed) {
            w.wk(k.offset, col) = A / 2;
          } else {
            w.wk(k.offset, col) = A;
            w.wk(bias_, col) = -A / 2;
          }
        }
      }
      const Slot& v = slots_.at(h.value);
      const Slot& o = slots_.at(h.name);
      for (int i = 0; i < v.width; ++i) {
        if (v.is_signed) {
          w.wv(v.offset, col) = 0.5;
          w.wv(bias_, col) = 0.5;
        } else {
          w.wv(v.offset + i, col + i) = 1.0;
        }
        w.wo(col + i, o.offset + i) = out_scale;
      }
    }
  }

  void Mlp(TransformerWeights& w) const {
    const double S = o_.saturation_scale;
    int u = 0;
    for (const auto& unit : units_) {
      const Eigen::RowVectorXd delta = Delta(unit);
      if (delta.cwiseAbs().maxCoeff() == 0.0) continue;
      double alpha = 0;
      for (const auto& cond : unit.when) {
        const Term t = ConditionTerm(slots_.at(cond.var), cond);
        alpha += t.alpha;
        w.w1(t.dim, u) += S * t.beta;
      }
      const double n = static_cast<double>(unit.when.size());
      w.b1(0, u) = S * (alpha - n + 0.5);
      w.w2.row(u) = (tanh_ ? 2.0 : 2.0 / S) * delta;
      ++u;
    }
    if (tanh_) {
      for (const auto& v : p_.variables) {
        const Slot& s = slots_.at(v.name);
        for (int c = 0; c < s.range; ++c) {
          w.w1(s.offset + c, u) = S / (2 * s.read_magnitude);
          Eigen::RowVectorXd enc = Eigen::RowVectorXd::Zero(model_dim_);
          Encode(s, c, enc);
          w.w2.row(u) = 2.0 * enc;
          ++u;
        }
      }
      w.b2(0, bias_) = S;
      return;
    }
    // Head outputs are transient: cancel them after the MLP reads them.
    for (const auto& h : p_.heads) {
      const Slot& s = slots_.at(h.name);
      for (int i = 0; i < s.width; ++i) {
        const int d = s.offset + i;
        w.w1(d, u) = 1.0;
        w.w2(u, d) = -1.0;
        ++u;
        w.w1(d, u) = -1.0;
        w.w2(u, d) = 1.0;
        ++u;
      }
    }
    for (const auto& [name, r] : readout_dims_) {
      const int d = slots_.at(name).offset;
      w.w1(d, u) = 1.0;
      w.w1(r, u) = -1.0;
      w.w2(u, r) = 1.0;
      ++u;
      w.w1(d, u) = -1.0;
      w.w1(r, u) = 1.0;
      w.w2(u, r) = -1.0;
      ++u;
    }
  }

  void Readout(TransformerWeights& w) const {
    const double s = o_.readout_scale;
    int col = 0;
    for (const auto& name : p_.outputs) {
      const Slot& sl = slots_.at(name);
      switch (sl.kind) {
        case VarKind::kCategorical: {
          // Head outputs sit at tanh(1) after the final tanh.
          const double scale = tanh_ && sl.is_head ? s / std::tanh(1.0) : s;
          for (int c = 0; c < sl.range; ++c)
            w.wout(sl.offset + c, col + c) = scale;
          col += sl.range;
          break;
        }
        case VarKind::kBinary:
          if (sl.is_signed) {
            w.wout(sl.offset, col + 1) = s;
          } else {
            w.wout(sl.offset, col + 1) = 2 * s;
            w.wout(bias_, col + 1) = -s;
          }
          col += 2;
          break;
        case VarKind::kNumerical: {
          auto it = readout_dims_.find(name);
          w.wout(it != readout_dims_.end() ? it->second : sl.offset, col) = 1.0;
          col += 1;
          break;
        }
      }
    }
  }

  const SymbolicProgram& p_;
  const CompilerOptions& o_;
  bool tanh_;
  std::map<std::string, Slot> slots_;
  std::map<std::string, int> readout_dims_;
  std::vector<DimSlot> layout_;
  std::vector<Unit> units_;
  int bias_ = 0;
  int model_dim_ = 0;
  int head_dim_ = 1;
};

}  // namespace

const DimSlot& CompiledModel::Slot(const std::string& name) const {
  for (const auto& s : layout)
    if (s.name == name) return s;
  throw ValidationError("no residual slot named '" + name + "'");
}

CompiledModel Compile(const symprog::SymbolicProgram& program,
                      const CompilerOptions& options) {
  if (options.saturation_scale <= 1 || options.attention_sharpness <= 1)
    throw CompileError("saturation and attention scales must exceed 1");
  return Compiler(program, options).Run();
}

Eigen::MatrixXd PromptEmbeddingRows(const ptm::ProgramBits& z, int r_s,
                                    const Eigen::RowVectorXd& tail) {
  if (static_cast<int>(z.size()) > r_s)
    throw ValidationError("|z| = " + std::to_string(z.size()) +
                          " exceeds r_s = " + std::to_string(r_s));
  Eigen::MatrixXd rows(r_s, 1 + tail.size());
  for (int i = 0; i < r_s; ++i) {
    rows(i, 0) = i < static_cast<int>(z.size()) ? (z[i] ? 1.0 : -1.0) : 0.0;
    rows.row(i).tail(tail.size()) = tail;
  }
  return rows;
}

Eigen::MatrixXd PromptEmbeddingRows(const ptm::ProgramBits& z, int r_s,
                                    int tail_width) {
  return PromptEmbeddingRows(z, r_s, Eigen::RowVectorXd::Zero(tail_width));
}

CompiledModel Zmap(const ptm::Machine& machine,
                   const ptm::ResourceBound& bound, const ptm::ProgramBits& z,
                   CompilerOptions options) {
  if (static_cast<int>(z.size()) > bound.r_s)
    throw ValidationError("|z| = " + std::to_string(z.size()) +
                          " exceeds r_s = " + std::to_string(bound.r_s));
  options.normalization = Normalization::kNone;
  options.num_layers = symprog::PrefixTMLayers(bound.r_t);
  const std::optional<TargetDims> target = options.target;
  options.target.reset();
  CompiledModel m =
      Compile(symprog::BuildPrefixTMProgram(machine, bound.r_s), options);
  // Column 0 is prog_bit; the rest of every prompt row is shared.
  Eigen::RowVectorXd tail = m.weights.prompt.row(0).tail(m.config.model_dim - 1);
  m.weights.prompt = PromptEmbeddingRows(z, bound.r_s, tail);
  if (target) Pad(m.weights, m.config, *target);
  return m;
}

void Pad(TransformerWeights& w, ModelConfig& c, const TargetDims& t) {
  auto grow = [](int cur, int want, const char* what) {
    if (want == 0) return cur;
    if (want < cur) {
      std::ostringstream os;
      os << what << " " << want << " is below the compiled minimum " << cur;
      throw CompileError(os.str());
    }
    return want;
  };
  const int d = grow(c.model_dim, t.model_dim, "model_dim");
  const int m = grow(c.hidden_dim, t.hidden_dim, "hidden_dim");
  const int H = grow(c.num_heads, t.num_heads, "num_heads");
  const int dh = grow(c.head_dim, t.head_dim, "head_dim");
  ModelConfig nc = c;
  nc.model_dim = d;
  nc.hidden_dim = m;
  nc.num_heads = H;
  nc.head_dim = dh;
  TransformerWeights nw = TransformerWeights::Zeros(nc);
  const int od = c.model_dim, odh = c.head_dim;
  nw.embed.leftCols(od) = w.embed;
  nw.prompt.leftCols(od) = w.prompt;
  // Keep q.k / sqrt(dh) unchanged when dh grows.
  const double qscale =
      c.attention_scale > 0 ? 1.0 : std::sqrt(static_cast<double>(dh) / odh);
  for (int h = 0; h < c.num_heads; ++h) {
    nw.wq.block(0, h * dh, od, odh) = qscale * w.wq.middleCols(h * odh, odh);
    nw.wk.block(0, h * dh, od, odh) = w.wk.middleCols(h * odh, odh);
    nw.wv.block(0, h * dh, od, odh) = w.wv.middleCols(h * odh, odh);
    nw.wo.block(h * dh, 0, odh, od) = w.wo.middleRows(h * odh, odh);
  }
  nw.rel.leftCols(c.num_heads) = w.rel;
  nw.w1.topLeftCorner(od, c.hidden_dim) = w.w1;
  nw.b1.leftCols(c.hidden_dim) = w.b1;
  nw.w2.topLeftCorner(c.hidden_dim, od) = w.w2;
  nw.b2.leftCols(od) = w.b2;
  nw.wout.topRows(od) = w.wout;
  nw.bout = w.bout;
  w = std::move(nw);
  c = nc;
}

Eigen::VectorXd ExactReadout(const symprog::SymbolicProgram& program,
                             const std::vector<symprog::Value>& outputs,
                             const CompilerOptions& options) {
  std::vector<double> out;
  const double s = options.readout_scale;
  for (std::size_t i = 0; i < program.outputs.size(); ++i) {
    const std::string& name = program.outputs[i];
    const symprog::Value& v = outputs.at(i);
    VarKind kind;
    int range = 2;
    bool is_signed = false;
    if (const auto* var = program.FindVariable(name)) {
      kind = var->kind;
      range = var->range;
      is_signed = var->signed_embedding;
    } else {
      const auto* h = program.FindHead(name);
      const auto* val = program.FindVariable(h->value);
      kind = h->aggregate == symprog::Aggregate::kMean ? VarKind::kNumerical
                                                       : val->kind;
      range = val->range;
    }
    switch (kind) {
      case VarKind::kCategorical:
        for (int c = 0; c < range; ++c) out.push_back(c == v.num ? s : -s);
        break;
      case VarKind::kBinary:
        out.push_back(0.0);
        out.push_back(is_signed ? (v.num == symprog::kUnset ? 0.0
                                                            : s * (2 * v.num - 1))
                                : s * (2 * v.num - 1));
        break;
      case VarKind::kNumerical:
        out.push_back(v.ToDouble());
        break;
    }
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(),
                                     static_cast<Eigen::Index>(out.size()));
}

}  // namespace mdlxf::compile
