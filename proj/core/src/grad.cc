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

#include "mdlxf/grad.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace mdlxf::grad {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;

using Array = Eigen::ArrayXXd;

void SameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError(std::string(op) + ": shape mismatch " +
                          std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
}

Array SoftplusA(const Array& x) { return x.unaryExpr([](double v) { return mdlxf::Softplus(v); }); }
Array SigmoidA(const Array& x) { return x.unaryExpr([](double v) { return mdlxf::Sigmoid(v); }); }

Matrix Scalar(double v) { return Matrix::Constant(1, 1, v); }

// Row-wise softmax of m.
Matrix RowSoftmax(const Matrix& m) {
  Matrix p(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    p.row(i) = (m.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

// Broadcast-aware operand: either the same shape as `like` or 1 x 1.
Array Expand(const Matrix& v, const Matrix& like) {
  if (v.rows() == like.rows() && v.cols() == like.cols()) return v.array();
  return Array::Constant(like.rows(), like.cols(), v(0, 0));
}

Matrix Reduce(const Array& g, const Matrix& like) {
  if (g.rows() == like.rows() && g.cols() == like.cols()) return g.matrix();
  return Scalar(g.sum());
}

}  // namespace

const Matrix& Var::value() const { return tape_->Value(id_); }
const Matrix& Var::grad() const { return tape_->Grad(id_); }

Var Tape::Leaf(Matrix value) {
  nodes_.push_back({"leaf", std::move(value), Matrix(), true, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Constant(Matrix value) {
  nodes_.push_back({"constant", std::move(value), Matrix(), false, nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Push(const char* op, Matrix value, const std::vector<Var>& inputs,
               BackwardFn backward) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape() != this) throw ValidationError(std::string(op) + ": foreign tape");
    needs |= nodes_[v.id()].needs_grad;
  }
  nodes_.push_back({op, std::move(value), Matrix(), needs,
                    needs ? std::move(backward) : nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::Accumulate(const Var& v, const Matrix& g) {
  Node& n = nodes_[v.id()];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

void Tape::Backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw ValidationError("Backward needs a 1 x 1 loss");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[loss.id()].grad = Scalar(1.0);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (!n.grad.allFinite())
      throw NumericError("non-finite gradient at node " + std::to_string(id) +
                             " (" + n.op + ")",
                         -1);
    if (n.backward) n.backward(*this, n.grad);
  }
}

Var Add(const Var& a, const Var& b) {
  SameShape(a, b, "Add");
  return a.tape()->Push("add", a.value() + b.value(), {a, b},
                        [a, b](Tape& t, const Matrix& g) {
                          t.Accumulate(a, g);
                          t.Accumulate(b, g);
                        });
}

Var Sub(const Var& a, const Var& b) {
  SameShape(a, b, "Sub");
  return a.tape()->Push("sub", a.value() - b.value(), {a, b},
                        [a, b](Tape& t, const Matrix& g) {
                          t.Accumulate(a, g);
                          t.Accumulate(b, -g);
                        });
}

Var Mul(const Var& a, const Var& b) {
  SameShape(a, b, "Mul");
  return a.tape()->Push(
      "mul", a.value().cwiseProduct(b.value()), {a, b},
      [a, b](Tape& t, const Matrix& g) {
        t.Accumulate(a, g.cwiseProduct(b.value()));
        t.Accumulate(b, g.cwiseProduct(a.value()));
      });
}

Var Scale(const Var& a, double s) {
  return a.tape()->Push("scale", a.value() * s, {a},
                        [a, s](Tape& t, const Matrix& g) {
                          t.Accumulate(a, g * s);
                        });
}

Var MatMul(const Var& a, const Var& b) {
  if (a.cols() != b.rows())
    throw ValidationError("MatMul: inner dimensions differ");
  return a.tape()->Push("matmul", a.value() * b.value(), {a, b},
                        [a, b](Tape& t, const Matrix& g) {
                          if (t.NeedsGrad(a))
                            t.Accumulate(a, g * b.value().transpose());
                          if (t.NeedsGrad(b))
                            t.Accumulate(b, a.value().transpose() * g);
                        });
}

Var Transpose(const Var& a) {
  return a.tape()->Push("transpose", a.value().transpose(), {a},
                        [a](Tape& t, const Matrix& g) {
                          t.Accumulate(a, g.transpose());
                        });
}

Var AddRow(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ValidationError("AddRow: row shape mismatch");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape()->Push("add_row", std::move(out), {a, row},
                        [a, row](Tape& t, const Matrix& g) {
                          t.Accumulate(a, g);
                          t.Accumulate(row, g.colwise().sum());
                        });
}

Var Tanh(const Var& a) {
  Matrix y = a.value().array().tanh().matrix();
  const int self = static_cast<int>(a.tape()->size());
  return a.tape()->Push("tanh", std::move(y), {a},
                        [a, self](Tape& t, const Matrix& g) {
                          const Matrix& y = t.Value(self);
                          t.Accumulate(a, (g.array() * (1.0 - y.array().square()))
                                              .matrix());
                        });
}

Var Relu(const Var& a) {
  return a.tape()->Push(
      "relu", a.value().cwiseMax(0.0), {a}, [a](Tape& t, const Matrix& g) {
        t.Accumulate(a, (a.value().array() > 0).select(g.array(), 0.0).matrix());
      });
}

Var Sigmoid(const Var& a) {
  Matrix y = SigmoidA(a.value().array()).matrix();
  const int self = static_cast<int>(a.tape()->size());
  return a.tape()->Push("sigmoid", std::move(y), {a},
                        [a, self](Tape& t, const Matrix& g) {
                          const Array y = t.Value(self).array();
                          t.Accumulate(a, (g.array() * y * (1 - y)).matrix());
                        });
}

Var Softplus(const Var& a) {
  return a.tape()->Push(
      "softplus", SoftplusA(a.value().array()).matrix(), {a},
      [a](Tape& t, const Matrix& g) {
        t.Accumulate(a, (g.array() * SigmoidA(a.value().array())).matrix());
      });
}

Var Exp(const Var& a) {
  Matrix y = a.value().array().exp().matrix();
  const int self = static_cast<int>(a.tape()->size());
  return a.tape()->Push("exp", std::move(y), {a},
                        [a, self](Tape& t, const Matrix& g) {
                          t.Accumulate(a, g.cwiseProduct(t.Value(self)));
                        });
}

Var Log(const Var& a) {
  return a.tape()->Push("log", a.value().array().log().matrix(), {a},
                        [a](Tape& t, const Matrix& g) {
                          t.Accumulate(a, g.cwiseQuotient(a.value()));
                        });
}

Var Square(const Var& a) {
  return a.tape()->Push("square", a.value().cwiseAbs2(), {a},
                        [a](Tape& t, const Matrix& g) {
                          t.Accumulate(a, 2.0 * g.cwiseProduct(a.value()));
                        });
}

Var Sum(const Var& a) {
  return a.tape()->Push("sum", Scalar(a.value().sum()), {a},
                        [a](Tape& t, const Matrix& g) {
                          t.Accumulate(a, Matrix::Constant(a.rows(), a.cols(),
                                                           g(0, 0)));
                        });
}

Var Cols(const Var& a, Eigen::Index start, Eigen::Index n) {
  if (start < 0 || n < 0 || start + n > a.cols())
    throw ValidationError("Cols: range out of bounds");
  return a.tape()->Push("cols", a.value().middleCols(start, n), {a},
                        [a, start, n](Tape& t, const Matrix& g) {
                          Matrix full = Matrix::Zero(a.rows(), a.cols());
                          full.middleCols(start, n) = g;
                          t.Accumulate(a, full);
                        });
}

Var GatherRows(const Var& table, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), table.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= table.rows())
      throw ValidationError("GatherRows: index " + std::to_string(rows[i]) +
                            " out of range");
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(rows[i]);
  }
  return table.tape()->Push("gather_rows", std::move(out), {table},
                            [table, rows](Tape& t, const Matrix& g) {
                              Matrix full = Matrix::Zero(table.rows(), table.cols());
                              for (std::size_t i = 0; i < rows.size(); ++i)
                                full.row(rows[i]) +=
                                    g.row(static_cast<Eigen::Index>(i));
                              t.Accumulate(table, full);
                            });
}

Var ConcatRows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ValidationError("ConcatRows: no parts");
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != parts[0].cols())
      throw ValidationError("ConcatRows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, parts[0].cols());
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return parts[0].tape()->Push(
      "concat_rows", std::move(out), parts, [parts](Tape& t, const Matrix& g) {
        Eigen::Index r = 0;
        for (const Var& p : parts) {
          t.Accumulate(p, g.middleRows(r, p.rows()));
          r += p.rows();
        }
      });
}

Var SoftmaxCrossEntropy(const Var& logits, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw ValidationError("SoftmaxCrossEntropy: one label per row");
  const Matrix p = RowSoftmax(logits.value());
  double loss = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= p.cols())
      throw ValidationError("SoftmaxCrossEntropy: label out of range");
    const double mx = logits.value().row(i).maxCoeff();
    const double lse =
        mx + std::log((logits.value().row(i).array() - mx).exp().sum());
    loss += lse - logits.value()(i, y);
  }
  return logits.tape()->Push("softmax_xent", Scalar(loss), {logits},
                             [logits, labels, p](Tape& t, const Matrix& g) {
                               Matrix d = p;
                               for (Eigen::Index i = 0; i < d.rows(); ++i)
                                 d(i, labels[i]) -= 1.0;
                               t.Accumulate(logits, g(0, 0) * d);
                             });
}

Var SigmoidCrossEntropy(const Var& logits, const Matrix& targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols())
    throw ValidationError("SigmoidCrossEntropy: target shape mismatch");
  const Array l = logits.value().array();
  const double loss = (SoftplusA(l) - targets.array() * l).sum();
  return logits.tape()->Push(
      "sigmoid_xent", Scalar(loss), {logits},
      [logits, targets](Tape& t, const Matrix& g) {
        t.Accumulate(logits, g(0, 0) * (SigmoidA(logits.value().array()) -
                                        targets.array())
                                           .matrix());
      });
}

Var SegmentAttention(const Var& q, const Var& k, const Var& v, const Var& rel,
                     const std::vector<std::pair<int, int>>& segments,
                     int num_heads, double scale) {
  SameShape(q, k, "SegmentAttention");
  SameShape(q, v, "SegmentAttention");
  if (q.cols() % num_heads != 0 || rel.rows() != 2 || rel.cols() != num_heads)
    throw ValidationError("SegmentAttention: bad head layout");
  const int dh = static_cast<int>(q.cols()) / num_heads;
  const int nh = num_heads;
  auto probs = std::make_shared<std::vector<Matrix>>(segments.size() * nh);
  Matrix out = Matrix::Zero(q.rows(), q.cols());
  const Matrix& Q = q.value();
  const Matrix& K = k.value();
  const Matrix& V = v.value();
  const Matrix& R = rel.value();
  ParallelFor(segments.size(), [&](std::size_t s) {
    const auto [start, len] = segments[s];
    for (int h = 0; h < nh; ++h) {
      Matrix sc = scale * Q.block(start, h * dh, len, dh) *
                  K.block(start, h * dh, len, dh).transpose();
      for (int i = 0; i < len; ++i) {
        if (i > 0) sc(i, i - 1) += R(0, h);
        if (i + 1 < len) sc(i, i + 1) += R(1, h);
      }
      Matrix p = RowSoftmax(sc);
      out.block(start, h * dh, len, dh).noalias() =
          p * V.block(start, h * dh, len, dh);
      (*probs)[s * nh + h] = std::move(p);
    }
  });
  return q.tape()->Push(
      "segment_attention", std::move(out), {q, k, v, rel},
      [q, k, v, rel, segments, nh, dh, scale, probs](Tape& t, const Matrix& g) {
        const Matrix& Q = q.value();
        const Matrix& K = k.value();
        const Matrix& V = v.value();
        Matrix dq = Matrix::Zero(Q.rows(), Q.cols());
        Matrix dk = dq, dv = dq;
        std::vector<Matrix> drel(segments.size(), Matrix::Zero(2, nh));
        ParallelFor(segments.size(), [&](std::size_t s) {
          const auto [start, len] = segments[s];
          for (int h = 0; h < nh; ++h) {
            const Matrix& p = (*probs)[s * nh + h];
            const auto go = g.block(start, h * dh, len, dh);
            dv.block(start, h * dh, len, dh).noalias() = p.transpose() * go;
            const Matrix dp = go * V.block(start, h * dh, len, dh).transpose();
            Matrix ds = p.cwiseProduct(dp);
            const Eigen::VectorXd rs = ds.rowwise().sum();
            ds -= p.cwiseProduct(rs.replicate(1, len));
            for (int i = 0; i < len; ++i) {
              if (i > 0) drel[s](0, h) += ds(i, i - 1);
              if (i + 1 < len) drel[s](1, h) += ds(i, i + 1);
            }
            dq.block(start, h * dh, len, dh).noalias() =
                scale * ds * K.block(start, h * dh, len, dh);
            dk.block(start, h * dh, len, dh).noalias() =
                scale * ds.transpose() * Q.block(start, h * dh, len, dh);
          }
        });
        Matrix dr = Matrix::Zero(2, nh);
        for (const auto& d : drel) dr += d;
        t.Accumulate(q, dq);
        t.Accumulate(k, dk);
        t.Accumulate(v, dv);
        t.Accumulate(rel, dr);
      });
}

Var Reparameterize(const Var& mu, const Var& nu, const Matrix& noise) {
  SameShape(mu, nu, "Reparameterize");
  if (noise.rows() != mu.rows() || noise.cols() != mu.cols())
    throw ValidationError("Reparameterize: noise shape mismatch");
  const Array sd = SoftplusA(nu.value().array()).sqrt();
  Matrix out = mu.value() + (sd * noise.array()).matrix();
  return mu.tape()->Push(
      "reparameterize", std::move(out), {mu, nu},
      [mu, nu, noise](Tape& t, const Matrix& g) {
        t.Accumulate(mu, g);
        if (t.NeedsGrad(nu)) {
          const Array n = nu.value().array();
          const Array sd = SoftplusA(n).sqrt();
          t.Accumulate(nu, (g.array() * noise.array() * SigmoidA(n) /
                            (2.0 * sd))
                               .matrix());
        }
      });
}

Var GaussianLogDensitySum(const Var& x, const Var& mu, const Var& nu) {
  SameShape(x, mu, "GaussianLogDensitySum");
  SameShape(x, nu, "GaussianLogDensitySum");
  const Array s = SoftplusA(nu.value().array());
  const Array d = x.value().array() - mu.value().array();
  const double total = (-0.5 * (kLog2Pi + s.log() + d.square() / s)).sum();
  return x.tape()->Push(
      "gaussian_logpdf_sum", Scalar(total), {x, mu, nu},
      [x, mu, nu](Tape& t, const Matrix& g) {
        const Array n = nu.value().array();
        const Array s = SoftplusA(n);
        const Array d = x.value().array() - mu.value().array();
        const double c = g(0, 0);
        const Array dx = -c * d / s;
        t.Accumulate(x, dx.matrix());
        t.Accumulate(mu, (-dx).matrix());
        t.Accumulate(nu, (c * 0.5 * (d.square() / s.square() - 1.0 / s) *
                          SigmoidA(n))
                             .matrix());
      });
}

Var GmmLogDensitySum(const Var& x, const Var& mu, const Var& nu,
                     const Var& logits) {
  const Eigen::Index K = mu.cols();
  if (mu.rows() != 1 || nu.rows() != 1 || logits.rows() != 1 ||
      nu.cols() != K || logits.cols() != K)
    throw ValidationError("GmmLogDensitySum: parameters must be 1 x K rows");
  const Eigen::Index n = x.value().size();
  const Eigen::Map<const Eigen::VectorXd> xs(x.value().data(), n);
  const Eigen::RowVectorXd var = SoftplusA(nu.value().array()).matrix().row(0);
  const Eigen::RowVectorXd w = logits.value().row(0);
  const double wl = w.maxCoeff() + std::log((w.array() - w.maxCoeff()).exp().sum());
  Eigen::RowVectorXd base(K);
  for (Eigen::Index k = 0; k < K; ++k)
    base(k) = w(k) - wl - 0.5 * (kLog2Pi + std::log(var(k)));
  Matrix l(n, K);
  for (Eigen::Index k = 0; k < K; ++k)
    l.col(k) = (base(k) - 0.5 * (xs.array() - mu.value()(0, k)).square() /
                              var(k))
                   .matrix();
  double total = 0;
  auto r = std::make_shared<Matrix>(n, K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = l.row(i).maxCoeff();
    r->row(i) = (l.row(i).array() - mx).exp();
    const double z = r->row(i).sum();
    r->row(i) /= z;
    total += mx + std::log(z);
  }
  return x.tape()->Push(
      "gmm_logpdf_sum", Scalar(total), {x, mu, nu, logits},
      [x, mu, nu, logits, r](Tape& t, const Matrix& g) {
        const double c = g(0, 0);
        const Eigen::Index n = x.value().size(), K = mu.cols();
        const Eigen::Map<const Eigen::VectorXd> xs(x.value().data(), n);
        const Array nuv = nu.value().array();
        const Eigen::RowVectorXd var = SoftplusA(nuv).matrix().row(0);
        Matrix d(n, K);
        for (Eigen::Index k = 0; k < K; ++k)
          d.col(k) = (xs.array() - mu.value()(0, k)).matrix();
        const Matrix rd = r->cwiseProduct(d);
        if (t.NeedsGrad(x)) {
          Eigen::VectorXd dx = -(rd * var.cwiseInverse().transpose());
          Matrix gx = Eigen::Map<Matrix>(dx.data(), x.rows(), x.cols());
          t.Accumulate(x, c * gx);
        }
        Matrix gmu(1, K), gnu(1, K), gw(1, K);
        const Eigen::RowVectorXd w = logits.value().row(0);
        const Eigen::RowVectorXd pi =
            ((w.array() - w.maxCoeff()).exp() /
             (w.array() - w.maxCoeff()).exp().sum())
                .matrix();
        for (Eigen::Index k = 0; k < K; ++k) {
          gmu(0, k) = rd.col(k).sum() / var(k);
          const double dvar =
              0.5 * (r->col(k).cwiseProduct(d.col(k).cwiseAbs2()).sum() /
                         (var(k) * var(k)) -
                     r->col(k).sum() / var(k));
          gnu(0, k) = dvar * mdlxf::Sigmoid(nuv(0, k));
          gw(0, k) = r->col(k).sum() - static_cast<double>(n) * pi(k);
        }
        t.Accumulate(mu, c * gmu);
        t.Accumulate(nu, c * gnu);
        t.Accumulate(logits, c * gw);
      });
}

Var GaussianKlSum(const Var& mu, const Var& nu, const Var& mu0,
                  const Var& nu0) {
  SameShape(mu, nu, "GaussianKlSum");
  SameShape(mu0, nu0, "GaussianKlSum");
  const bool scalar_prior = mu0.rows() == 1 && mu0.cols() == 1;
  if (!scalar_prior) SameShape(mu, mu0, "GaussianKlSum");
  const Array s = SoftplusA(nu.value().array());
  const Array s0 = SoftplusA(Expand(nu0.value(), nu.value()));
  const Array d = mu.value().array() - Expand(mu0.value(), mu.value());
  const double kl = (0.5 * (s / s0 + d.square() / s0 - 1 + s0.log() - s.log())).sum();
  return mu.tape()->Push(
      "gaussian_kl_sum", Scalar(kl), {mu, nu, mu0, nu0},
      [mu, nu, mu0, nu0](Tape& t, const Matrix& g) {
        const double c = g(0, 0);
        const Array n = nu.value().array();
        const Array n0 = Expand(nu0.value(), nu.value());
        const Array s = SoftplusA(n), s0 = SoftplusA(n0);
        const Array d = mu.value().array() - Expand(mu0.value(), mu.value());
        const Array gm = c * d / s0;
        t.Accumulate(mu, gm.matrix());
        t.Accumulate(mu0, Reduce(-gm, mu0.value()));
        t.Accumulate(nu, (c * 0.5 * (1 / s0 - 1 / s) * SigmoidA(n)).matrix());
        const Array gs0 =
            c * 0.5 * (-s / s0.square() - d.square() / s0.square() + 1 / s0);
        t.Accumulate(nu0, Reduce(gs0 * SigmoidA(n0), nu0.value()));
      });
}

Var GumbelSoftmax(const Var& logits, const Matrix& gumbel, double temperature,
                  bool straight_through) {
  if (temperature <= 0) throw ValidationError("temperature must be positive");
  if (gumbel.rows() != logits.rows() || gumbel.cols() != logits.cols())
    throw ValidationError("GumbelSoftmax: noise shape mismatch");
  const Matrix soft = RowSoftmax((logits.value() + gumbel) / temperature);
  Matrix out = soft;
  if (straight_through) {
    out.setZero();
    for (Eigen::Index i = 0; i < soft.rows(); ++i) {
      Eigen::Index k;
      soft.row(i).maxCoeff(&k);
      out(i, k) = 1.0;
    }
  }
  return logits.tape()->Push(
      "gumbel_softmax", std::move(out), {logits},
      [logits, soft, temperature](Tape& t, const Matrix& g) {
        Matrix d = soft.cwiseProduct(g);
        const Eigen::VectorXd rs = d.rowwise().sum();
        d -= soft.cwiseProduct(rs.replicate(1, soft.cols()));
        t.Accumulate(logits, d / temperature);
      });
}

Matrix SampleGumbel(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(std::numeric_limits<double>::min(),
                                           1.0);
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = -std::log(-std::log(u(rng)));
  return g;
}

double LearningRate(int step, double base, int warmup_steps, int total_steps,
                    double final_fraction) {
  const double warm =
      warmup_steps > 0 ? std::min(1.0, static_cast<double>(step) / warmup_steps)
                       : 1.0;
  double decay = 1.0;
  if (step > warmup_steps && total_steps > warmup_steps)
    decay = std::pow(final_fraction, static_cast<double>(step - warmup_steps) /
                                         (total_steps - warmup_steps));
  return base * warm * decay;
}

Adam::Adam(const std::vector<Matrix*>& params, AdamConfig config)
    : params_(params), config_(config) {
  for (Matrix* p : params_) {
    m_.push_back(Matrix::Zero(p->rows(), p->cols()));
    v_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void Adam::Step(const std::vector<Matrix>& grads, double lr) {
  if (grads.size() != params_.size())
    throw ValidationError("Adam: one gradient per parameter");
  ++step_;
  const double c1 = 1 - std::pow(config_.beta1, step_);
  const double c2 = 1 - std::pow(config_.beta2, step_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (grads[i].size() == 0) {
      m_[i] *= config_.beta1;
      v_[i] *= config_.beta2;
    } else {
      m_[i] = config_.beta1 * m_[i] + (1 - config_.beta1) * grads[i];
      v_[i] = config_.beta2 * v_[i] +
              (1 - config_.beta2) * grads[i].cwiseAbs2();
    }
    params_[i]->array() -=
        lr * (m_[i].array() / c1) /
        ((v_[i].array() / c2).sqrt() + config_.eps);
  }
}

}  // namespace mdlxf::grad
