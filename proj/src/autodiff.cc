/*
 * Copyright (C) 2026 The mwetag Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mwetag/autodiff.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "eigen_util.h"
#include "mwetag/error.h"

namespace mwetag {

using detail::ConstMatrixMap;
using detail::MatrixMap;

const Tensor& Var::value() const { return tape_->value(id_); }

std::span<const double> Var::grad() const { return tape_->grad(id_); }

double Var::item() const {
  const Tensor& v = value();
  if (v.size() != 1)
    throw ContractViolation("item() on tensor of shape " + shape_string(v.shape()));
  return v[0];
}

Var Tape::constant(Tensor value) { return record(std::move(value), nullptr); }

Var Tape::parameter(Tensor& param) {
  Var v = record(param, nullptr);
  nodes_.back().parameter = &param;
  return v;
}

Var Tape::record(Tensor value, BackwardFn backward) {
  if (backward_done_)
    throw ContractViolation("recording on a tape after backward; call reset() first");
  nodes_.push_back(Node{std::move(value), {}, std::move(backward), nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractViolation("loss belongs to another tape");
  if (backward_done_)
    throw ContractViolation("backward called twice without reset()");
  if (value(loss.id()).size() != 1)
    throw ContractViolation("backward requires a scalar loss, got shape " +
                            shape_string(value(loss.id()).shape()));
  backward_done_ = true;
  for (auto& node : nodes_) node.grad.assign(node.value.size(), 0.0);
  nodes_[loss.id()].grad[0] = 1.0;

  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.backward) node.backward(*this, id);
    if (node.parameter && node.parameter->requires_grad) {
      Tensor& p = *node.parameter;
      if (p.grad.size() != p.size()) p.grad.assign(p.size(), 0.0);
      for (std::size_t i = 0; i < p.size(); ++i) p.grad[i] += node.grad[i];
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

void require_same_tape(Var a, Var b) {
  require(&a.tape() == &b.tape(), "operands recorded on different tapes");
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.rank() == 2 && bv.rank() == 2 && av.cols() == bv.rows(),
          "matmul shape mismatch: " + shape_string(av.shape()) + " * " +
              shape_string(bv.shape()));
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  Tensor out({n, m});
  MatrixMap(out.data().data(), n, m).noalias() =
      ConstMatrixMap(av.data().data(), n, k) * ConstMatrixMap(bv.data().data(), k, m);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    ConstMatrixMap dc(t.grad(self).data(), n, m);
    ConstMatrixMap am(t.value(ia).data().data(), n, k);
    ConstMatrixMap bm(t.value(ib).data().data(), k, m);
    MatrixMap(t.grad(ia).data(), n, k).noalias() += dc * bm.transpose();
    MatrixMap(t.grad(ib).data(), k, m).noalias() += am.transpose() * dc;
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require(a.value().shape() == b.value().shape(), "add shape mismatch");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = t.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  require(a.value().shape() == b.value().shape(), "mul shape mismatch");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    auto& gb = t.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t ix = x.id();
  return x.tape().record(Tensor::scalar(total), [=](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& gx : t.grad(ix)) gx += g;
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (double& v : out.data()) v *= factor;
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
  });
}

namespace {

double apply_activation(double z, Activation act) {
  switch (act) {
    case Activation::kIdentity: return z;
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

// Derivative expressed through the activation's output y.
double activation_slope(double y, Activation act) {
  switch (act) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: return 1.0 - y * y;
    case Activation::kSigmoid: return y * (1.0 - y);
  }
  return 1.0;
}

}  // namespace

Var activate(Var x, Activation act) {
  Tensor out = x.value();
  for (double& v : out.data()) v = apply_activation(v, act);
  if (act == Activation::kIdentity) {
    const std::size_t ix = x.id();
    return x.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
      const auto& g = t.grad(self);
      auto& gx = t.grad(ix);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  const std::size_t ix = x.id();
  return x.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    const Tensor& y = t.value(self);
    auto& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * activation_slope(y[i], act);
  });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols of nothing");
  const std::size_t n = parts[0].value().rows();
  std::vector<std::size_t> ids, widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p);
    require(p.value().rank() == 2 && p.value().rows() == n,
            "concat_cols row mismatch: " + shape_string(p.value().shape()));
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  Tensor out({n, total});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < n; ++r)
      std::copy_n(v.row(r).data(), v.cols(), out.row(r).data() + offset);
    offset += v.cols();
  }
  return parts[0].tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto& gp = t.grad(ids[k]);
      const std::size_t w = widths[k];
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < w; ++c) gp[r * w + c] += g[r * total + off + c];
      off += w;
    }
  });
}

Var gather_rows(Var table, std::span<const std::size_t> ids) {
  const Tensor& tv = table.value();
  require(tv.rank() == 2, "gather_rows needs a matrix");
  const std::size_t d = tv.cols();
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] < tv.rows(), "gather_rows index out of range");
    std::copy_n(tv.row(ids[i]).data(), d, out.row(i).data());
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  const std::size_t it = table.id();
  return table.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gt = t.grad(it);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t c = 0; c < d; ++c) gt[rows[i] * d + c] += g[i * d + c];
  });
}

double grad_check(const LossFn& f, std::span<Tensor* const> params, double eps) {
  if (!(eps > 0.0)) throw ContractViolation("grad_check eps must be positive");
  auto evaluate = [&]() {
    Tape tape;
    const double v = f(tape).item();
    if (!std::isfinite(v)) throw Error("grad_check: non-finite loss");
    return v;
  };

  std::vector<bool> saved_flags;
  for (Tensor* p : params) {
    saved_flags.push_back(p->requires_grad);
    p->requires_grad = true;
    p->zero_grad();
  }
  {
    Tape tape;
    Var loss = f(tape);
    if (!std::isfinite(loss.item())) throw Error("grad_check: non-finite loss");
    tape.backward(loss);
  }

  double worst = 0.0;
  for (Tensor* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double original = (*p)[i];
      (*p)[i] = original + eps;
      const double up = evaluate();
      (*p)[i] = original - eps;
      const double down = evaluate();
      (*p)[i] = original;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double err =
          std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->requires_grad = saved_flags[k];
  return worst;
}

}  // namespace mwetag
