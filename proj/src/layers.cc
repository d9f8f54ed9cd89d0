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

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "eigen_util.h"
#include "mwetag/autodiff.h"
#include "mwetag/error.h"

namespace mwetag {

using detail::ConstMatrixMap;
using detail::ConstRowVectorMap;
using detail::MatrixMap;
using detail::RowMatrix;
using detail::RowVectorMap;

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Var dense(Var x, Var weights, Var bias, Activation act) {
  const Tensor& xv = x.value();
  const Tensor& wv = weights.value();
  const Tensor& bv = bias.value();
  require(xv.rank() == 2 && wv.rank() == 2 && xv.cols() == wv.rows(),
          "dense shape mismatch: x " + shape_string(xv.shape()) + ", W " +
              shape_string(wv.shape()));
  require(bv.size() == wv.cols(), "dense bias length mismatch: " + shape_string(bv.shape()));
  const std::size_t n = xv.rows(), d = xv.cols(), h = wv.cols();

  Tensor out({n, h});
  MatrixMap y(out.data().data(), n, h);
  y.noalias() = ConstMatrixMap(xv.data().data(), n, d) * ConstMatrixMap(wv.data().data(), d, h);
  y.rowwise() += ConstRowVectorMap(bv.data().data(), h);
  Tape& tape = x.tape();
  Var z = tape.record(std::move(out), [=, ix = x.id(), iw = weights.id(), ib = bias.id()](
                                          Tape& t, std::size_t self) {
    ConstMatrixMap g(t.grad(self).data(), n, h);
    MatrixMap(t.grad(ix).data(), n, d).noalias() +=
        g * ConstMatrixMap(t.value(iw).data().data(), d, h).transpose();
    MatrixMap(t.grad(iw).data(), d, h).noalias() +=
        ConstMatrixMap(t.value(ix).data().data(), n, d).transpose() * g;
    RowVectorMap(t.grad(ib).data(), h) += g.colwise().sum();
  });
  return act == Activation::kIdentity ? z : activate(z, act);
}

Var conv1d_same(Var x, Var kernel, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  const Tensor& bv = bias.value();
  require(xv.rank() == 2 && xv.rows() >= 1, "conv1d_same needs an n x d input, got " +
                                                shape_string(xv.shape()));
  require(kv.rank() == 3 && kv.shape()[1] == xv.cols(),
          "conv1d_same kernel " + shape_string(kv.shape()) + " does not match input " +
              shape_string(xv.shape()));
  const std::size_t n = xv.rows(), d = xv.cols();
  const std::size_t k = kv.shape()[0], f = kv.shape()[2];
  require(k >= 1, "conv1d_same kernel width must be positive");
  require(bv.size() == f, "conv1d_same bias length mismatch");
  const std::ptrdiff_t left = static_cast<std::ptrdiff_t>((k - 1) / 2);

  // Unfolded input: row i holds the k zero-padded context rows side by side.
  auto unfolded = std::make_shared<RowMatrix>(RowMatrix::Zero(n, k * d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) - left + static_cast<std::ptrdiff_t>(j);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
      std::copy_n(xv.row(static_cast<std::size_t>(src)).data(), d,
                  unfolded->data() + i * k * d + j * d);
    }

  Tensor out({n, f});
  MatrixMap y(out.data().data(), n, f);
  y.noalias() = *unfolded * ConstMatrixMap(kv.data().data(), k * d, f);
  y.rowwise() += ConstRowVectorMap(bv.data().data(), f);

  return x.tape().record(std::move(out), [=, ix = x.id(), ik = kernel.id(), ib = bias.id()](
                                             Tape& t, std::size_t self) {
    ConstMatrixMap g(t.grad(self).data(), n, f);
    ConstMatrixMap kmat(t.value(ik).data().data(), k * d, f);
    MatrixMap(t.grad(ik).data(), k * d, f).noalias() += unfolded->transpose() * g;
    detail::RowVectorMap(t.grad(ib).data(), f) += g.colwise().sum();
    RowMatrix dunfolded = g * kmat.transpose();
    auto& gx = t.grad(ix);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) - left + static_cast<std::ptrdiff_t>(j);
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
        const double* from = dunfolded.data() + i * k * d + j * d;
        double* to = gx.data() + static_cast<std::size_t>(src) * d;
        for (std::size_t c = 0; c < d; ++c) to[c] += from[c];
      }
  });
}

Var softmax_rows(Var x) {
  const Tensor& xv = x.value();
  require(xv.rank() == 2, "softmax_rows needs a matrix");
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) total += (v = std::exp(v - mx));
    for (double& v : row) v /= total;
  }
  return x.tape().record(std::move(out), [ix = x.id()](Tape& t, std::size_t self) {
    const Tensor& y = t.value(self);
    const auto& g = t.grad(self);
    auto& gx = t.grad(ix);
    const std::size_t cols = y.cols();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y(r, c);
      for (std::size_t c = 0; c < cols; ++c)
        gx[r * cols + c] += y(r, c) * (g[r * cols + c] - dot);
    }
  });
}

Var cross_entropy(Var probs, std::span<const std::size_t> gold) {
  const Tensor& pv = probs.value();
  require(pv.rank() == 2 && pv.rows() == gold.size() && !gold.empty(),
          "cross_entropy: " + std::to_string(gold.size()) + " gold labels for probs " +
              shape_string(pv.shape()));
  const std::size_t n = pv.rows(), cols = pv.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    require(gold[i] < cols, "cross_entropy: gold index out of range");
    total -= std::log(pv(i, gold[i]));
  }
  std::vector<std::size_t> labels(gold.begin(), gold.end());
  return probs.tape().record(Tensor::scalar(total / static_cast<double>(n)),
                             [=, ip = probs.id()](Tape& t, std::size_t self) {
                               const double g = t.grad(self)[0];
                               const Tensor& p = t.value(ip);
                               auto& gp = t.grad(ip);
                               for (std::size_t i = 0; i < n; ++i)
                                 gp[i * cols + labels[i]] -=
                                     g / (static_cast<double>(n) * p(i, labels[i]));
                             });
}

namespace {

// Saved forward state of one LSTM direction, in time-position order.
struct LstmTrace {
  std::vector<double> input_mask;      // d, empty when no input dropout
  std::vector<double> recurrent_mask;  // h, empty when no recurrent dropout
  RowMatrix masked_input;              // n x d
  RowMatrix gates;                     // n x 4h: post-activation i, f, g, o
  RowMatrix cell;                      // n x h
  RowMatrix cell_tanh;                 // n x h
  RowMatrix prev_hidden;               // n x h: masked hidden state fed into step t
  RowMatrix prev_cell;                 // n x h
  RowMatrix hidden;                    // n x h
};

std::vector<double> draw_mask(std::size_t width, double rate, RngStream& rng) {
  if (rate <= 0.0) return {};
  std::vector<double> mask(width);
  const double scale = 1.0 / (1.0 - rate);
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : scale;
  return mask;
}

void run_direction(const Tensor& x, const Tensor& wx, const Tensor& wh, const Tensor& b,
                   bool reverse, LstmTrace& tr) {
  const std::size_t n = x.rows(), d = x.cols(), h = wh.rows();
  tr.masked_input = ConstMatrixMap(x.data().data(), n, d);
  if (!tr.input_mask.empty())
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) tr.masked_input(r, c) *= tr.input_mask[c];

  RowMatrix pre = tr.masked_input * ConstMatrixMap(wx.data().data(), d, 4 * h);
  pre.rowwise() += ConstRowVectorMap(b.data().data(), 4 * h);
  ConstMatrixMap whm(wh.data().data(), h, 4 * h);

  tr.gates.resize(n, 4 * h);
  tr.cell.resize(n, h);
  tr.cell_tanh.resize(n, h);
  tr.prev_hidden.resize(n, h);
  tr.prev_cell.resize(n, h);
  tr.hidden.resize(n, h);

  Eigen::RowVectorXd hprev = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd cprev = Eigen::RowVectorXd::Zero(h);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    Eigen::RowVectorXd hm = hprev;
    if (!tr.recurrent_mask.empty())
      for (std::size_t c = 0; c < h; ++c) hm[c] *= tr.recurrent_mask[c];
    tr.prev_hidden.row(t) = hm;
    tr.prev_cell.row(t) = cprev;
    Eigen::RowVectorXd z = pre.row(t) + hm * whm;
    for (std::size_t c = 0; c < h; ++c) {
      const double ig = sigmoid(z[c]);
      const double fg = sigmoid(z[h + c]);
      const double gg = std::tanh(z[2 * h + c]);
      const double og = sigmoid(z[3 * h + c]);
      const double cell = fg * cprev[c] + ig * gg;
      const double ct = std::tanh(cell);
      tr.gates(t, c) = ig;
      tr.gates(t, h + c) = fg;
      tr.gates(t, 2 * h + c) = gg;
      tr.gates(t, 3 * h + c) = og;
      tr.cell(t, c) = cell;
      tr.cell_tanh(t, c) = ct;
      tr.hidden(t, c) = og * ct;
    }
    hprev = tr.hidden.row(t);
    cprev = tr.cell.row(t);
  }
}

// grad_out: n x 2h upstream gradient; column_offset selects this direction's half.
void backprop_direction(const LstmTrace& tr, const double* grad_out, std::size_t column_offset,
                        bool reverse, const Tensor& wx, const Tensor& wh, double* gx,
                        double* gwx, double* gwh, double* gb) {
  const std::size_t n = tr.hidden.rows(), h = tr.hidden.cols(), d = tr.masked_input.cols();
  ConstMatrixMap whm(wh.data().data(), h, 4 * h);
  RowMatrix dz(n, 4 * h);
  Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h);
  Eigen::RowVectorXd dc_next = Eigen::RowVectorXd::Zero(h);

  for (std::size_t step = n; step-- > 0;) {
    const std::size_t t = reverse ? n - 1 - step : step;
    for (std::size_t c = 0; c < h; ++c) {
      const double dh = grad_out[t * 2 * h + column_offset + c] + dh_next[c];
      const double ig = tr.gates(t, c), fg = tr.gates(t, h + c);
      const double gg = tr.gates(t, 2 * h + c), og = tr.gates(t, 3 * h + c);
      const double ct = tr.cell_tanh(t, c);
      const double dc = dh * og * (1.0 - ct * ct) + dc_next[c];
      dz(t, c) = dc * gg * ig * (1.0 - ig);
      dz(t, h + c) = dc * tr.prev_cell(t, c) * fg * (1.0 - fg);
      dz(t, 2 * h + c) = dc * ig * (1.0 - gg * gg);
      dz(t, 3 * h + c) = dh * ct * og * (1.0 - og);
      dc_next[c] = dc * fg;
    }
    dh_next.noalias() = dz.row(t) * whm.transpose();
    if (!tr.recurrent_mask.empty())
      for (std::size_t c = 0; c < h; ++c) dh_next[c] *= tr.recurrent_mask[c];
  }

  MatrixMap(gwh, h, 4 * h).noalias() += tr.prev_hidden.transpose() * dz;
  MatrixMap(gwx, d, 4 * h).noalias() += tr.masked_input.transpose() * dz;
  RowVectorMap(gb, 4 * h) += dz.colwise().sum();
  RowMatrix dx = dz * ConstMatrixMap(wx.data().data(), d, 4 * h).transpose();
  if (!tr.input_mask.empty())
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) dx(r, c) *= tr.input_mask[c];
  MatrixMap(gx, n, d) += dx;
}

void check_lstm_shapes(const Tensor& x, const LstmWeights& w, const char* which) {
  const Tensor& wx = w.input.value();
  const Tensor& wh = w.recurrent.value();
  const Tensor& b = w.bias.value();
  require(wh.rank() == 2 && wh.cols() == 4 * wh.rows(),
          std::string(which) + " recurrent weights must be h x 4h, got " +
              shape_string(wh.shape()));
  require(wx.rank() == 2 && wx.rows() == x.cols() && wx.cols() == wh.cols(),
          std::string(which) + " input weights " + shape_string(wx.shape()) +
              " do not match input " + shape_string(x.shape()));
  require(b.size() == wh.cols(), std::string(which) + " bias must have length 4h");
}

}  // namespace

Var bilstm(Var x, const LstmWeights& forward, const LstmWeights& backward,
           DropoutRates rates, Mode mode, RngStream& rng) {
  const Tensor& xv = x.value();
  require(xv.rank() == 2 && xv.rows() >= 1, "bilstm needs an n x d input");
  require(rates.input >= 0.0 && rates.input < 1.0 && rates.recurrent >= 0.0 &&
              rates.recurrent < 1.0,
          "bilstm dropout rates must lie in [0, 1)");
  check_lstm_shapes(xv, forward, "forward");
  check_lstm_shapes(xv, backward, "backward");
  require(forward.recurrent.value().rows() == backward.recurrent.value().rows(),
          "bilstm directions must share hidden width");
  const std::size_t n = xv.rows(), d = xv.cols(), h = forward.recurrent.value().rows();

  auto fwd = std::make_shared<LstmTrace>();
  auto bwd = std::make_shared<LstmTrace>();
  if (mode == Mode::kTrain) {
    fwd->input_mask = draw_mask(d, rates.input, rng);
    fwd->recurrent_mask = draw_mask(h, rates.recurrent, rng);
    bwd->input_mask = draw_mask(d, rates.input, rng);
    bwd->recurrent_mask = draw_mask(h, rates.recurrent, rng);
  }
  run_direction(xv, forward.input.value(), forward.recurrent.value(), forward.bias.value(),
                false, *fwd);
  run_direction(xv, backward.input.value(), backward.recurrent.value(),
                backward.bias.value(), true, *bwd);

  Tensor out({n, 2 * h});
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t c = 0; c < h; ++c) {
      out(t, c) = fwd->hidden(t, c);
      out(t, h + c) = bwd->hidden(t, c);
    }

  const std::size_t ix = x.id();
  const std::size_t fx = forward.input.id(), fh = forward.recurrent.id(), fb = forward.bias.id();
  const std::size_t bx = backward.input.id(), bh = backward.recurrent.id(),
                    bb = backward.bias.id();
  return x.tape().record(std::move(out), [=](Tape& t, std::size_t self) {
    const double* g = t.grad(self).data();
    backprop_direction(*fwd, g, 0, false, t.value(fx), t.value(fh), t.grad(ix).data(),
                       t.grad(fx).data(), t.grad(fh).data(), t.grad(fb).data());
    backprop_direction(*bwd, g, h, true, t.value(bx), t.value(bh), t.grad(ix).data(),
                       t.grad(bx).data(), t.grad(bh).data(), t.grad(bb).data());
  });
}

}  // namespace mwetag
