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

#ifndef MWETAG_AUTODIFF_H_
#define MWETAG_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <deque>
#include <vector>

#include "mwetag/rng.h"
#include "mwetag/tensor.h"

namespace mwetag {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// tape it came from is alive and has not been reset.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  std::span<const double> grad() const;
  // Value of a single-element node.
  double item() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records operations in execution order so they can be replayed in reverse.
// Single-threaded; distinct tapes are independent.
class Tape {
 public:
  // Called during backward with the node's own id; reads the node's grad and
  // accumulates into the grads of its inputs.
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to an external parameter; backward accumulates into
  // param.grad when param.requires_grad is set. The tensor must outlive the
  // tape's backward pass and must not be resized meanwhile.
  Var parameter(Tensor& param);
  Var record(Tensor value, BackwardFn backward);

  void backward(Var loss);
  void reset();

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  // Only meaningful during or after backward.
  std::vector<double>& grad(std::size_t id) { return nodes_[id].grad; }
  const std::vector<double>& grad(std::size_t id) const { return nodes_[id].grad; }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    BackwardFn backward;
    Tensor* parameter = nullptr;
  };
  std::deque<Node> nodes_;
  bool backward_done_ = false;
};

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

enum class Mode { kTrain, kEval };

// ---------------------------------------------------------------------------
// Elementary ops.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var sum(Var x);
Var scale(Var x, double factor);
Var activate(Var x, Activation act);
// Column-wise concatenation of matrices with equal row counts.
Var concat_cols(std::span<const Var> parts);
// Row i of the result is row ids[i] of table.
Var gather_rows(Var table, std::span<const std::size_t> ids);

// y = act(x W + b); x: n x d, W: d x h, b: h.
Var dense(Var x, Var weights, Var bias, Activation act);

// "Same" 1-D convolution along the rows of x (n x d). kernel has shape
// {k, d, f}; bias has shape {f}. Left padding floor((k-1)/2), right padding
// ceil((k-1)/2), so the output is n x f.
Var conv1d_same(Var x, Var kernel, Var bias);

Var softmax_rows(Var x);
// -(1/n) sum_i log probs[i, gold[i]].
Var cross_entropy(Var probs, std::span<const std::size_t> gold);

// ---------------------------------------------------------------------------
// Bidirectional LSTM.

// One direction. Gate blocks are laid out [input, forget, cell, output]
// along the 4h axis.
struct LstmWeights {
  Var input;      // d x 4h
  Var recurrent;  // h x 4h
  Var bias;       // 4h
};

struct DropoutRates {
  double input = 0.0;
  double recurrent = 0.0;
};

// Returns n x 2h: forward hidden states in columns [0, h), backward in
// [h, 2h). In train mode each direction draws one input mask (over d) and
// one recurrent mask (over h) per call, reused at every step; kept units are
// scaled by 1/(1 - rate). Eval mode applies no masks.
Var bilstm(Var x, const LstmWeights& forward, const LstmWeights& backward,
           DropoutRates rates, Mode mode, RngStream& rng);

// ---------------------------------------------------------------------------
// Finite-difference verification.

using LossFn = std::function<Var(Tape&)>;

// Compares tape gradients of f against central differences for every
// coordinate of every tensor in params. Returns the maximum over coordinates
// of |a - n| / max(1e-8, |a| + |n|). Throws Error on a non-finite loss.
// Existing grads of params are overwritten.
double grad_check(const LossFn& f, std::span<Tensor* const> params,
                  double eps = 1e-4);

}  // namespace mwetag

#endif  // MWETAG_AUTODIFF_H_
