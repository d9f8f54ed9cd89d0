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

#include "mwetag/chaincrf.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mwetag/error.h"

namespace mwetag {
namespace {

void check_shapes(const Emissions& e, const Transitions& t) {
  const std::size_t labels = e.labels();
  if (e.scores.rank() != 2 || e.length() == 0 || labels == 0)
    throw ContractViolation("emissions must be a non-empty n x T matrix, got " +
                            shape_string(e.scores.shape()));
  if (t.trans.rank() != 2 || t.trans.rows() != labels || t.trans.cols() != labels ||
      t.start.size() != labels || t.stop.size() != labels)
    throw ContractViolation("transitions do not match " + std::to_string(labels) + " labels");
}

double log_sum_exp(std::span<const double> values) {
  const double mx = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(mx)) return mx;
  double total = 0.0;
  for (double v : values) total += std::exp(v - mx);
  return mx + std::log(total);
}

// alpha[i][y] = log sum of scores of prefixes ending in y at position i
// (includes start, excludes stop).
Tensor forward_table(const Emissions& e, const Transitions& t) {
  const std::size_t n = e.length(), labels = e.labels();
  Tensor alpha({n, labels});
  for (std::size_t y = 0; y < labels; ++y) alpha(0, y) = t.start[y] + e.scores(0, y);
  std::vector<double> terms(labels);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t y = 0; y < labels; ++y) {
      for (std::size_t p = 0; p < labels; ++p) terms[p] = alpha(i - 1, p) + t.trans(p, y);
      alpha(i, y) = log_sum_exp(terms) + e.scores(i, y);
    }
  return alpha;
}

// beta[i][y] = log sum of scores of suffixes after position i given y at i
// (includes stop).
Tensor backward_table(const Emissions& e, const Transitions& t) {
  const std::size_t n = e.length(), labels = e.labels();
  Tensor beta({n, labels});
  for (std::size_t y = 0; y < labels; ++y) beta(n - 1, y) = t.stop[y];
  std::vector<double> terms(labels);
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t y = 0; y < labels; ++y) {
      for (std::size_t q = 0; q < labels; ++q)
        terms[q] = t.trans(y, q) + e.scores(i + 1, q) + beta(i + 1, q);
      beta(i, y) = log_sum_exp(terms);
    }
  return beta;
}

double final_log_partition(const Tensor& alpha, const Transitions& t) {
  const std::size_t n = alpha.rows(), labels = alpha.cols();
  std::vector<double> terms(labels);
  for (std::size_t y = 0; y < labels; ++y) terms[y] = alpha(n - 1, y) + t.stop[y];
  return log_sum_exp(terms);
}

}  // namespace

Transitions Transitions::zeros(std::size_t labels) {
  return Transitions{Tensor({labels, labels}), Tensor({labels}), Tensor({labels})};
}

double path_score(const Emissions& e, const Transitions& t, std::span<const std::size_t> path) {
  check_shapes(e, t);
  if (path.size() != e.length())
    throw ContractViolation("path length " + std::to_string(path.size()) +
                            " does not match emissions length " + std::to_string(e.length()));
  for (std::size_t y : path)
    if (y >= e.labels()) throw ContractViolation("label index out of range");
  double score = t.start[path.front()] + t.stop[path.back()];
  for (std::size_t i = 0; i < path.size(); ++i) {
    score += e.scores(i, path[i]);
    if (i > 0) score += t.trans(path[i - 1], path[i]);
  }
  return score;
}

Decoded viterbi(const Emissions& e, const Transitions& t) {
  check_shapes(e, t);
  const std::size_t n = e.length(), labels = e.labels();
  Tensor best({n, labels});
  std::vector<std::size_t> backptr(n * labels, 0);
  for (std::size_t y = 0; y < labels; ++y) best(0, y) = t.start[y] + e.scores(0, y);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t y = 0; y < labels; ++y) {
      std::size_t arg = 0;
      double top = best(i - 1, 0) + t.trans(0, y);
      for (std::size_t p = 1; p < labels; ++p) {
        const double v = best(i - 1, p) + t.trans(p, y);
        if (v > top) {
          top = v;
          arg = p;
        }
      }
      best(i, y) = top + e.scores(i, y);
      backptr[i * labels + y] = arg;
    }

  Decoded out;
  out.path.assign(n, 0);
  std::size_t last = 0;
  out.score = best(n - 1, 0) + t.stop[0];
  for (std::size_t y = 1; y < labels; ++y) {
    const double v = best(n - 1, y) + t.stop[y];
    if (v > out.score) {
      out.score = v;
      last = y;
    }
  }
  out.path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) out.path[i - 1] = backptr[i * labels + out.path[i]];
  return out;
}

double log_partition(const Emissions& e, const Transitions& t) {
  check_shapes(e, t);
  return final_log_partition(forward_table(e, t), t);
}

Marginals forward_backward(const Emissions& e, const Transitions& t) {
  check_shapes(e, t);
  const std::size_t n = e.length(), labels = e.labels();
  const Tensor alpha = forward_table(e, t);
  const Tensor beta = backward_table(e, t);
  Marginals m;
  m.log_partition = final_log_partition(alpha, t);
  m.node = Tensor({n, labels});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t y = 0; y < labels; ++y)
      m.node(i, y) = std::exp(alpha(i, y) + beta(i, y) - m.log_partition);
  m.transition = Tensor({labels, labels});
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t p = 0; p < labels; ++p)
      for (std::size_t y = 0; y < labels; ++y)
        m.transition(p, y) += std::exp(alpha(i - 1, p) + t.trans(p, y) + e.scores(i, y) +
                                       beta(i, y) - m.log_partition);
  return m;
}

double crf_nll_value(const Emissions& e, const Transitions& t, std::span<const std::size_t> gold) {
  return log_partition(e, t) - path_score(e, t, gold);
}

BruteForceResult brute_force(const Emissions& e, const Transitions& t) {
  check_shapes(e, t);
  const std::size_t n = e.length(), labels = e.labels();
  double count = 1.0;
  for (std::size_t i = 0; i < n; ++i) count *= static_cast<double>(labels);
  if (count > 1e6)
    throw ContractViolation("brute_force: " + std::to_string(labels) + "^" + std::to_string(n) +
                            " paths exceeds the enumeration limit");

  BruteForceResult out;
  out.best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> path(n, 0);
  while (true) {
    const double s = path_score(e, t, path);
    scores.push_back(s);
    if (s > out.best_score) {
      out.best_score = s;
      out.best_path = path;
    }
    // Odometer increment, last position fastest.
    std::size_t i = n;
    while (i > 0 && ++path[i - 1] == labels) path[--i] = 0;
    if (i == 0) break;
  }
  out.log_partition = log_sum_exp(scores);
  return out;
}

Var crf_nll(Var emissions, Var trans, Var start, Var stop, std::span<const std::size_t> gold) {
  Transitions t{trans.value(), start.value(), stop.value()};
  Emissions e{emissions.value()};
  if (gold.size() != e.length())
    throw ContractViolation("crf_nll: gold length does not match emissions");
  const Marginals m = forward_backward(e, t);
  const double loss = m.log_partition - path_score(e, t, gold);
  const std::size_t n = e.length(), labels = e.labels();
  std::vector<std::size_t> labels_gold(gold.begin(), gold.end());

  return emissions.tape().record(
      Tensor::scalar(loss),
      [=, ie = emissions.id(), it = trans.id(), is = start.id(), ip = stop.id()](
          Tape& tape, std::size_t self) {
        const double g = tape.grad(self)[0];
        auto& ge = tape.grad(ie);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t y = 0; y < labels; ++y) ge[i * labels + y] += g * m.node(i, y);
          ge[i * labels + labels_gold[i]] -= g;
        }
        auto& gt = tape.grad(it);
        for (std::size_t k = 0; k < labels * labels; ++k) gt[k] += g * m.transition[k];
        for (std::size_t i = 1; i < n; ++i) gt[labels_gold[i - 1] * labels + labels_gold[i]] -= g;
        auto& gs = tape.grad(is);
        auto& gp = tape.grad(ip);
        for (std::size_t y = 0; y < labels; ++y) {
          gs[y] += g * m.node(0, y);
          gp[y] += g * m.node(n - 1, y);
        }
        gs[labels_gold.front()] -= g;
        gp[labels_gold.back()] -= g;
      });
}

}  // namespace mwetag
