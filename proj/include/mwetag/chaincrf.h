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

#ifndef MWETAG_CHAINCRF_H_
#define MWETAG_CHAINCRF_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mwetag/autodiff.h"
#include "mwetag/tensor.h"

namespace mwetag {

// n x T per-position label scores in log space.
struct Emissions {
  Tensor scores;

  std::size_t length() const { return scores.rows(); }
  std::size_t labels() const { return scores.cols(); }
};

// Label-to-label scores plus explicit start and stop vectors.
struct Transitions {
  Tensor trans;  // T x T, from -> to
  Tensor start;  // T
  Tensor stop;   // T

  static Transitions zeros(std::size_t labels);
  std::size_t labels() const { return start.size(); }
};

struct Decoded {
  std::vector<std::size_t> path;
  double score = 0.0;
};

// Posterior marginals from forward-backward.
struct Marginals {
  Tensor node;        // n x T, rows sum to 1
  Tensor transition;  // T x T, expected transition counts summed over positions
  double log_partition = 0.0;
};

struct BruteForceResult {
  std::vector<std::size_t> best_path;
  double best_score = 0.0;
  double log_partition = 0.0;
};

double path_score(const Emissions& e, const Transitions& t, std::span<const std::size_t> path);

// Highest-scoring path; on ties each backpointer (and the final choice)
// takes the lowest label index.
Decoded viterbi(const Emissions& e, const Transitions& t);

double log_partition(const Emissions& e, const Transitions& t);

Marginals forward_backward(const Emissions& e, const Transitions& t);

// log Z - score(gold).
double crf_nll_value(const Emissions& e, const Transitions& t, std::span<const std::size_t> gold);

// Exhaustive enumeration of all T^n paths. Refuses (ContractViolation)
// when T^n exceeds one million.
BruteForceResult brute_force(const Emissions& e, const Transitions& t);

// Differentiable negative log-likelihood on the tape. emissions is n x T;
// trans is T x T; start and stop are length T.
Var crf_nll(Var emissions, Var trans, Var start, Var stop, std::span<const std::size_t> gold);

}  // namespace mwetag

#endif  // MWETAG_CHAINCRF_H_
