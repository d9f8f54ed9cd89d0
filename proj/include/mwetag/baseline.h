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

#ifndef MWETAG_BASELINE_H_
#define MWETAG_BASELINE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mwetag/corpus.h"
#include "mwetag/embed.h"
#include "mwetag/tensor.h"

namespace mwetag {

// Feature-template linear-chain CRF baselines. The standard variant uses
// symbolic window features only; the Turian variant adds the embeddings of
// the five window tokens as dense features.
enum class BaselineVariant { kStandard, kTurian };

inline constexpr std::size_t kSymbolicTemplateCount = 26;
inline constexpr std::size_t kWindowSize = 5;  // offsets -2..+2

struct PositionFeatures {
  std::vector<std::string> symbolic;  // "template:value" strings
  std::vector<double> dense;          // 5 * dim values (Turian only)
};

// Window slots outside the sentence read BOS/BOS2 on the left and EOS/EOS2
// on the right. `table` is required for the Turian variant.
PositionFeatures extract_features(const Sentence& sentence, std::size_t i,
                                  BaselineVariant variant, const EmbeddingTable* table);

struct BaselineModel {
  BaselineVariant variant = BaselineVariant::kStandard;
  double sigma = 2.0;
  std::vector<std::string> tags;      // sorted
  std::vector<std::string> features;  // sorted feature names
  Tensor feature_weights;             // |features| x T
  std::size_t embedding_dim = 0;      // Turian only
  Tensor dense_weights;               // (5 * dim) x T: one dim x T block per offset
  Tensor transitions;                 // T x T
  Tensor start;                       // T
  Tensor stop;                        // T
  std::string embeddings_source;

  std::optional<std::size_t> feature_index(const std::string& name) const;
};

struct BaselineTrainOptions {
  double sigma = 2.0;
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-5;  // on the max-norm of the gradient
  std::uint64_t seed = 1;
  double init_scale = 0.01;          // initial weights ~ U(-s, s)
};

struct BaselineTrainStats {
  std::size_t iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;  // max-norm at the final point
  bool converged = false;
};

// Regularized negative log-likelihood over a corpus, as a function of the
// flattened weight vector [feature weights | dense weights | transitions |
// start | stop].
class BaselineObjective {
 public:
  BaselineObjective(const Corpus& corpus, const BaselineModel& shape,
                    const EmbeddingTable* table);

  std::size_t dimension() const { return dimension_; }
  // sum_s (log Z_s - score_s(gold)) + ||w||^2 / (2 sigma^2); fills grad.
  double evaluate(std::span<const double> weights, std::span<double> grad) const;

 private:
  struct Compiled {
    std::vector<std::vector<std::size_t>> features;  // per position
    std::vector<double> dense;                       // n x (5 * dim)
    std::vector<std::size_t> gold;
  };
  std::vector<Compiled> sentences_;
  std::size_t labels_ = 0;
  std::size_t feature_count_ = 0;
  std::size_t dense_width_ = 0;
  std::size_t dimension_ = 0;
  double sigma_ = 2.0;
};

// Vocabularies and zero weights for a corpus; the shape train_baseline fills.
BaselineModel baseline_skeleton(const Corpus& corpus, BaselineVariant variant,
                                const EmbeddingTable* table, double sigma);

// Throws DataError on an empty corpus.
BaselineModel train_baseline(const Corpus& corpus, BaselineVariant variant,
                             const EmbeddingTable* table, const BaselineTrainOptions& options,
                             BaselineTrainStats* stats = nullptr);

std::vector<double> flatten_weights(const BaselineModel& model);
void unflatten_weights(BaselineModel& model, std::span<const double> weights);

TagSequence tag_baseline(const BaselineModel& model, const Sentence& sentence,
                         const EmbeddingTable* table);

}  // namespace mwetag

#endif  // MWETAG_BASELINE_H_
