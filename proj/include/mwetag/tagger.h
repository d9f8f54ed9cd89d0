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

#ifndef MWETAG_TAGGER_H_
#define MWETAG_TAGGER_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mwetag/autodiff.h"
#include "mwetag/corpus.h"
#include "mwetag/embed.h"
#include "mwetag/rng.h"
#include "mwetag/tensor.h"

namespace mwetag {

enum class Head { kSoftmax, kCrf };
enum class EmbeddingMode { kPretrained, kRandomTrainable };

struct OptimizerConfig {
  std::string name = "adam";
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TaggerConfig {
  std::vector<std::size_t> filter_widths{2, 3};
  std::size_t filters_per_width = 200;
  std::size_t lstm_hidden = 300;  // per direction
  double dropout = 0.5;
  double recurrent_dropout = 0.2;
  Activation conv_activation = Activation::kRelu;
  Head head = Head::kSoftmax;
  std::size_t epochs = 100;
  std::string pos_merge = "before_lstm";
  bool embeddings_trainable = false;
  EmbeddingMode embedding_mode = EmbeddingMode::kPretrained;
  OptimizerConfig optimizer;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;

  // Throws ContractViolation on out-of-range settings.
  void validate() const;
};

struct ConvBank {
  std::size_t width = 0;
  Tensor kernel;  // {width, input channels, filters}
  Tensor bias;    // {filters}
};

struct LstmParams {
  Tensor input;      // d x 4h
  Tensor recurrent;  // h x 4h
  Tensor bias;       // 4h
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

struct TaggerModel {
  TaggerConfig config;
  std::vector<std::string> tags;
  PosVocabulary pos;
  std::size_t embedding_dim = 0;

  std::vector<ConvBank> conv;
  LstmParams lstm_forward;
  LstmParams lstm_backward;
  Tensor projection;       // 2h x T
  Tensor projection_bias;  // T
  Tensor transitions;      // T x T, CRF head only
  Tensor start;            // T, CRF head only
  Tensor stop;             // T, CRF head only

  // Owned embeddings, random_trainable mode only. words[0] is the unknown word.
  std::vector<std::string> words;
  Tensor embedding;

  // Where the frozen vectors were loaded from at training time.
  std::string embeddings_source;

  std::size_t tag_count() const { return tags.size(); }
  std::size_t word_channels() const { return embedding_dim + kShapeFeatureCount; }
  std::size_t lstm_input_width() const;

  // Every learned tensor with a stable name, in a fixed order.
  std::vector<NamedTensor> parameters();
  std::vector<std::pair<std::string, const Tensor*>> parameters() const;

  std::size_t tag_index(const std::string& label) const;
  std::size_t word_index(const std::string& form) const;
};

inline constexpr std::string_view kUnknownWord = "<UNK>";

// Glorot-uniform weights, zero biases and transitions. `words` is required
// (with kUnknownWord first) in random_trainable mode and ignored otherwise.
TaggerModel build(const TaggerConfig& config, std::size_t embedding_dim, PosVocabulary pos,
                  std::vector<std::string> tags, RngStream& rng,
                  std::vector<std::string> words = {});

// Vocabularies from the training corpus, then build().
TaggerModel initialize(const TaggerConfig& config, const Corpus& train,
                       std::size_t embedding_dim);

// Encoding for this model; fills word_ids when the model owns embeddings.
SentenceEncoding encode_for(const TaggerModel& model, const Sentence& sentence,
                            const EmbeddingTable& table);

// Tape handles for every parameter of one model.
struct BoundModel {
  std::vector<Var> conv_kernels;
  std::vector<Var> conv_biases;
  LstmWeights lstm_forward;
  LstmWeights lstm_backward;
  Var projection;
  Var projection_bias;
  Var transitions;
  Var start;
  Var stop;
  std::optional<Var> embedding;
};

// Leaves that accumulate gradients into the model's tensors.
BoundModel bind_parameters(Tape& tape, TaggerModel& model);
// Constant leaves; nothing flows back into the model.
BoundModel bind_constants(Tape& tape, const TaggerModel& model);

Var emissions(const TaggerModel& model, const BoundModel& bound, const SentenceEncoding& enc,
              Mode mode, RngStream& rng);
Var sentence_loss(const TaggerModel& model, const BoundModel& bound,
                  const SentenceEncoding& enc, std::span<const std::size_t> gold, Mode mode,
                  RngStream& rng);

// Value-level conveniences.
Tensor forward(const TaggerModel& model, const SentenceEncoding& enc, Mode mode, RngStream& rng);
double loss(const TaggerModel& model, const SentenceEncoding& enc, const TagSequence& gold);
TagSequence predict(const TaggerModel& model, const SentenceEncoding& enc);

// Maps labels to indices; throws DataError on a label outside the model's
// tag vocabulary.
std::vector<std::size_t> gold_indices(const TaggerModel& model, const TagSequence& gold);

struct EpochStats {
  double train_loss = 0.0;
  std::optional<double> dev_token_accuracy;
  std::optional<double> dev_mwe_f1;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t selected_epoch = 0;  // 1-based
};

struct TrainResult {
  TaggerModel model;
  TrainReport report;
};

// Trains with model.config. Dev predictions are decoded with orphan
// filtering. Throws DataError on an empty training corpus.
TrainResult train(TaggerModel model, const Corpus& train_corpus, const Corpus* dev_corpus,
                  const EmbeddingTable& table);

}  // namespace mwetag

#endif  // MWETAG_TAGGER_H_
