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

#include "mwetag/tagger.h"

#include <algorithm>
#include <cmath>

#include "mwetag/chaincrf.h"
#include "mwetag/error.h"

namespace mwetag {

void TaggerConfig::validate() const {
  auto fail = [](const std::string& what) { throw ContractViolation("tagger config: " + what); };
  if (filter_widths.empty()) fail("at least one filter width is required");
  for (std::size_t w : filter_widths)
    if (w == 0) fail("filter widths must be positive");
  if (filters_per_width == 0) fail("filters_per_width must be positive");
  if (lstm_hidden == 0) fail("lstm_hidden must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (!(recurrent_dropout >= 0.0 && recurrent_dropout < 1.0))
    fail("recurrent_dropout must lie in [0, 1)");
  if (pos_merge != "before_lstm") fail("unsupported pos_merge '" + pos_merge + "'");
  if (embedding_mode == EmbeddingMode::kPretrained && embeddings_trainable)
    fail("pretrained embeddings are never trainable");
  if (embedding_mode == EmbeddingMode::kRandomTrainable && !embeddings_trainable)
    fail("random embeddings must be trainable");
  if (optimizer.name != "adam") fail("unsupported optimizer '" + optimizer.name + "'");
  if (!(optimizer.learning_rate > 0.0)) fail("learning rate must be positive");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 &&
        optimizer.beta2 < 1.0))
    fail("optimizer betas must lie in [0, 1)");
  if (!(optimizer.epsilon > 0.0)) fail("optimizer epsilon must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
}

std::size_t TaggerModel::lstm_input_width() const {
  return config.filter_widths.size() * config.filters_per_width + pos.size();
}

std::vector<NamedTensor> TaggerModel::parameters() {
  std::vector<NamedTensor> out;
  for (auto& bank : conv) {
    const std::string prefix = "conv" + std::to_string(bank.width) + ".";
    out.push_back({prefix + "kernel", &bank.kernel});
    out.push_back({prefix + "bias", &bank.bias});
  }
  out.push_back({"lstm_forward.input", &lstm_forward.input});
  out.push_back({"lstm_forward.recurrent", &lstm_forward.recurrent});
  out.push_back({"lstm_forward.bias", &lstm_forward.bias});
  out.push_back({"lstm_backward.input", &lstm_backward.input});
  out.push_back({"lstm_backward.recurrent", &lstm_backward.recurrent});
  out.push_back({"lstm_backward.bias", &lstm_backward.bias});
  out.push_back({"projection.weight", &projection});
  out.push_back({"projection.bias", &projection_bias});
  if (config.head == Head::kCrf) {
    out.push_back({"crf.transitions", &transitions});
    out.push_back({"crf.start", &start});
    out.push_back({"crf.stop", &stop});
  }
  if (config.embedding_mode == EmbeddingMode::kRandomTrainable)
    out.push_back({"embedding", &embedding});
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> TaggerModel::parameters() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (const auto& p : const_cast<TaggerModel*>(this)->parameters())
    out.emplace_back(p.name, p.tensor);
  return out;
}

std::size_t TaggerModel::tag_index(const std::string& label) const {
  auto it = std::lower_bound(tags.begin(), tags.end(), label);
  if (it == tags.end() || *it != label)
    throw DataError("label '" + label + "' is not in the model's tag vocabulary");
  return static_cast<std::size_t>(it - tags.begin());
}

std::size_t TaggerModel::word_index(const std::string& form) const {
  auto it = std::lower_bound(words.begin() + 1, words.end(), form);
  if (it == words.end() || *it != form) return 0;
  return static_cast<std::size_t>(it - words.begin());
}

namespace {

Tensor glorot(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
              RngStream& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

LstmParams make_lstm(std::size_t d, std::size_t h, RngStream& rng) {
  LstmParams p;
  p.input = glorot({d, 4 * h}, d, 4 * h, rng);
  p.recurrent = glorot({h, 4 * h}, h, 4 * h, rng);
  p.bias = Tensor({4 * h});
  return p;
}

}  // namespace

TaggerModel build(const TaggerConfig& config, std::size_t embedding_dim, PosVocabulary pos,
                  std::vector<std::string> tags, RngStream& rng, std::vector<std::string> words) {
  config.validate();
  if (embedding_dim == 0) throw ContractViolation("embedding dimension must be positive");
  if (tags.empty()) throw ContractViolation("tag vocabulary must not be empty");
  if (!std::is_sorted(tags.begin(), tags.end()))
    throw ContractViolation("tag vocabulary must be sorted");

  TaggerModel m;
  m.config = config;
  m.tags = std::move(tags);
  m.pos = std::move(pos);
  m.embedding_dim = embedding_dim;

  const std::size_t channels = m.word_channels();
  const std::size_t filters = config.filters_per_width;
  for (std::size_t width : config.filter_widths) {
    ConvBank bank;
    bank.width = width;
    bank.kernel = glorot({width, channels, filters}, width * channels, width * filters, rng);
    bank.bias = Tensor({filters});
    m.conv.push_back(std::move(bank));
  }
  const std::size_t h = config.lstm_hidden;
  m.lstm_forward = make_lstm(m.lstm_input_width(), h, rng);
  m.lstm_backward = make_lstm(m.lstm_input_width(), h, rng);
  const std::size_t labels = m.tags.size();
  m.projection = glorot({2 * h, labels}, 2 * h, labels, rng);
  m.projection_bias = Tensor({labels});
  if (config.head == Head::kCrf) {
    m.transitions = Tensor({labels, labels});
    m.start = Tensor({labels});
    m.stop = Tensor({labels});
  }
  if (config.embedding_mode == EmbeddingMode::kRandomTrainable) {
    if (words.empty() || words.front() != kUnknownWord)
      throw ContractViolation("trainable embeddings need a word list starting with <UNK>");
    if (!std::is_sorted(words.begin() + 1, words.end()))
      throw ContractViolation("word list must be sorted after <UNK>");
    m.words = std::move(words);
    m.embedding = Tensor({m.words.size(), embedding_dim});
    for (double& v : m.embedding.data()) v = rng.uniform(-0.05, 0.05);
  }
  return m;
}

TaggerModel initialize(const TaggerConfig& config, const Corpus& train,
                       std::size_t embedding_dim) {
  if (train.empty()) throw DataError("training corpus is empty");
  std::vector<std::string> words;
  if (config.embedding_mode == EmbeddingMode::kRandomTrainable) {
    std::vector<std::string> forms;
    for (const auto& s : train)
      for (const auto& t : s.tokens) forms.push_back(t.form);
    std::sort(forms.begin(), forms.end());
    forms.erase(std::unique(forms.begin(), forms.end()), forms.end());
    forms.erase(std::remove(forms.begin(), forms.end(), std::string(kUnknownWord)), forms.end());
    words.push_back(std::string(kUnknownWord));
    words.insert(words.end(), forms.begin(), forms.end());
  }
  RngStream rng(config.seed, 1);
  return build(config, embedding_dim, pos_vocabulary(train), tag_vocabulary(train), rng,
               std::move(words));
}

SentenceEncoding encode_for(const TaggerModel& model, const Sentence& sentence,
                            const EmbeddingTable& table) {
  if (model.config.embedding_mode == EmbeddingMode::kRandomTrainable) {
    EmbeddingTable empty(model.embedding_dim);
    SentenceEncoding enc = encode(sentence, empty, model.pos);
    for (const Token& t : sentence.tokens) enc.word_ids.push_back(model.word_index(t.form));
    return enc;
  }
  if (table.dimension() != model.embedding_dim)
    throw DataError("embedding dimension " + std::to_string(table.dimension()) +
                    " does not match the model's " + std::to_string(model.embedding_dim));
  return encode(sentence, table, model.pos);
}

namespace {

template <typename Leaf>
BoundModel bind_with(const TaggerModel& model, Leaf leaf) {
  BoundModel b;
  for (const auto& bank : model.conv) {
    b.conv_kernels.push_back(leaf(bank.kernel));
    b.conv_biases.push_back(leaf(bank.bias));
  }
  b.lstm_forward = {leaf(model.lstm_forward.input), leaf(model.lstm_forward.recurrent),
                    leaf(model.lstm_forward.bias)};
  b.lstm_backward = {leaf(model.lstm_backward.input), leaf(model.lstm_backward.recurrent),
                     leaf(model.lstm_backward.bias)};
  b.projection = leaf(model.projection);
  b.projection_bias = leaf(model.projection_bias);
  if (model.config.head == Head::kCrf) {
    b.transitions = leaf(model.transitions);
    b.start = leaf(model.start);
    b.stop = leaf(model.stop);
  }
  if (model.config.embedding_mode == EmbeddingMode::kRandomTrainable)
    b.embedding = leaf(model.embedding);
  return b;
}

}  // namespace

BoundModel bind_parameters(Tape& tape, TaggerModel& model) {
  for (auto& p : model.parameters()) p.tensor->requires_grad = true;
  return bind_with(model, [&](const Tensor& t) { return tape.parameter(const_cast<Tensor&>(t)); });
}

BoundModel bind_constants(Tape& tape, const TaggerModel& model) {
  return bind_with(model, [&](const Tensor& t) { return tape.constant(t); });
}

Var emissions(const TaggerModel& model, const BoundModel& bound, const SentenceEncoding& enc,
              Mode mode, RngStream& rng) {
  Tape& tape = bound.projection.tape();
  const std::size_t n = enc.length();
  if (n == 0 || enc.word_input.cols() != model.word_channels() ||
      enc.pos_input.rows() != n || enc.pos_input.cols() != model.pos.size())
    throw ContractViolation("sentence encoding " + shape_string(enc.word_input.shape()) + " / " +
                            shape_string(enc.pos_input.shape()) + " does not fit the model");

  Var words;
  if (bound.embedding) {
    if (enc.word_ids.size() != n) throw ContractViolation("encoding lacks word ids");
    Tensor shape_bits({n, kShapeFeatureCount});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t b = 0; b < kShapeFeatureCount; ++b)
        shape_bits(i, b) = enc.word_input(i, model.embedding_dim + b);
    const Var parts[] = {gather_rows(*bound.embedding, enc.word_ids),
                         tape.constant(std::move(shape_bits))};
    words = concat_cols(parts);
  } else {
    words = tape.constant(enc.word_input);
  }

  std::vector<Var> features;
  for (std::size_t k = 0; k < bound.conv_kernels.size(); ++k)
    features.push_back(activate(conv1d_same(words, bound.conv_kernels[k], bound.conv_biases[k]),
                                model.config.conv_activation));
  features.push_back(tape.constant(enc.pos_input));
  Var merged = concat_cols(features);
  Var hidden = bilstm(merged, bound.lstm_forward, bound.lstm_backward,
                      {model.config.dropout, model.config.recurrent_dropout}, mode, rng);
  return dense(hidden, bound.projection, bound.projection_bias, Activation::kIdentity);
}

Var sentence_loss(const TaggerModel& model, const BoundModel& bound,
                  const SentenceEncoding& enc, std::span<const std::size_t> gold, Mode mode,
                  RngStream& rng) {
  Var scores = emissions(model, bound, enc, mode, rng);
  if (model.config.head == Head::kCrf)
    return crf_nll(scores, bound.transitions, bound.start, bound.stop, gold);
  return cross_entropy(softmax_rows(scores), gold);
}

Tensor forward(const TaggerModel& model, const SentenceEncoding& enc, Mode mode, RngStream& rng) {
  Tape tape;
  BoundModel bound = bind_constants(tape, model);
  return emissions(model, bound, enc, mode, rng).value();
}

std::vector<std::size_t> gold_indices(const TaggerModel& model, const TagSequence& gold) {
  std::vector<std::size_t> out;
  out.reserve(gold.size());
  for (const auto& label : gold) out.push_back(model.tag_index(label));
  return out;
}

double loss(const TaggerModel& model, const SentenceEncoding& enc, const TagSequence& gold) {
  if (gold.size() != enc.length())
    throw ContractViolation("gold length does not match the encoding");
  const auto indices = gold_indices(model, gold);
  Tape tape;
  BoundModel bound = bind_constants(tape, model);
  RngStream unused(0);
  return sentence_loss(model, bound, enc, indices, Mode::kEval, unused).item();
}

TagSequence predict(const TaggerModel& model, const SentenceEncoding& enc) {
  RngStream unused(0);
  const Tensor scores = forward(model, enc, Mode::kEval, unused);
  std::vector<std::size_t> path;
  if (model.config.head == Head::kCrf) {
    path = viterbi(Emissions{scores}, Transitions{model.transitions, model.start, model.stop}).path;
  } else {
    for (std::size_t i = 0; i < scores.rows(); ++i) {
      auto row = scores.row(i);
      path.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) -
                                              row.begin()));
    }
  }
  TagSequence out;
  for (std::size_t y : path) out.push_back(model.tags[y]);
  return out;
}

}  // namespace mwetag
