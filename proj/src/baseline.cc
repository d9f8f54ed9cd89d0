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

#include "mwetag/baseline.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "mwetag/chaincrf.h"
#include "mwetag/error.h"
#include "mwetag/rng.h"

namespace mwetag {
namespace {

enum class Field { kWord, kLemma, kPos };

std::string at(const Sentence& s, std::ptrdiff_t j, Field field) {
  const auto n = static_cast<std::ptrdiff_t>(s.tokens.size());
  if (j < 0) return j == -1 ? "BOS" : "BOS2";
  if (j >= n) return j == n ? "EOS" : "EOS2";
  const Token& t = s.tokens[static_cast<std::size_t>(j)];
  switch (field) {
    case Field::kWord: return t.form;
    case Field::kLemma: return t.lemma;
    case Field::kPos: return t.upos;
  }
  return {};
}

std::string offset_name(int k) { return k > 0 ? "+" + std::to_string(k) : std::to_string(k); }

void check_table(BaselineVariant variant, const EmbeddingTable* table) {
  if (variant == BaselineVariant::kTurian && !table)
    throw ContractViolation("the Turian baseline needs an embedding table");
  if (variant == BaselineVariant::kStandard && table)
    throw ContractViolation("the standard baseline takes no embedding table");
}

}  // namespace

PositionFeatures extract_features(const Sentence& sentence, std::size_t i,
                                  BaselineVariant variant, const EmbeddingTable* table) {
  if (i >= sentence.tokens.size()) throw ContractViolation("feature position out of range");
  check_table(variant, table);
  const auto c = static_cast<std::ptrdiff_t>(i);
  PositionFeatures out;
  out.symbolic.reserve(kSymbolicTemplateCount);

  const std::pair<char, Field> unigrams[] = {
      {'w', Field::kWord}, {'l', Field::kLemma}, {'p', Field::kPos}};
  for (const auto& [prefix, field] : unigrams)
    for (int k = -2; k <= 2; ++k)
      out.symbolic.push_back(std::string(1, prefix) + offset_name(k) + ":" + at(sentence, c + k, field));

  // Window-1 word and lemma bigrams.
  for (const auto& [prefix, field] : {unigrams[0], unigrams[1]})
    for (int k = -1; k <= 0; ++k) {
      const std::string p(1, prefix);
      out.symbolic.push_back(p + offset_name(k) + p + offset_name(k + 1) + ":" +
                             at(sentence, c + k, field) + "|" + at(sentence, c + k + 1, field));
    }

  // Window-2 POS bigrams and trigrams.
  for (int k = -2; k <= 1; ++k)
    out.symbolic.push_back("p" + offset_name(k) + "p" + offset_name(k + 1) + ":" +
                           at(sentence, c + k, Field::kPos) + "|" +
                           at(sentence, c + k + 1, Field::kPos));
  for (int k = -2; k <= 0; ++k)
    out.symbolic.push_back("p" + offset_name(k) + "p" + offset_name(k + 1) + "p" +
                           offset_name(k + 2) + ":" + at(sentence, c + k, Field::kPos) + "|" +
                           at(sentence, c + k + 1, Field::kPos) + "|" +
                           at(sentence, c + k + 2, Field::kPos));

  if (variant == BaselineVariant::kTurian) {
    const std::size_t dim = table->dimension();
    out.dense.assign(kWindowSize * dim, 0.0);
    for (int k = -2; k <= 2; ++k) {
      const std::ptrdiff_t j = c + k;
      if (j < 0 || j >= static_cast<std::ptrdiff_t>(sentence.tokens.size())) continue;
      auto vec = table->lookup(sentence.tokens[static_cast<std::size_t>(j)].form);
      std::copy(vec.begin(), vec.end(), out.dense.begin() + static_cast<std::ptrdiff_t>((k + 2) * dim));
    }
  }
  return out;
}

std::optional<std::size_t> BaselineModel::feature_index(const std::string& name) const {
  auto it = std::lower_bound(features.begin(), features.end(), name);
  if (it == features.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - features.begin());
}

BaselineObjective::BaselineObjective(const Corpus& corpus, const BaselineModel& shape,
                                     const EmbeddingTable* table)
    : labels_(shape.tags.size()),
      feature_count_(shape.features.size()),
      dense_width_(shape.variant == BaselineVariant::kTurian ? kWindowSize * shape.embedding_dim
                                                             : 0),
      sigma_(shape.sigma) {
  if (!(sigma_ > 0.0)) throw ContractViolation("sigma must be positive");
  dimension_ = feature_count_ * labels_ + dense_width_ * labels_ + labels_ * labels_ + 2 * labels_;
  for (const Sentence& s : corpus) {
    if (s.tokens.empty()) continue;
    Compiled c;
    const TagSequence tags = to_tags(s);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      PositionFeatures f = extract_features(s, i, shape.variant, table);
      std::vector<std::size_t> ids;
      for (const auto& name : f.symbolic)
        if (auto id = shape.feature_index(name)) ids.push_back(*id);
      c.features.push_back(std::move(ids));
      c.dense.insert(c.dense.end(), f.dense.begin(), f.dense.end());
      auto it = std::lower_bound(shape.tags.begin(), shape.tags.end(), tags[i]);
      if (it == shape.tags.end() || *it != tags[i])
        throw DataError("label '" + tags[i] + "' missing from the baseline tag set");
      c.gold.push_back(static_cast<std::size_t>(it - shape.tags.begin()));
    }
    sentences_.push_back(std::move(c));
  }
}

double BaselineObjective::evaluate(std::span<const double> w, std::span<double> grad) const {
  if (w.size() != dimension_ || grad.size() != dimension_)
    throw ContractViolation("baseline weight vector has the wrong length");
  const std::size_t T = labels_;
  const double* fw = w.data();
  const double* dw = fw + feature_count_ * T;
  const double* tw = dw + dense_width_ * T;
  const double* sw = tw + T * T;
  const double* ew = sw + T;
  double* fg = grad.data();
  double* dg = fg + feature_count_ * T;
  double* tg = dg + dense_width_ * T;
  double* sg = tg + T * T;
  double* eg = sg + T;

  double total = 0.0;
  const double inv_var = 1.0 / (sigma_ * sigma_);
  for (std::size_t k = 0; k < dimension_; ++k) {
    total += 0.5 * inv_var * w[k] * w[k];
    grad[k] = inv_var * w[k];
  }

  Transitions trans{Tensor({T, T}, std::vector<double>(tw, tw + T * T)),
                    Tensor({T}, std::vector<double>(sw, sw + T)),
                    Tensor({T}, std::vector<double>(ew, ew + T))};
  for (const Compiled& c : sentences_) {
    const std::size_t n = c.gold.size();
    Emissions e{Tensor({n, T})};
    for (std::size_t i = 0; i < n; ++i) {
      auto row = e.scores.row(i);
      for (std::size_t f : c.features[i])
        for (std::size_t y = 0; y < T; ++y) row[y] += fw[f * T + y];
      for (std::size_t j = 0; j < dense_width_; ++j) {
        const double x = c.dense[i * dense_width_ + j];
        if (x == 0.0) continue;
        for (std::size_t y = 0; y < T; ++y) row[y] += x * dw[j * T + y];
      }
    }
    const Marginals m = forward_backward(e, trans);
    total += m.log_partition - path_score(e, trans, c.gold);

    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> delta(m.node.row(i).begin(), m.node.row(i).end());
      delta[c.gold[i]] -= 1.0;
      for (std::size_t f : c.features[i])
        for (std::size_t y = 0; y < T; ++y) fg[f * T + y] += delta[y];
      for (std::size_t j = 0; j < dense_width_; ++j) {
        const double x = c.dense[i * dense_width_ + j];
        if (x == 0.0) continue;
        for (std::size_t y = 0; y < T; ++y) dg[j * T + y] += x * delta[y];
      }
    }
    for (std::size_t k = 0; k < T * T; ++k) tg[k] += m.transition[k];
    for (std::size_t i = 1; i < n; ++i) tg[c.gold[i - 1] * T + c.gold[i]] -= 1.0;
    for (std::size_t y = 0; y < T; ++y) {
      sg[y] += m.node(0, y);
      eg[y] += m.node(n - 1, y);
    }
    sg[c.gold.front()] -= 1.0;
    eg[c.gold.back()] -= 1.0;
  }
  return total;
}

std::vector<double> flatten_weights(const BaselineModel& m) {
  std::vector<double> w;
  for (const Tensor* t : {&m.feature_weights, &m.dense_weights, &m.transitions, &m.start, &m.stop})
    w.insert(w.end(), t->data().begin(), t->data().end());
  return w;
}

void unflatten_weights(BaselineModel& m, std::span<const double> w) {
  std::size_t offset = 0;
  for (Tensor* t : {&m.feature_weights, &m.dense_weights, &m.transitions, &m.start, &m.stop}) {
    if (offset + t->size() > w.size()) throw ContractViolation("weight vector too short");
    std::copy_n(w.begin() + static_cast<std::ptrdiff_t>(offset), t->size(), t->data().begin());
    offset += t->size();
  }
  if (offset != w.size()) throw ContractViolation("weight vector too long");
}

namespace {

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

BaselineModel baseline_skeleton(const Corpus& corpus, BaselineVariant variant,
                                const EmbeddingTable* table, double sigma) {
  check_table(variant, table);
  if (!(sigma > 0.0)) throw ContractViolation("sigma must be positive");
  BaselineModel model;
  model.variant = variant;
  model.sigma = sigma;
  model.tags = tag_vocabulary(corpus);
  std::set<std::string> names;
  for (const Sentence& s : corpus)
    for (std::size_t i = 0; i < s.tokens.size(); ++i)
      for (auto& f : extract_features(s, i, variant, table).symbolic) names.insert(std::move(f));
  model.features.assign(names.begin(), names.end());
  const std::size_t T = model.tags.size();
  model.feature_weights = Tensor({model.features.size(), T});
  model.embedding_dim = variant == BaselineVariant::kTurian ? table->dimension() : 0;
  model.dense_weights = Tensor({kWindowSize * model.embedding_dim, T});
  model.transitions = Tensor({T, T});
  model.start = Tensor({T});
  model.stop = Tensor({T});
  return model;
}

BaselineModel train_baseline(const Corpus& corpus, BaselineVariant variant,
                             const EmbeddingTable* table, const BaselineTrainOptions& options,
                             BaselineTrainStats* stats) {
  check_table(variant, table);
  if (std::none_of(corpus.begin(), corpus.end(), [](const Sentence& s) { return !s.tokens.empty(); }))
    throw DataError("training corpus is empty");

  BaselineModel model = baseline_skeleton(corpus, variant, table, options.sigma);
  const BaselineObjective objective(corpus, model, table);
  std::vector<double> w(objective.dimension());
  RngStream rng(options.seed, 7);
  for (double& v : w) v = rng.uniform(-options.init_scale, options.init_scale);

  // Gradient descent with Barzilai-Borwein trial steps and a non-monotone
  // Armijo backtracking line search.
  std::vector<double> grad(w.size()), trial(w.size()), trial_grad(w.size());
  double value = objective.evaluate(w, grad);
  std::deque<double> recent{value};
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  double step = 1.0 / std::max(1.0, max_norm(grad));
  BaselineTrainStats st;
  while (st.iterations < options.max_iterations && max_norm(grad) >= options.gradient_tolerance) {
    const double reference = *std::max_element(recent.begin(), recent.end());
    double g2 = 0.0;
    for (double g : grad) g2 += g * g;
    double trial_value = 0.0;
    for (int attempt = 0;; ++attempt) {
      for (std::size_t k = 0; k < w.size(); ++k) trial[k] = w[k] - step * grad[k];
      trial_value = objective.evaluate(trial, trial_grad);
      if (trial_value <= reference - kArmijo * step * g2 || attempt == 60) break;
      step *= 0.5;
    }
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double s = trial[k] - w[k];
      const double y = trial_grad[k] - grad[k];
      ss += s * s;
      sy += s * y;
    }
    w.swap(trial);
    grad.swap(trial_grad);
    value = trial_value;
    recent.push_back(value);
    if (recent.size() > kMemory) recent.pop_front();
    step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : step;
    ++st.iterations;
  }
  st.objective = value;
  st.gradient_norm = max_norm(grad);
  st.converged = st.gradient_norm < options.gradient_tolerance;
  if (stats) *stats = st;
  unflatten_weights(model, w);
  return model;
}

TagSequence tag_baseline(const BaselineModel& model, const Sentence& sentence,
                         const EmbeddingTable* table) {
  check_table(model.variant, table);
  if (table && table->dimension() != model.embedding_dim)
    throw ContractViolation("embedding table dimension does not match the baseline model");
  const std::size_t n = sentence.tokens.size(), T = model.tags.size();
  if (n == 0) return {};
  const std::size_t dense_width = model.dense_weights.rows();
  Emissions e{Tensor({n, T})};
  for (std::size_t i = 0; i < n; ++i) {
    const PositionFeatures f = extract_features(sentence, i, model.variant, table);
    auto row = e.scores.row(i);
    for (const auto& name : f.symbolic)
      if (auto id = model.feature_index(name))
        for (std::size_t y = 0; y < T; ++y) row[y] += model.feature_weights(*id, y);
    for (std::size_t j = 0; j < dense_width && j < f.dense.size(); ++j)
      for (std::size_t y = 0; y < T; ++y) row[y] += f.dense[j] * model.dense_weights(j, y);
  }
  const Decoded best = viterbi(e, Transitions{model.transitions, model.start, model.stop});
  TagSequence out;
  for (std::size_t y : best.path) out.push_back(model.tags[y]);
  return out;
}

}  // namespace mwetag
