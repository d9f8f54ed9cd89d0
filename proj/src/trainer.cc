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
#include <chrono>
#include <cmath>
#include <numeric>

#include "mwetag/error.h"
#include "mwetag/eval.h"
#include "mwetag/tagger.h"

namespace mwetag {
namespace {

struct Example {
  SentenceEncoding enc;
  std::vector<std::size_t> gold;
  // Orders sentences inside a batch and seeds their dropout masks, so
  // results depend on batch contents only, not on corpus order.
  std::string key;
  std::uint64_t key_hash = 0;
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Adam {
 public:
  Adam(const OptimizerConfig& cfg, const std::vector<NamedTensor>& params) : cfg_(cfg) {
    for (const auto& p : params) {
      m_.emplace_back(p.tensor->size(), 0.0);
      v_.emplace_back(p.tensor->size(), 0.0);
    }
  }

  void step(const std::vector<NamedTensor>& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Tensor& p = *params[k].tensor;
      if (p.grad.size() != p.size()) continue;
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = p.grad[i];
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
        p[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
      }
    }
  }

 private:
  OptimizerConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t t_ = 0;
};

struct DevScores {
  double token_accuracy = 0.0;
  double mwe_f1 = 0.0;
};

DevScores score_dev(const TaggerModel& model, const Corpus& dev,
                    const std::vector<SentenceEncoding>& encodings) {
  std::size_t correct = 0, total = 0;
  Corpus predicted;
  predicted.reserve(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    const TagSequence tags = predict(model, encodings[i]);
    const TagSequence gold = to_tags(dev[i]);
    for (std::size_t k = 0; k < tags.size(); ++k) correct += tags[k] == gold[k];
    total += tags.size();
    predicted.push_back(from_tags(tags, dev[i], true));
  }
  return {total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0,
          mwe_scores(dev, predicted).f1};
}

}  // namespace

TrainResult train(TaggerModel model, const Corpus& train_corpus, const Corpus* dev_corpus,
                  const EmbeddingTable& table) {
  const TaggerConfig& cfg = model.config;
  cfg.validate();
  std::vector<Example> examples;
  for (const Sentence& s : train_corpus) {
    if (s.tokens.empty()) continue;
    Example ex;
    ex.enc = encode_for(model, s, table);
    const TagSequence tags = to_tags(s);
    ex.gold = gold_indices(model, tags);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      ex.key += s.tokens[i].form;
      ex.key += '\x1f';
      ex.key += s.tokens[i].upos;
      ex.key += '\x1f';
      ex.key += tags[i];
      ex.key += '\x1e';
    }
    ex.key_hash = fnv1a(ex.key);
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw DataError("training corpus is empty");

  std::vector<SentenceEncoding> dev_encodings;
  if (dev_corpus) {
    for (const Sentence& s : *dev_corpus) {
      if (s.tokens.empty()) throw DataError("dev corpus contains an empty sentence");
      dev_encodings.push_back(encode_for(model, s, table));
    }
  }

  std::vector<NamedTensor> params = model.parameters();
  for (auto& p : params) {
    p.tensor->requires_grad = true;
    p.tensor->zero_grad();
  }
  Adam optimizer(cfg.optimizer, params);
  RngStream shuffle_rng(cfg.seed, 2);

  TrainResult result{model, {}};
  std::optional<double> best_f1;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffle(std::span<std::size_t>(order), shuffle_rng);
    double loss_total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<std::size_t> batch(order.begin() + begin, order.begin() + end);
      std::sort(batch.begin(), batch.end(), [&](std::size_t a, std::size_t b) {
        return examples[a].key < examples[b].key;
      });

      Tape tape;
      BoundModel bound = bind_parameters(tape, model);
      std::optional<Var> batch_loss;
      for (std::size_t idx : batch) {
        const Example& ex = examples[idx];
        RngStream dropout_rng(cfg.seed ^ ex.key_hash, 3 + epoch);
        Var l = sentence_loss(model, bound, ex.enc, ex.gold, Mode::kTrain, dropout_rng);
        loss_total += l.item();
        batch_loss = batch_loss ? add(*batch_loss, l) : l;
      }
      Var mean = scale(*batch_loss, 1.0 / static_cast<double>(batch.size()));
      tape.backward(mean);
      optimizer.step(params);
      for (auto& p : params) p.tensor->zero_grad();
    }

    EpochStats stats;
    stats.train_loss = loss_total / static_cast<double>(examples.size());
    if (dev_corpus) {
      const DevScores dev = score_dev(model, *dev_corpus, dev_encodings);
      stats.dev_token_accuracy = dev.token_accuracy;
      stats.dev_mwe_f1 = dev.mwe_f1;
    }
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.report.epochs.push_back(stats);

    if (dev_corpus && (!best_f1 || *stats.dev_mwe_f1 > *best_f1)) {
      best_f1 = stats.dev_mwe_f1;
      result.report.selected_epoch = epoch;
      result.model = model;
    }
  }
  if (!dev_corpus) {
    result.report.selected_epoch = cfg.epochs;
    result.model = std::move(model);
  }
  for (auto& p : result.model.parameters()) {
    p.tensor->grad.clear();
    p.tensor->requires_grad = false;
  }
  return result;
}

}  // namespace mwetag
