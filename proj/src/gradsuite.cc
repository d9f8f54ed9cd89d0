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

#include "mwetag/gradsuite.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwetag/autodiff.h"
#include "mwetag/baseline.h"
#include "mwetag/chaincrf.h"
#include "mwetag/corpus.h"
#include "mwetag/rng.h"

namespace mwetag {
namespace {

Tensor random_tensor(std::vector<std::size_t> shape, RngStream& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

// Projects a matrix output onto fixed random weights so every output
// coordinate receives a distinct upstream gradient.
Var project(Var y, const Tensor& weights) { return sum(mul(y, y.tape().constant(weights))); }

double check(const LossFn& f, std::initializer_list<Tensor*> params) {
  std::vector<Tensor*> list(params);
  return grad_check(f, list);
}

double check_dense(RngStream& rng) {
  Tensor x = random_tensor({4, 3}, rng), w = random_tensor({3, 5}, rng),
         b = random_tensor({5}, rng), r = random_tensor({4, 5}, rng);
  return check(
      [&](Tape& t) {
        return project(dense(t.parameter(x), t.parameter(w), t.parameter(b), Activation::kTanh), r);
      },
      {&x, &w, &b});
}

double check_conv(RngStream& rng) {
  Tensor x = random_tensor({5, 3}, rng), k2 = random_tensor({2, 3, 2}, rng),
         k3 = random_tensor({3, 3, 2}, rng), b = random_tensor({2}, rng),
         r = random_tensor({5, 4}, rng);
  return check(
      [&](Tape& t) {
        Var xv = t.parameter(x), bv = t.parameter(b);
        const Var parts[] = {conv1d_same(xv, t.parameter(k2), bv),
                             conv1d_same(xv, t.parameter(k3), bv)};
        return project(concat_cols(parts), r);
      },
      {&x, &k2, &k3, &b});
}

double check_bilstm(RngStream& rng, std::uint64_t seed) {
  const std::size_t d = 3, h = 2;
  Tensor x = random_tensor({4, d}, rng), r = random_tensor({4, 2 * h}, rng);
  Tensor fi = random_tensor({d, 4 * h}, rng), fr = random_tensor({h, 4 * h}, rng),
         fb = random_tensor({4 * h}, rng);
  Tensor bi = random_tensor({d, 4 * h}, rng), br = random_tensor({h, 4 * h}, rng),
         bb = random_tensor({4 * h}, rng);
  return check(
      [&](Tape& t) {
        RngStream masks(seed, 11);
        LstmWeights fwd{t.parameter(fi), t.parameter(fr), t.parameter(fb)};
        LstmWeights bwd{t.parameter(bi), t.parameter(br), t.parameter(bb)};
        return project(bilstm(t.parameter(x), fwd, bwd, {0.3, 0.2}, Mode::kTrain, masks), r);
      },
      {&x, &fi, &fr, &fb, &bi, &br, &bb});
}

double check_softmax_ce(RngStream& rng) {
  Tensor logits = random_tensor({4, 3}, rng, 2.0);
  std::vector<std::size_t> gold;
  for (int i = 0; i < 4; ++i) gold.push_back(rng.below(3));
  return check([&](Tape& t) { return cross_entropy(softmax_rows(t.parameter(logits)), gold); },
               {&logits});
}

double check_crf(RngStream& rng) {
  Tensor e = random_tensor({4, 3}, rng, 2.0), tr = random_tensor({3, 3}, rng, 2.0),
         st = random_tensor({3}, rng, 2.0), sp = random_tensor({3}, rng, 2.0);
  std::vector<std::size_t> gold;
  for (int i = 0; i < 4; ++i) gold.push_back(rng.below(3));
  return check(
      [&](Tape& t) {
        return crf_nll(t.parameter(e), t.parameter(tr), t.parameter(st), t.parameter(sp), gold);
      },
      {&e, &tr, &st, &sp});
}

double min_conv_preactivation(const TaggerModel& model, const SentenceEncoding& enc) {
  Tensor words({enc.length(), model.word_channels()});
  for (std::size_t i = 0; i < enc.length(); ++i)
    for (std::size_t c = 0; c < model.word_channels(); ++c) {
      const bool own = !enc.word_ids.empty() && c < model.embedding_dim;
      words(i, c) = own ? model.embedding(enc.word_ids[i], c) : enc.word_input(i, c);
    }
  Tape tape;
  const Var x = tape.constant(words);
  double lowest = std::numeric_limits<double>::infinity();
  for (const ConvBank& bank : model.conv)
    for (double z : conv1d_same(x, tape.constant(bank.kernel), tape.constant(bank.bias)).value().data())
      lowest = std::min(lowest, std::abs(z));
  return lowest;
}

double check_tagger(RngStream& rng, std::uint64_t seed, Head head, bool own_embeddings) {
  TaggerConfig config = tiny_tagger_config(head);
  std::vector<std::string> words;
  if (own_embeddings) {
    config.embedding_mode = EmbeddingMode::kRandomTrainable;
    config.embeddings_trainable = true;
    words = {std::string(kUnknownWord), "a", "b", "c"};
  }
  const std::size_t n = 3, dim = 5;
  const PosVocabulary pos({std::string(PosVocabulary::kUnknown), "NOUN", "VERB"});
  const std::vector<std::string> tags{"B-VID", "I-VID", "O"};
  RngStream init(seed, 1);
  TaggerModel model;
  SentenceEncoding enc;
  // Central differences are meaningless across a relu kink, so draws whose
  // convolution pre-activations come within kMargin of zero are rejected.
  constexpr double kMargin = 1e-3;
  do {
    model = build(config, dim, pos, tags, init, words);
    // Non-zero biases and transitions so their gradients are exercised away
    // from the initial symmetric point.
    for (auto& p : model.parameters())
      for (double& v : p.tensor->data()) v += rng.uniform(-0.3, 0.3);

    enc = SentenceEncoding{};
    enc.word_input = Tensor({n, model.word_channels()});
    enc.pos_input = Tensor({n, model.pos.size()});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < dim; ++c) enc.word_input(i, c) = rng.uniform(-1.0, 1.0);
      for (std::size_t b = 0; b < kShapeFeatureCount; ++b)
        enc.word_input(i, dim + b) = static_cast<double>(rng.below(2));
      enc.pos_input(i, rng.below(model.pos.size())) = 1.0;
      if (own_embeddings) enc.word_ids.push_back(rng.below(words.size()));
    }
  } while (min_conv_preactivation(model, enc) < kMargin);
  std::vector<std::size_t> gold;
  for (std::size_t i = 0; i < n; ++i) gold.push_back(rng.below(3));

  std::vector<Tensor*> params;
  for (auto& p : model.parameters()) params.push_back(p.tensor);
  return grad_check(
      [&](Tape& t) {
        RngStream masks(seed, 12);
        BoundModel bound = bind_parameters(t, model);
        return sentence_loss(model, bound, enc, gold, Mode::kTrain, masks);
      },
      params);
}

Corpus toy_corpus() {
  return parse_cupt_string(
      "1\tHe\the\tPRON\t_\t_\t_\t_\t_\t_\t*\n"
      "2\ttook\ttake\tVERB\t_\t_\t_\t_\t_\t_\t1:LVC.full\n"
      "3\ta\ta\tDET\t_\t_\t_\t_\t_\t_\t*\n"
      "4\tshower\tshower\tNOUN\t_\t_\t_\t_\t_\t_\t1\n"
      "\n"
      "1\tShe\tshe\tPRON\t_\t_\t_\t_\t_\t_\t*\n"
      "2\tgave\tgive\tVERB\t_\t_\t_\t_\t_\t_\t1:VID\n"
      "3\tup\tup\tADP\t_\t_\t_\t_\t_\t_\t1\n"
      "\n");
}

double check_baseline(RngStream& rng) {
  const Corpus corpus = toy_corpus();
  EmbeddingTable table(2);
  for (const char* w : {"He", "took", "shower", "gave"}) {
    const double v[] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    table.insert(w, v);
  }
  const BaselineModel shape = baseline_skeleton(corpus, BaselineVariant::kTurian, &table, 2.0);
  const BaselineObjective objective(corpus, shape, &table);
  std::vector<double> w(objective.dimension()), grad(w.size()), scratch(w.size());
  for (double& v : w) v = rng.uniform(-1.0, 1.0);
  objective.evaluate(w, grad);
  const double eps = 1e-4;
  double worst = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double original = w[k];
    w[k] = original + eps;
    const double up = objective.evaluate(w, scratch);
    w[k] = original - eps;
    const double down = objective.evaluate(w, scratch);
    w[k] = original;
    const double numeric = (up - down) / (2.0 * eps);
    worst = std::max(worst, std::abs(grad[k] - numeric) /
                                std::max(1e-8, std::abs(grad[k]) + std::abs(numeric)));
  }
  return worst;
}

}  // namespace

TaggerConfig tiny_tagger_config(Head head) {
  TaggerConfig c;
  c.filter_widths = {2, 3};
  c.filters_per_width = 3;
  c.lstm_hidden = 4;
  c.dropout = 0.3;
  c.recurrent_dropout = 0.2;
  c.head = head;
  return c;
}

std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed) {
  RngStream rng(seed, 10);
  std::vector<GradCheckEntry> out;
  out.push_back({"dense", check_dense(rng)});
  out.push_back({"conv1d_same", check_conv(rng)});
  out.push_back({"bilstm", check_bilstm(rng, seed)});
  out.push_back({"softmax_cross_entropy", check_softmax_ce(rng)});
  out.push_back({"crf_nll", check_crf(rng)});
  out.push_back({"tagger_softmax", check_tagger(rng, seed, Head::kSoftmax, false)});
  out.push_back({"tagger_crf", check_tagger(rng, seed, Head::kCrf, false)});
  out.push_back({"tagger_trainable_embeddings", check_tagger(rng, seed, Head::kCrf, true)});
  out.push_back({"baseline_objective", check_baseline(rng)});
  return out;
}

}  // namespace mwetag
