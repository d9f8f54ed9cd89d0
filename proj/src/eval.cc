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

#include "mwetag/eval.h"

#include <algorithm>
#include <cstdio>
#include <set>

#include "mwetag/error.h"
#include "mwetag/unicode.h"

namespace mwetag {
namespace {

void check_aligned(const Corpus& gold, const Corpus& pred) {
  if (gold.size() != pred.size())
    throw EvaluationError("gold has " + std::to_string(gold.size()) + " sentences, prediction " +
                          std::to_string(pred.size()));
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (gold[i].tokens.size() != pred[i].tokens.size())
      throw EvaluationError("sentence " + std::to_string(i + 1) + " has " +
                            std::to_string(gold[i].tokens.size()) + " gold tokens but " +
                            std::to_string(pred[i].tokens.size()) + " predicted");
}

Corpus restrict_to(const Corpus& corpus, const std::string& category) {
  Corpus out = corpus;
  for (Sentence& s : out)
    std::erase_if(s.vmwes, [&](const VmweInstance& v) { return v.category != category; });
  return out;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double f1(double precision, double recall) {
  const double denom = precision + recall;
  return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

Score make_score(std::size_t true_positives, std::size_t predicted, std::size_t gold) {
  Score s;
  s.true_positives = true_positives;
  s.predicted = predicted;
  s.gold = gold;
  s.precision = ratio(true_positives, predicted);
  s.recall = ratio(true_positives, gold);
  s.f1 = f1(s.precision, s.recall);
  return s;
}

Score mwe_scores(const Corpus& gold, const Corpus& pred) {
  check_aligned(gold, pred);
  std::size_t tp = 0, n_gold = 0, n_pred = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::multiset<std::vector<int>> gold_spans, pred_spans;
    for (const auto& v : gold[i].vmwes) gold_spans.insert(v.token_positions);
    for (const auto& v : pred[i].vmwes) pred_spans.insert(v.token_positions);
    n_gold += gold_spans.size();
    n_pred += pred_spans.size();
    for (auto it = gold_spans.begin(); it != gold_spans.end(); it = gold_spans.upper_bound(*it))
      tp += std::min(gold_spans.count(*it), pred_spans.count(*it));
  }
  return make_score(tp, n_pred, n_gold);
}

Score token_scores(const Corpus& gold, const Corpus& pred) {
  check_aligned(gold, pred);
  std::size_t tp = 0, n_gold = 0, n_pred = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::set<int> g, s;
    for (const auto& v : gold[i].vmwes) g.insert(v.token_positions.begin(), v.token_positions.end());
    for (const auto& v : pred[i].vmwes) s.insert(v.token_positions.begin(), v.token_positions.end());
    n_gold += g.size();
    n_pred += s.size();
    for (int p : s) tp += g.count(p);
  }
  return make_score(tp, n_pred, n_gold);
}

std::map<std::string, CategoryScores> per_category_scores(const Corpus& gold, const Corpus& pred) {
  check_aligned(gold, pred);
  std::set<std::string> categories;
  for (const Corpus* c : {&gold, &pred})
    for (const auto& s : *c)
      for (const auto& v : s.vmwes) categories.insert(v.category);
  std::map<std::string, CategoryScores> out;
  for (const auto& cat : categories) {
    const Corpus g = restrict_to(gold, cat);
    const Corpus p = restrict_to(pred, cat);
    out[cat] = {token_scores(g, p), mwe_scores(g, p)};
  }
  return out;
}

EvalReport evaluate(const Corpus& gold, const Corpus& pred) {
  return {token_scores(gold, pred), mwe_scores(gold, pred), per_category_scores(gold, pred)};
}

std::string lemma_key(const Sentence& sentence, const VmweInstance& instance) {
  std::vector<std::string> lemmas;
  for (int pos : instance.token_positions) {
    const Token& t = sentence.tokens.at(static_cast<std::size_t>(pos - 1));
    lemmas.push_back(unicode::to_lower(t.lemma == "_" ? t.form : t.lemma));
  }
  std::sort(lemmas.begin(), lemmas.end());
  std::string key;
  for (const auto& l : lemmas) {
    key += l;
    key += '\x1f';
  }
  return key;
}

SeenUnseenResult seen_unseen(const Corpus& train, const Corpus& gold_test, const Corpus& pred) {
  check_aligned(gold_test, pred);
  std::set<std::string> known;
  for (const auto& s : train)
    for (const auto& v : s.vmwes) known.insert(lemma_key(s, v));

  SeenUnseenResult out;
  Corpus gold_seen = gold_test, gold_unseen = gold_test;
  Corpus pred_seen = pred, pred_unseen = pred;
  for (std::size_t i = 0; i < gold_test.size(); ++i) {
    gold_seen[i].vmwes.clear();
    gold_unseen[i].vmwes.clear();
    for (std::size_t k = 0; k < gold_test[i].vmwes.size(); ++k) {
      const auto& v = gold_test[i].vmwes[k];
      if (known.count(lemma_key(gold_test[i], v))) {
        out.partition.seen.push_back({i, k});
        gold_seen[i].vmwes.push_back(v);
      } else {
        out.partition.unseen.push_back({i, k});
        gold_unseen[i].vmwes.push_back(v);
      }
    }
    pred_seen[i].vmwes.clear();
    pred_unseen[i].vmwes.clear();
    for (const auto& v : pred[i].vmwes)
      (known.count(lemma_key(pred[i], v)) ? pred_seen : pred_unseen)[i].vmwes.push_back(v);
  }
  out.partition.seen_fraction =
      ratio(out.partition.seen.size(), out.partition.seen.size() + out.partition.unseen.size());
  out.seen = evaluate(gold_seen, pred_seen);
  out.unseen = evaluate(gold_unseen, pred_unseen);
  return out;
}

namespace {

struct ScoreSum {
  double p = 0, r = 0, f = 0;
  std::size_t tp = 0, pred = 0, gold = 0, n = 0;

  void add(const Score& s) {
    p += s.precision;
    r += s.recall;
    f += s.f1;
    tp += s.true_positives;
    pred += s.predicted;
    gold += s.gold;
    ++n;
  }
  Score mean() const {
    Score s;
    const double k = static_cast<double>(n);
    s.precision = p / k;
    s.recall = r / k;
    s.f1 = f / k;
    s.true_positives = tp;
    s.predicted = pred;
    s.gold = gold;
    return s;
  }
};

}  // namespace

EvalReport macro_average(std::span<const EvalReport> reports) {
  if (reports.empty()) throw EvaluationError("macro average of no reports");
  ScoreSum token, mwe;
  std::map<std::string, std::pair<ScoreSum, ScoreSum>> cats;
  for (const auto& r : reports) {
    token.add(r.token);
    mwe.add(r.mwe);
    for (const auto& [cat, s] : r.per_category) {
      cats[cat].first.add(s.token);
      cats[cat].second.add(s.mwe);
    }
  }
  EvalReport out{token.mean(), mwe.mean(), {}};
  for (const auto& [cat, sums] : cats) out.per_category[cat] = {sums.first.mean(), sums.second.mean()};
  return out;
}

nlohmann::json score_to_json(const Score& s) {
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"true_positives", s.true_positives},
          {"false_positives", s.false_positives()},
          {"false_negatives", s.false_negatives()},
          {"predicted", s.predicted},
          {"gold", s.gold}};
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [cat, s] : report.per_category)
    cats[cat] = {{"token", score_to_json(s.token)}, {"mwe", score_to_json(s.mwe)}};
  return {{"token", score_to_json(report.token)},
          {"mwe", score_to_json(report.mwe)},
          {"per_category", cats}};
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string render_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::set<std::string> categories;
  std::size_t name_width = 4;
  for (const auto& [name, r] : rows) {
    name_width = std::max(name_width, name.size());
    for (const auto& [cat, s] : r.per_category) categories.insert(cat);
  }
  constexpr std::size_t kCol = 8;
  std::string out = std::string(name_width, ' ') + " |" + pad("Token-based", 3 * kCol) + " |" +
                    pad("MWE-based", 3 * kCol);
  for (const auto& cat : categories) out += " |" + pad(cat, 2 * kCol);
  out += '\n';
  out += std::string(name_width, ' ') + " |" + pad("P", kCol) + pad("R", kCol) + pad("F1", kCol) +
         " |" + pad("P", kCol) + pad("R", kCol) + pad("F1", kCol);
  for (std::size_t i = 0; i < categories.size(); ++i) out += " |" + pad("T", kCol) + pad("M", kCol);
  out += '\n';
  for (const auto& [name, r] : rows) {
    out += name + std::string(name_width - name.size(), ' ') + " |" + pad(pct(r.token.precision), kCol) +
           pad(pct(r.token.recall), kCol) + pad(pct(r.token.f1), kCol) + " |" +
           pad(pct(r.mwe.precision), kCol) + pad(pct(r.mwe.recall), kCol) + pad(pct(r.mwe.f1), kCol);
    for (const auto& cat : categories) {
      auto it = r.per_category.find(cat);
      if (it == r.per_category.end())
        out += " |" + pad("-", kCol) + pad("-", kCol);
      else
        out += " |" + pad(pct(it->second.token.f1), kCol) + pad(pct(it->second.mwe.f1), kCol);
    }
    out += '\n';
  }
  return out;
}

}  // namespace mwetag
