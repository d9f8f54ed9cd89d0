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

#ifndef MWETAG_EVAL_H_
#define MWETAG_EVAL_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mwetag/corpus.h"

namespace mwetag {

// Precision/recall/F1 with the counts they were computed from. Ratios with
// a zero denominator are 0.
struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;

  std::size_t false_positives() const { return predicted - true_positives; }
  std::size_t false_negatives() const { return gold - true_positives; }
};

struct CategoryScores {
  Score token;
  Score mwe;
};

struct EvalReport {
  Score token;
  Score mwe;
  std::map<std::string, CategoryScores> per_category;
};

double f1(double precision, double recall);
Score make_score(std::size_t true_positives, std::size_t predicted, std::size_t gold);

// Strict matching: an instance counts when its exact token set is predicted
// in the same sentence. Categories are ignored. Throws EvaluationError on
// misaligned corpora.
Score mwe_scores(const Corpus& gold, const Corpus& pred);

// Fuzzy matching over the union of MWE tokens per sentence.
Score token_scores(const Corpus& gold, const Corpus& pred);

// Both scores restricted to each category in gold or pred.
std::map<std::string, CategoryScores> per_category_scores(const Corpus& gold, const Corpus& pred);

EvalReport evaluate(const Corpus& gold, const Corpus& pred);

struct InstanceRef {
  std::size_t sentence = 0;
  std::size_t instance = 0;  // index into Sentence::vmwes
};

struct SeenUnseenPartition {
  std::vector<InstanceRef> seen;
  std::vector<InstanceRef> unseen;
  double seen_fraction = 0.0;
};

struct SeenUnseenResult {
  SeenUnseenPartition partition;
  EvalReport seen;
  EvalReport unseen;
};

// Lowercased lemma multiset of an instance (forms stand in for "_" lemmas),
// encoded as a sorted, separator-joined string.
std::string lemma_key(const Sentence& sentence, const VmweInstance& instance);

// A gold test instance is seen when its lemma multiset occurs among the
// training instances. Predicted instances go to the partition of their own
// lemma multiset, which for a strict match equals that of the gold instance.
SeenUnseenResult seen_unseen(const Corpus& train, const Corpus& gold_test, const Corpus& pred);

// Field-wise mean of P/R/F1 (F1 is averaged, not recomputed); counts are
// summed. Per-category entries average over the reports that contain them.
// Throws EvaluationError on an empty list.
EvalReport macro_average(std::span<const EvalReport> reports);

nlohmann::json score_to_json(const Score& s);
nlohmann::json report_to_json(const EvalReport& report);

// Plain-text table: one row per named report with token- and MWE-based
// P/R/F1 as percentages, then token (T) and MWE (M) F1 per category.
std::string render_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace mwetag

#endif  // MWETAG_EVAL_H_
