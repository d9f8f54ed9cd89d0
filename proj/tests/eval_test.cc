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

#include <gtest/gtest.h>

#include "mwetag/error.h"
#include "mwetag/eval.h"
#include "synthetic.h"

namespace mwetag {
namespace {

struct Inst {
  std::string category;
  std::vector<int> positions;
};

Sentence sentence(std::size_t n, const std::vector<Inst>& instances,
                  const std::vector<std::string>& lemmas = {}) {
  Sentence s;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string lemma = i < lemmas.size() ? lemmas[i] : "w" + std::to_string(i);
    s.tokens.push_back(testing::make_token(static_cast<int>(i + 1), lemma, "X", lemma));
  }
  for (const auto& inst : instances) testing::annotate(s, inst.category, inst.positions);
  return s;
}

void expect_score(const Score& s, double p, double r, double f) {
  EXPECT_NEAR(s.precision, p, 1e-12);
  EXPECT_NEAR(s.recall, r, 1e-12);
  EXPECT_NEAR(s.f1, f, 1e-12);
}

TEST(F1Test, Examples) {
  EXPECT_NEAR(f1(0.6608, 0.5182), 0.5809, 1e-4);
  EXPECT_NEAR(f1(0.7622, 0.5427), 0.6340, 1e-4);
  EXPECT_EQ(f1(0.3, 0.3), 0.3);
  EXPECT_EQ(f1(0.0, 0.7), 0.0);
  EXPECT_EQ(f1(0.0, 0.0), 0.0);
}

TEST(MweScoresTest, Examples) {
  expect_score(mwe_scores({sentence(5, {{"VID", {2, 4}}})}, {sentence(5, {{"VID", {2, 4}}})}), 1, 1, 1);
  expect_score(mwe_scores({sentence(5, {{"VID", {2, 4}}})}, {sentence(5, {{"VID", {2, 3}}})}), 0, 0, 0);
  const Score s = mwe_scores({sentence(7, {{"A", {1, 2}}, {"B", {5}}})},
                             {sentence(7, {{"A", {1, 2}}, {"X", {6}}})});
  expect_score(s, 0.5, 0.5, 0.5);
  EXPECT_EQ(s.true_positives, 1u);
  EXPECT_EQ(s.false_positives(), 1u);
  EXPECT_EQ(s.false_negatives(), 1u);
}

TEST(MweScoresTest, CategoryIgnoredForGeneralScore) {
  expect_score(mwe_scores({sentence(3, {{"VID", {1, 2}}})}, {sentence(3, {{"IRV", {1, 2}}})}), 1, 1, 1);
}

TEST(MweScoresTest, MisalignedCorporaAreRejected) {
  EXPECT_THROW(mwe_scores({sentence(3, {})}, {}), EvaluationError);
  EXPECT_THROW(token_scores({sentence(3, {})}, {sentence(4, {})}), EvaluationError);
}

TEST(MweScoresTest, SymmetricUnderSwap) {
  RngStream rng(41);
  for (int k = 0; k < 100; ++k) {
    Corpus g, p;
    for (int i = 0; i < 3; ++i) {
      Sentence a = testing::random_annotated_sentence(rng, 8);
      Sentence b = a;
      b.vmwes.clear();
      const Sentence other = testing::random_annotated_sentence(rng, 8);
      for (const auto& v : other.vmwes)
        if (v.token_positions.back() <= static_cast<int>(a.tokens.size())) b.vmwes.push_back(v);
      g.push_back(a);
      p.push_back(b);
    }
    const Score ab = mwe_scores(g, p), ba = mwe_scores(p, g);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.recall, ba.precision);
    EXPECT_EQ(ab.f1, ba.f1);
    const Score self = mwe_scores(g, g);
    if (self.gold > 0) expect_score(self, 1, 1, 1);
  }
}

TEST(TokenScoresTest, Examples) {
  const Corpus g{sentence(5, {{"VID", {2, 4}}})};
  expect_score(token_scores(g, g), 1, 1, 1);
  const Score partial = token_scores(g, {sentence(5, {{"VID", {2, 3}}})});
  expect_score(partial, 0.5, 0.5, 0.5);
  EXPECT_EQ(partial.true_positives, 1u);
  expect_score(token_scores(g, {sentence(5, {})}), 0, 0, 0);
}

TEST(TokenScoresTest, UnionOfOverlappingInstances) {
  const Corpus g{sentence(5, {{"VID", {1, 2}}, {"LVC.full", {2, 3}}})};
  const Score s = token_scores(g, {sentence(5, {{"VID", {2, 3, 4}}})});
  EXPECT_EQ(s.gold, 3u);
  EXPECT_EQ(s.predicted, 3u);
  EXPECT_EQ(s.true_positives, 2u);
}

TEST(PerCategoryTest, Examples) {
  const Corpus g{sentence(6, {{"VID", {1, 2}}, {"LVC.full", {4, 5}}})};
  const Corpus p{sentence(6, {{"VID", {1, 2}}, {"LVC.full", {4}}, {"IRV", {6}}})};
  const auto cats = per_category_scores(g, p);
  ASSERT_EQ(cats.size(), 3u);
  expect_score(cats.at("VID").mwe, 1, 1, 1);
  expect_score(cats.at("LVC.full").mwe, 0, 0, 0);
  expect_score(cats.at("LVC.full").token, 1, 0.5, 2.0 / 3.0);
  expect_score(cats.at("IRV").mwe, 0, 0, 0);
  EXPECT_EQ(cats.at("IRV").mwe.predicted, 1u);

  const Corpus single{sentence(4, {{"VID", {1, 3}}})};
  const Corpus single_pred{sentence(4, {{"VID", {1, 3}}, {"VID", {4}}})};
  const EvalReport r = evaluate(single, single_pred);
  EXPECT_EQ(r.per_category.at("VID").mwe.f1, r.mwe.f1);
  EXPECT_EQ(r.per_category.at("VID").token.f1, r.token.f1);
}

TEST(SeenUnseenTest, LemmaMultisetDecidesSeen) {
  const Corpus train{sentence(3, {{"LVC.full", {1, 3}}}, {"take", "a", "shower"})};
  const Corpus gold{sentence(3, {{"LVC.full", {1, 3}}}, {"Shower", "a", "TAKE"}),
                    sentence(2, {{"LVC.full", {1, 2}}}, {"make", "decision"})};
  const SeenUnseenResult r = seen_unseen(train, gold, gold);
  ASSERT_EQ(r.partition.seen.size(), 1u);
  ASSERT_EQ(r.partition.unseen.size(), 1u);
  EXPECT_EQ(r.partition.seen[0].sentence, 0u);
  EXPECT_EQ(r.partition.unseen[0].sentence, 1u);
  EXPECT_EQ(r.partition.seen_fraction, 0.5);
}

TEST(SeenUnseenTest, FormReplacesMissingLemma) {
  Sentence s = sentence(2, {}, {"Kick", "bucket"});
  s.tokens[0].lemma = "_";
  testing::annotate(s, "VID", {1, 2});
  EXPECT_EQ(lemma_key(s, s.vmwes[0]), lemma_key(sentence(2, {{"VID", {1, 2}}}, {"kick", "bucket"}),
                                                 VmweInstance{1, "VID", {1, 2}}));
}

TEST(SeenUnseenTest, AllSeenMatchesOverall) {
  const Corpus train{sentence(3, {{"VID", {1, 2}}}, {"a", "b", "c"})};
  const Corpus gold{sentence(3, {{"VID", {1, 2}}}, {"a", "b", "c"})};
  const Corpus pred{sentence(3, {{"VID", {1, 2}}, {"VID", {3}}}, {"a", "b", "c"})};
  const SeenUnseenResult r = seen_unseen(train, gold, pred);
  EXPECT_TRUE(r.partition.unseen.empty());
  EXPECT_EQ(r.partition.seen_fraction, 1.0);
  EXPECT_EQ(r.seen.mwe.recall, 1.0);
  EXPECT_EQ(r.seen.mwe.true_positives, 1u);
  // The unmatched prediction {c} is unseen by its own lemmas.
  EXPECT_EQ(r.unseen.mwe.predicted, 1u);
}

TEST(SeenUnseenTest, FourInstancesSplitEvenly) {
  const Corpus train{sentence(4, {{"VID", {1, 2}}, {"LVC.full", {3, 4}}}, {"a", "b", "c", "d"})};
  const Corpus gold{sentence(4, {{"VID", {1, 2}}, {"VID", {3, 4}}}, {"a", "b", "x", "y"}),
                    sentence(4, {{"LVC.full", {1, 2}}, {"LVC.full", {3, 4}}}, {"d", "c", "p", "q"})};
  const Corpus pred{sentence(4, {{"VID", {1, 2}}}, {"a", "b", "x", "y"}),
                    sentence(4, {{"LVC.full", {3, 4}}}, {"d", "c", "p", "q"})};
  const SeenUnseenResult r = seen_unseen(train, gold, pred);
  EXPECT_EQ(r.partition.seen.size(), 2u);
  EXPECT_EQ(r.partition.unseen.size(), 2u);
  EXPECT_EQ(r.partition.seen_fraction, 0.5);
  expect_score(r.seen.mwe, 1.0, 0.5, 2.0 / 3.0);
  expect_score(r.unseen.mwe, 1.0, 0.5, 2.0 / 3.0);
}

EvalReport report_with(double p, double r, double f) {
  EvalReport e;
  e.mwe = {p, r, f, 1, 2, 3};
  e.token = {p / 2, r / 2, f / 2, 2, 3, 4};
  return e;
}

TEST(MacroAverageTest, Examples) {
  const EvalReport one = report_with(0.2, 0.4, 0.3);
  const EvalReport self = macro_average(std::vector<EvalReport>{one});
  EXPECT_EQ(self.mwe.f1, 0.3);
  EXPECT_EQ(self.token.precision, 0.1);

  const EvalReport two = macro_average(std::vector<EvalReport>{report_with(0, 0, 0.4), report_with(0, 0, 0.6)});
  EXPECT_NEAR(two.mwe.f1, 0.5, 1e-15);

  const auto three = macro_average(std::vector<EvalReport>{
      report_with(0.9, 0.1, 0.18), report_with(0.5, 0.5, 0.5), report_with(0.1, 0.3, 0.15)});
  EXPECT_NEAR(three.mwe.precision, 0.5, 1e-15);
  EXPECT_NEAR(three.mwe.recall, 0.3, 1e-15);
  EXPECT_NEAR(three.mwe.f1, 0.83 / 3.0, 1e-15);  // not f1(0.5, 0.3)
  EXPECT_EQ(three.mwe.gold, 9u);
  EXPECT_THROW(macro_average(std::vector<EvalReport>{}), EvaluationError);
}

TEST(RenderTest, PercentagesWithTwoDecimals) {
  const Corpus g{sentence(5, {{"VID", {2, 4}}})};
  const Corpus p{sentence(5, {{"VID", {2, 3}}})};
  const std::string table = render_table({{"EN", evaluate(g, p)}});
  EXPECT_NE(table.find("50.00"), std::string::npos);
  EXPECT_NE(table.find("0.00"), std::string::npos);
  EXPECT_NE(table.find("VID"), std::string::npos);
  const auto j = report_to_json(evaluate(g, p));
  EXPECT_EQ(j["token"]["true_positives"], 1);
}

}  // namespace
}  // namespace mwetag
