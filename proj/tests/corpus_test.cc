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

#include <fstream>
#include <set>
#include <sstream>

#include "mwetag/corpus.h"
#include "mwetag/error.h"
#include "mwetag/rng.h"
#include "synthetic.h"

namespace mwetag {
namespace {

using testing::cupt_sentence;
using testing::spans;

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(MWETAG_FIXTURE_DIR) + "/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::vector<std::string> kFive{"a", "b", "c", "d", "e"};

TEST(ParseCuptTest, DiscontinuousInstance) {
  const Corpus c = parse_cupt_string(cupt_sentence(kFive, {"*", "2:VID", "*", "2", "*"}));
  ASSERT_EQ(c.size(), 1u);
  ASSERT_EQ(c[0].vmwes.size(), 1u);
  EXPECT_EQ(c[0].vmwes[0].vmwe_id, 2);
  EXPECT_EQ(c[0].vmwes[0].category, "VID");
  EXPECT_EQ(c[0].vmwes[0].token_positions, (std::vector<int>{2, 4}));
}

TEST(ParseCuptTest, UnannotatedSentence) {
  const Corpus c = parse_cupt_string(cupt_sentence({"x", "y"}, {"*", "*"}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_TRUE(c[0].vmwes.empty());
  const Corpus u = parse_cupt_string(cupt_sentence({"x", "y"}, {"_", "_"}));
  EXPECT_TRUE(u[0].vmwes.empty());
}

TEST(ParseCuptTest, TokenInTwoInstances) {
  const Corpus c =
      parse_cupt_string(cupt_sentence({"a", "b", "c"}, {"1:VID;2:LVC.full", "1", "2"}));
  ASSERT_EQ(c[0].vmwes.size(), 2u);
  EXPECT_EQ(spans(c[0]), (decltype(spans(c[0])){{"LVC.full", {1, 3}}, {"VID", {1, 2}}}));
}

TEST(ParseCuptTest, Errors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_cupt_string(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("# c\n1\ta\ta\tX\t_\t_\t_\t_\t_\t*\n"), 2u);  // ten columns
  EXPECT_EQ(line_of(cupt_sentence({"a", "b"}, {"*", "1"})), 2u);  // continuation before opener
  EXPECT_EQ(line_of(cupt_sentence({"a", "b"}, {"1:VID", "1:VID"})), 2u);
  EXPECT_EQ(line_of(cupt_sentence({"a", "b"}, {"1:", "*"})), 1u);
  EXPECT_EQ(line_of(cupt_sentence({"a", "b"}, {"x:VID", "*"})), 1u);
  EXPECT_EQ(line_of("1\ta\ta\tX\t_\t_\t_\t_\t_\t_\t*\n3\tb\tb\tX\t_\t_\t_\t_\t_\t_\t*\n"), 2u);
  EXPECT_EQ(line_of("1\t\ta\tX\t_\t_\t_\t_\t_\t_\t*\n"), 1u);
}

TEST(ParseCuptTest, ErrorMessageNamesLine) {
  try {
    parse_cupt_string("1\ta\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(WriteCuptTest, CanonicalFixtureRoundTripsByteForByte) {
  const std::string text = fixture("canonical.cupt");
  ASSERT_FALSE(text.empty());
  const Corpus c = parse_cupt_string(text);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[1].tokens.size(), 5u);  // range and empty-node lines are not tokens
  EXPECT_EQ(c[1].raw_lines.size(), 2u);
  EXPECT_EQ(write_cupt(c), text);
}

TEST(WriteCuptTest, SmallCases) {
  const std::string five = cupt_sentence(kFive, {"*", "2:VID", "*", "2", "*"});
  EXPECT_EQ(write_cupt(parse_cupt_string(five)), five);
  EXPECT_EQ(write_cupt({}), "");
}

TEST(WriteCuptTest, OverlapsSurviveSerialization) {
  Sentence s;
  for (int i = 1; i <= 4; ++i) s.tokens.push_back(testing::make_token(i, "t" + std::to_string(i), "X"));
  testing::annotate(s, "VID", {1, 3});
  testing::annotate(s, "LVC.full", {1, 2, 4});
  const std::string text = write_cupt({s});
  EXPECT_NE(text.find("1:VID;2:LVC.full"), std::string::npos);
  const Corpus back = parse_cupt_string(text);
  EXPECT_EQ(spans(back[0]), spans(s));
  EXPECT_EQ(write_cupt(back), text);
}

TEST(WriteCuptTest, EmptyInstanceIsASerializationError) {
  Sentence s;
  s.tokens.push_back(testing::make_token(1, "a", "X"));
  s.vmwes.push_back({1, "VID", {}});
  EXPECT_THROW(write_cupt({s}), SerializationError);
}

TEST(WriteCuptTest, RandomSentencesRoundTrip) {
  RngStream rng(31);
  for (int k = 0; k < 200; ++k) {
    const Sentence s = testing::random_annotated_sentence(rng, 10);
    const std::string text = write_cupt({s});
    EXPECT_EQ(write_cupt(parse_cupt_string(text)), text);
  }
}

Sentence sentence_of(std::size_t n) {
  Sentence s;
  for (std::size_t i = 1; i <= n; ++i)
    s.tokens.push_back(testing::make_token(static_cast<int>(i), "t", "X"));
  return s;
}

TEST(ToTagsTest, Examples) {
  Sentence s = sentence_of(5);
  EXPECT_EQ(to_tags(s), TagSequence(5, "O"));
  testing::annotate(s, "VID", {2, 4});
  EXPECT_EQ(to_tags(s), (TagSequence{"O", "B-VID", "O", "I-VID", "O"}));

  Sentence o = sentence_of(3);
  testing::annotate(o, "LVC.full", {1, 2});
  testing::annotate(o, "VID", {2, 3});
  o.vmwes[0].vmwe_id = 2;  // the VID instance now has the lower id
  o.vmwes[1].vmwe_id = 1;
  EXPECT_EQ(to_tags(o)[1], "B-VID;I-LVC.full");
}

TEST(FromTagsTest, Examples) {
  const Sentence s = sentence_of(5);
  EXPECT_EQ(spans(from_tags({"O", "B-VID", "O", "I-VID", "O"}, s, true)),
            (decltype(spans(s)){{"VID", {2, 4}}}));
  const Sentence three = sentence_of(3);
  EXPECT_TRUE(from_tags({"O", "I-VID", "O"}, three, true).vmwes.empty());
  EXPECT_EQ(spans(from_tags({"O", "I-VID", "O"}, three, false)),
            (decltype(spans(s)){{"VID", {2}}}));
}

TEST(FromTagsTest, ContinuationJoinsNearestSameCategoryInstance) {
  const Sentence s = sentence_of(5);
  const Sentence d = from_tags({"B-VID", "B-LVC.full", "B-VID", "I-LVC.full", "I-VID"}, s, true);
  EXPECT_EQ(spans(d), (decltype(spans(s)){{"LVC.full", {2, 4}}, {"VID", {1}}, {"VID", {3, 5}}}));
}

TEST(FromTagsTest, RewritesAnnotationColumn) {
  const Sentence d = from_tags({"B-VID", "O", "I-VID"}, sentence_of(3), true);
  EXPECT_EQ(d.tokens[0].mwe_annotation, "1:VID");
  EXPECT_EQ(d.tokens[1].mwe_annotation, "*");
  EXPECT_EQ(d.tokens[2].mwe_annotation, "1");
}

TEST(FromTagsTest, RandomRoundTripsPreserveStructure) {
  RngStream rng(32);
  std::size_t overlapping = 0;
  for (int k = 0; k < 200; ++k) {
    const Sentence s = testing::random_annotated_sentence(rng, 10);
    const TagSequence tags = to_tags(s);
    for (const auto& t : tags) overlapping += t.find(';') != std::string::npos;
    EXPECT_EQ(spans(from_tags(tags, s, false)), spans(s)) << "sentence " << k;
    EXPECT_EQ(spans(from_tags(tags, s, true)), spans(s)) << "sentence " << k;
  }
  EXPECT_GT(overlapping, 10u);
}

TEST(FilterOrphansTest, Examples) {
  EXPECT_EQ(filter_orphans({"O", "I-VID", "O"}), (TagSequence{"O", "O", "O"}));
  EXPECT_EQ(filter_orphans({"B-VID", "I-VID"}), (TagSequence{"B-VID", "I-VID"}));
  EXPECT_EQ(filter_orphans({"I-VID", "B-VID", "I-VID"}), (TagSequence{"O", "B-VID", "I-VID"}));
  EXPECT_EQ(filter_orphans({"B-LVC.full", "I-VID"}), (TagSequence{"B-LVC.full", "O"}));
  EXPECT_EQ(filter_orphans({"B-VID;I-VID", "I-LVC.full;I-VID"}),
            (TagSequence{"B-VID", "I-VID"}));
}

// Independent restatement of the rule: an I- atom survives iff a B- atom of
// its category occurs at a strictly earlier position.
bool well_formed(const TagSequence& tags) {
  std::set<std::string> seen;
  for (const auto& label : tags) {
    std::set<std::string> here;
    for (const auto& atom : split_label(label)) {
      if (atom.begin) here.insert(atom.category);
      else if (!seen.count(atom.category)) return false;
    }
    seen.insert(here.begin(), here.end());
  }
  return true;
}

TEST(FilterOrphansTest, IdempotentAndSound) {
  RngStream rng(33);
  for (int k = 0; k < 1000; ++k) {
    const TagSequence tags = testing::random_tags(rng, 12);
    const TagSequence once = filter_orphans(tags);
    EXPECT_EQ(filter_orphans(once), once);
    EXPECT_TRUE(well_formed(once));
    for (std::size_t i = 0; i < tags.size(); ++i)
      if (tags[i] == "O") {
        EXPECT_EQ(once[i], "O");
      }
  }
}

TEST(FilterOrphansTest, FilteredInstancesAreASubset) {
  RngStream rng(34);
  for (int k = 0; k < 500; ++k) {
    const TagSequence tags = testing::random_tags(rng, 10);
    const Sentence s = sentence_of(tags.size());
    const auto filtered = spans(from_tags(tags, s, true));
    const auto unfiltered = spans(from_tags(tags, s, false));
    for (const auto& inst : filtered)
      EXPECT_NE(std::find(unfiltered.begin(), unfiltered.end(), inst), unfiltered.end());
  }
}

TEST(TagVocabularyTest, Examples) {
  EXPECT_EQ(tag_vocabulary({}), (std::vector<std::string>{"O"}));
  Sentence s = sentence_of(3);
  testing::annotate(s, "VID", {1, 3});
  EXPECT_EQ(tag_vocabulary({s}), (std::vector<std::string>{"B-VID", "I-VID", "O"}));
  testing::annotate(s, "LVC.full", {2, 3});
  const auto vocab = tag_vocabulary({s});
  EXPECT_NE(std::find(vocab.begin(), vocab.end(), "I-VID;I-LVC.full"), vocab.end());
  EXPECT_TRUE(std::is_sorted(vocab.begin(), vocab.end()));
}

TEST(SplitLabelTest, RejectsMalformedLabels) {
  EXPECT_THROW(split_label("X-VID"), DataError);
  EXPECT_THROW(split_label("B-"), DataError);
  EXPECT_EQ(split_label("O").size(), 0u);
}

}  // namespace
}  // namespace mwetag
