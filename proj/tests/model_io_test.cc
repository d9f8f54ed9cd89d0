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

#include <filesystem>

#include "mwetag/error.h"
#include "mwetag/fileio.h"
#include "mwetag/gradsuite.h"
#include "mwetag/model_io.h"
#include "synthetic.h"

namespace mwetag {
namespace {

class ModelIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = testing::synthetic_corpus(12, 21).sentences;
    table_ = testing::random_embeddings(corpus_, 5, 21);
  }

  TaggerModel trained(Head head, bool random_mode) {
    TaggerConfig c = tiny_tagger_config(head);
    c.epochs = 2;
    c.batch_size = 4;
    if (random_mode) {
      c.embedding_mode = EmbeddingMode::kRandomTrainable;
      c.embeddings_trainable = true;
    }
    TaggerModel m = train(initialize(c, corpus_, 5), corpus_, nullptr, table_).model;
    m.embeddings_source = "vectors.vec";
    return m;
  }

  std::vector<TagSequence> predictions(const TaggerModel& m) {
    std::vector<TagSequence> out;
    for (std::size_t i = 0; i < 10; ++i) out.push_back(predict(m, encode_for(m, corpus_[i], table_)));
    return out;
  }

  std::vector<TagSequence> predictions(const BaselineModel& m, const EmbeddingTable* t) {
    std::vector<TagSequence> out;
    for (std::size_t i = 0; i < 10; ++i) out.push_back(tag_baseline(m, corpus_[i], t));
    return out;
  }

  Corpus corpus_;
  EmbeddingTable table_{1};
};

TEST_F(ModelIoTest, NeuralRoundTripIsExact) {
  for (auto [head, random_mode] : {std::pair{Head::kSoftmax, false}, std::pair{Head::kCrf, false},
                                   std::pair{Head::kCrf, true}}) {
    const TaggerModel m = trained(head, random_mode);
    const std::string text = serialize_model(m);
    const AnyModel back = parse_model(text);
    ASSERT_TRUE(std::holds_alternative<TaggerModel>(back));
    const TaggerModel& r = std::get<TaggerModel>(back);
    EXPECT_EQ(r.tags, m.tags);
    EXPECT_EQ(r.pos.entries(), m.pos.entries());
    EXPECT_EQ(r.words, m.words);
    EXPECT_EQ(r.embeddings_source, "vectors.vec");
    const auto pm = m.parameters(), pr = r.parameters();
    ASSERT_EQ(pm.size(), pr.size());
    for (std::size_t k = 0; k < pm.size(); ++k) EXPECT_EQ(*pm[k].second, *pr[k].second) << pm[k].first;
    EXPECT_EQ(predictions(m), predictions(r));
    EXPECT_EQ(serialize_model(r), text);
  }
}

TEST_F(ModelIoTest, BaselineRoundTripIsExact) {
  BaselineTrainOptions o;
  o.max_iterations = 30;
  for (auto variant : {BaselineVariant::kStandard, BaselineVariant::kTurian}) {
    const EmbeddingTable* t = variant == BaselineVariant::kTurian ? &table_ : nullptr;
    const BaselineModel m = train_baseline(corpus_, variant, t, o);
    const std::string text = serialize_model(m);
    const AnyModel back = parse_model(text);
    ASSERT_TRUE(std::holds_alternative<BaselineModel>(back));
    const BaselineModel& r = std::get<BaselineModel>(back);
    EXPECT_EQ(r.variant, variant);
    EXPECT_EQ(r.features, m.features);
    EXPECT_EQ(flatten_weights(r), flatten_weights(m));
    EXPECT_EQ(predictions(m, t), predictions(r, t));
    EXPECT_EQ(serialize_model(r), text);
  }
}

TEST_F(ModelIoTest, SaveAndLoadThroughAFile) {
  const auto dir = std::filesystem::temp_directory_path() / "mwetag_model_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.json").string();
  const TaggerModel m = trained(Head::kSoftmax, false);
  save_model(m, path);
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
  EXPECT_EQ(serialize_model(std::get<TaggerModel>(load_model(path))), serialize_model(m));
  EXPECT_THROW(load_model((dir / "absent.json").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_F(ModelIoTest, DamagedFilesAreRejected) {
  const std::string text = serialize_model(trained(Head::kCrf, false));
  EXPECT_THROW(parse_model(text.substr(0, text.size() / 2)), ModelFormatError);
  EXPECT_THROW(parse_model(""), ModelFormatError);
  EXPECT_THROW(parse_model("[]"), ModelFormatError);

  auto j = nlohmann::json::parse(text);
  j["format_version"] = kModelFormatVersion + 1;
  EXPECT_THROW(parse_model(j.dump()), ModelFormatError);

  j = nlohmann::json::parse(text);
  j["kind"] = "transformer";
  EXPECT_THROW(parse_model(j.dump()), ModelFormatError);

  j = nlohmann::json::parse(text);
  j["parameters"][0]["data"].erase(0);
  EXPECT_THROW(parse_model(j.dump()), ModelFormatError);

  j = nlohmann::json::parse(text);
  j["parameters"].erase(j["parameters"].size() - 1);
  EXPECT_THROW(parse_model(j.dump()), ModelFormatError);
}

TEST(ConfigJsonTest, RoundTripAndPartialOverrides) {
  TaggerConfig c;
  c.filter_widths = {1, 4, 5};
  c.head = Head::kCrf;
  c.conv_activation = Activation::kTanh;
  c.optimizer.learning_rate = 0.02;
  c.seed = 99;
  const TaggerConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));

  const TaggerConfig partial = config_from_json(nlohmann::json{{"epochs", 7}}, c);
  EXPECT_EQ(partial.epochs, 7u);
  EXPECT_EQ(partial.filter_widths, c.filter_widths);
  EXPECT_THROW(config_from_json(nlohmann::json{{"epochz", 7}}), DataError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"head", "svm"}}), DataError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"epochs", "many"}}), DataError);
}

TEST(BaselineKindTest, Names) {
  EXPECT_EQ(baseline_kind(BaselineVariant::kStandard), "baseline-standard");
  EXPECT_EQ(baseline_kind(BaselineVariant::kTurian), "baseline-turian");
}

}  // namespace
}  // namespace mwetag
