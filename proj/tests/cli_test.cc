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
#include <json.hpp>

#include <filesystem>
#include <sstream>

#include "cli.h"
#include "mwetag/corpus.h"
#include "mwetag/fileio.h"
#include "synthetic.h"

namespace mwetag {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mwetag_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    write_file_atomic(path(name), text);
    return path(name);
  }

  // Small corpus, vectors, and a config for a quick neural run.
  void toy_inputs() {
    const Corpus c = testing::synthetic_corpus(8, 4).sentences;
    write("train.cupt", write_cupt(c));
    write("vectors.vec", testing::vec_text(c, 6, 4));
    write("config.json", R"({"tagger": {"filters_per_width": 4, "lstm_hidden": 4, "optimizer": {"learning_rate": 0.01}},
                            "epochs": 3, "batch_size": 4})");
  }

  fs::path dir_;
};

TEST_F(CliTest, ConvertExample) {
  const std::string in = write("s.cupt", testing::cupt_sentence({"a", "b", "c", "d", "e"},
                                                                {"*", "2:VID", "*", "2", "*"}));
  const Outcome o = run({"convert", "--input", in, "--output", path("s.tags")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(read_file(path("s.tags")), "O\nB-VID\nO\nI-VID\nO\n\n");
}

TEST_F(CliTest, ConvertFilterFlag) {
  const std::string in = write("s.cupt", testing::cupt_sentence({"a", "b"}, {"*", "*"}) +
                                             testing::cupt_sentence({"c"}, {"1:IRV"}));
  ASSERT_EQ(run({"convert", "--input", in, "--output", path("t")}).code, 0);
  EXPECT_EQ(read_file(path("t")), "O\nO\n\nB-IRV\n\n");
}

TEST_F(CliTest, GradcheckSeedSeven) {
  const Outcome o = run({"gradcheck", "--seed", "7"});
  EXPECT_EQ(o.code, 0) << o.out << o.err;
  EXPECT_NE(o.out.find("crf_nll"), std::string::npos);
  EXPECT_NE(o.out.find("tagger_crf"), std::string::npos);
  EXPECT_EQ(o.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"convert", "--input"}).code, 1);
  EXPECT_EQ(run({"convert", "--output", path("x")}).code, 1);
  EXPECT_EQ(run({"train", "--train", path("t"), "--model", path("m"), "--head", "svm"}).code, 1);
  EXPECT_EQ(run({"eval", "--gold", path("a"), "--gold", path("b"), "--pred", path("c")}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ConfigFileKeysAreChecked) {
  const std::string in = write("s.cupt", testing::cupt_sentence({"a"}, {"*"}));
  write("ok.json", "{\"input\": \"" + in + "\", \"output\": \"" + path("o") + "\"}");
  EXPECT_EQ(run({"convert", "--config", path("ok.json")}).code, 0);
  EXPECT_TRUE(fs::exists(path("o")));
  write("bad.json", R"({"epochs": 3})");
  EXPECT_EQ(run({"convert", "--config", path("bad.json"), "--input", in, "--output", path("o")}).code, 1);
  write("wrong.json", R"({"subcommand": "train"})");
  EXPECT_EQ(run({"convert", "--config", path("wrong.json"), "--input", in, "--output", path("o")}).code, 1);
}

TEST_F(CliTest, DataErrorsExitTwoWithLineNumber) {
  const Outcome missing = run({"convert", "--input", path("absent.cupt"), "--output", path("o")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("absent.cupt"), std::string::npos);

  const std::string bad = write("bad.cupt", "# c\n1\tonly\tthree\n\n");
  const Outcome o = run({"convert", "--input", bad, "--output", path("o")});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("line 2"), std::string::npos) << o.err;
  EXPECT_FALSE(fs::exists(path("o")));
  EXPECT_FALSE(fs::exists(path("o.tmp")));
}

TEST_F(CliTest, EmbeddingDimensionMismatchIsADataError) {
  toy_inputs();
  const Outcome o = run({"train", "--train", path("train.cupt"), "--embeddings", path("vectors.vec"),
                         "--embedding-dim", "9", "--model", path("m.json"), "--config", path("config.json")});
  EXPECT_EQ(o.code, 2);
  EXPECT_FALSE(fs::exists(path("m.json")));
}

TEST_F(CliTest, TrainTagEvalIsDeterministic) {
  toy_inputs();
  std::vector<std::string> outputs;
  for (int k = 0; k < 2; ++k) {
    const std::string tag = std::to_string(k);
    Outcome o = run({"train", "--train", path("train.cupt"), "--dev", path("train.cupt"), "--embeddings",
                     path("vectors.vec"), "--model", path("m" + tag), "--config", path("config.json"),
                     "--head", "crf", "--seed", "5"});
    ASSERT_EQ(o.code, 0) << o.err;
    o = run({"tag", "--model", path("m" + tag), "--input", path("train.cupt"), "--output", path("p" + tag)});
    ASSERT_EQ(o.code, 0) << o.err;
    o = run({"eval", "--gold", path("train.cupt"), "--pred", path("p" + tag), "--train", path("train.cupt"),
             "--report", path("r" + tag)});
    ASSERT_EQ(o.code, 0) << o.err;
    outputs.push_back(read_file(path("m" + tag)) + read_file(path("m" + tag + ".report.json")) +
                      read_file(path("p" + tag)) + read_file(path("r" + tag)));
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  const auto report = nlohmann::json::parse(read_file(path("r0")));
  EXPECT_TRUE(report.contains("seen_unseen"));
  EXPECT_EQ(report["seen_unseen"]["seen_fraction"], 1.0);
  const auto train_report = nlohmann::json::parse(read_file(path("m0.report.json")));
  EXPECT_EQ(train_report["epochs"].size(), 3u);
  // The predictions keep the input's sentences and tokens.
  const Corpus gold = read_cupt_file(path("train.cupt"));
  const Corpus pred = read_cupt_file(path("p0"));
  ASSERT_EQ(gold.size(), pred.size());
  for (std::size_t i = 0; i < gold.size(); ++i) EXPECT_EQ(gold[i].tokens.size(), pred[i].tokens.size());
}

TEST_F(CliTest, TagThenEvalOnOverfitToy) {
  const Corpus c = testing::synthetic_corpus(50, 11).sentences;
  write("train.cupt", write_cupt(c));
  write("vectors.vec", testing::vec_text(c, 20, 11));
  write("config.json", R"({"tagger": {"filters_per_width": 32, "lstm_hidden": 32}, "epochs": 100})");
  ASSERT_EQ(run({"train", "--train", path("train.cupt"), "--dev", path("train.cupt"), "--embeddings",
                 path("vectors.vec"), "--model", path("m"), "--config", path("config.json")})
                .code,
            0);
  ASSERT_EQ(run({"tag", "--model", path("m"), "--input", path("train.cupt"), "--output", path("p")}).code, 0);
  ASSERT_EQ(run({"eval", "--gold", path("train.cupt"), "--pred", path("p"), "--report", path("r")}).code, 0);
  const auto r = nlohmann::json::parse(read_file(path("r")));
  EXPECT_GE(r["mwe"]["f1"].get<double>(), 0.99);
}

TEST_F(CliTest, BaselineThroughTheCli) {
  toy_inputs();
  write("b.json", R"({"baseline": {"max_iterations": 40}})");
  for (const std::string variant : {"baseline-standard", "baseline-turian"}) {
    std::vector<std::string> args{"train", "--train", path("train.cupt"), "--model", path(variant),
                                  "--variant", variant, "--config", path("b.json")};
    if (variant == "baseline-turian") {
      args.push_back("--embeddings");
      args.push_back(path("vectors.vec"));
    }
    Outcome o = run(args);
    ASSERT_EQ(o.code, 0) << o.err;
    o = run({"tag", "--model", path(variant), "--input", path("train.cupt"), "--output", path("p")});
    ASSERT_EQ(o.code, 0) << o.err;
    const auto kind = nlohmann::json::parse(read_file(path(variant)))["kind"];
    EXPECT_EQ(kind, variant);
  }
}

TEST_F(CliTest, EvalSeveralLanguages) {
  const std::string g = write("EN.cupt", testing::cupt_sentence({"a", "b"}, {"1:VID", "1"}));
  const std::string p = write("p.cupt", testing::cupt_sentence({"a", "b"}, {"1:VID", "*"}));
  const std::string g2 = write("FR.cupt", testing::cupt_sentence({"a", "b"}, {"1:VID", "1"}));
  const Outcome o = run({"eval", "--gold", g, "--pred", p, "--gold", g2, "--pred", g2, "--report", path("r")});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = nlohmann::json::parse(read_file(path("r")));
  ASSERT_EQ(r["languages"].size(), 2u);
  EXPECT_EQ(r["languages"][0]["name"], "EN");
  EXPECT_DOUBLE_EQ(r["macro_average"]["mwe"]["f1"].get<double>(), 0.5);
  EXPECT_NE(o.out.find("FR"), std::string::npos);
}

}  // namespace
}  // namespace mwetag
