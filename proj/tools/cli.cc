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

#include "cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <iomanip>
#include <set>
#include <ostream>
#include <sstream>

#include "mwetag/baseline.h"
#include "mwetag/corpus.h"
#include "mwetag/embed.h"
#include "mwetag/error.h"
#include "mwetag/eval.h"
#include "mwetag/fileio.h"
#include "mwetag/gradsuite.h"
#include "mwetag/model_io.h"
#include "mwetag/tagger.h"

namespace mwetag::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every setting a subcommand can take, from flags or a --config file.
struct RunConfig {
  std::string input, output, model, embeddings, report, train, dev, config;
  std::vector<std::string> gold, pred, eval_train;
  std::string head = "softmax";
  std::string variant = "neural";
  bool filter = false;
  bool no_filter = false;
  std::uint64_t seed = 1;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  std::size_t embedding_dim = 0;
  json tagger = json::object();
  json baseline = json::object();
  std::set<std::string> explicit_keys;  // set by a flag or a config entry

  bool has(const std::string& key) const { return explicit_keys.count(key) > 0; }
};

bool given(const CLI::App* app, const std::string& flag) {
  try {
    return app->count(flag) > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

template <typename T>
T config_value(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw UsageError("config key '" + key + "' has the wrong type");
  }
}

// Fills settings from the config file for every flag the command line did
// not set explicitly.
void merge_config_file(RunConfig& rc, const CLI::App* sub) {
  if (rc.config.empty()) return;
  json j;
  try {
    j = json::parse(read_file(rc.config));
  } catch (const json::exception& e) {
    throw DataError(rc.config + ": " + e.what());
  }
  if (!j.is_object()) throw DataError(rc.config + ": config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    const std::string flag = "--" + [&] {
      std::string f = key;
      for (char& c : f)
        if (c == '_') c = '-';
      return f;
    }();
    if (key == "subcommand") {
      if (config_value<std::string>(v, key) != sub->get_name())
        throw UsageError("config is for subcommand '" + v.get<std::string>() + "'");
      continue;
    }
    if (key == "tagger" || key == "baseline") {
      if (!v.is_object()) throw UsageError("config key '" + key + "' must be an object");
      (key == "tagger" ? rc.tagger : rc.baseline) = v;
      continue;
    }
    const bool known = sub->get_option_no_throw(flag) != nullptr ||
                       (key == "filter" && sub->get_option_no_throw("--no-filter"));
    if (!known) throw UsageError("config key '" + key + "' does not apply to " + sub->get_name());
    if (given(sub, flag)) continue;
    rc.explicit_keys.insert(key);
    if (key == "input") rc.input = config_value<std::string>(v, key);
    else if (key == "output") rc.output = config_value<std::string>(v, key);
    else if (key == "model") rc.model = config_value<std::string>(v, key);
    else if (key == "embeddings") rc.embeddings = config_value<std::string>(v, key);
    else if (key == "report") rc.report = config_value<std::string>(v, key);
    else if (key == "train" && sub->get_name() == "eval")
      rc.eval_train = config_value<std::vector<std::string>>(v, key);
    else if (key == "train") rc.train = config_value<std::string>(v, key);
    else if (key == "dev") rc.dev = config_value<std::string>(v, key);
    else if (key == "gold") rc.gold = config_value<std::vector<std::string>>(v, key);
    else if (key == "pred") rc.pred = config_value<std::vector<std::string>>(v, key);
    else if (key == "head") rc.head = config_value<std::string>(v, key);
    else if (key == "variant") rc.variant = config_value<std::string>(v, key);
    else if (key == "seed") rc.seed = config_value<std::uint64_t>(v, key);
    else if (key == "epochs") rc.epochs = config_value<std::size_t>(v, key);
    else if (key == "batch_size") rc.batch_size = config_value<std::size_t>(v, key);
    else if (key == "embedding_dim") rc.embedding_dim = config_value<std::size_t>(v, key);
    else if (key == "filter") {
      if (given(sub, "--no-filter")) continue;
      const bool on = config_value<bool>(v, key);
      rc.filter = on;
      rc.no_filter = !on;
    } else {
      throw UsageError("config key '" + key + "' is not supported");
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

std::string render_tags(const Corpus& corpus, bool filter) {
  std::string out;
  for (const Sentence& s : corpus) {
    TagSequence tags = to_tags(s);
    if (filter) tags = filter_orphans(tags);
    for (const auto& t : tags) out += t + "\n";
    out += "\n";
  }
  return out;
}

json report_to_json(const TrainReport& r) {
  json epochs = json::array();
  for (std::size_t k = 0; k < r.epochs.size(); ++k) {
    const EpochStats& e = r.epochs[k];
    json row{{"epoch", k + 1}, {"train_loss", e.train_loss}};
    if (e.dev_token_accuracy) row["dev_token_accuracy"] = *e.dev_token_accuracy;
    if (e.dev_mwe_f1) row["dev_mwe_f1"] = *e.dev_mwe_f1;
    epochs.push_back(std::move(row));
  }
  return json{{"kind", "neural"}, {"selected_epoch", r.selected_epoch}, {"epochs", std::move(epochs)}};
}

BaselineVariant parse_baseline_variant(const std::string& v) {
  return v == "baseline-turian" ? BaselineVariant::kTurian : BaselineVariant::kStandard;
}

BaselineTrainOptions baseline_options(const RunConfig& rc) {
  BaselineTrainOptions o;
  o.seed = rc.seed;
  for (const auto& [key, v] : rc.baseline.items()) {
    if (key == "sigma") o.sigma = config_value<double>(v, key);
    else if (key == "max_iterations") o.max_iterations = config_value<std::size_t>(v, key);
    else if (key == "gradient_tolerance") o.gradient_tolerance = config_value<double>(v, key);
    else if (key == "init_scale") o.init_scale = config_value<double>(v, key);
    else throw UsageError("unknown baseline setting '" + key + "'");
  }
  if (!(o.sigma > 0.0)) throw UsageError("baseline sigma must be positive");
  return o;
}

TaggerConfig tagger_config(const RunConfig& rc) {
  TaggerConfig c;
  try {
    c = config_from_json(rc.tagger);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  if (rc.has("head")) c.head = rc.head == "crf" ? Head::kCrf : Head::kSoftmax;
  if (rc.has("seed")) c.seed = rc.seed;
  if (rc.has("epochs")) c.epochs = rc.epochs;
  if (rc.has("batch_size")) c.batch_size = rc.batch_size;
  try {
    c.validate();
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
  return c;
}

int cmd_convert(const RunConfig& rc, std::ostream& out) {
  require(!rc.input.empty() && !rc.output.empty(), "convert needs --input and --output");
  const Corpus corpus = read_cupt_file(rc.input);
  write_file_atomic(rc.output, render_tags(corpus, rc.filter));
  out << "converted " << corpus.size() << " sentences\n";
  return kExitOk;
}

int cmd_train(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  require(!rc.train.empty() && !rc.model.empty(), "train needs --train and --model");
  const std::string report_path = rc.report.empty() ? rc.model + ".report.json" : rc.report;

  if (rc.variant != "neural") {
    const BaselineVariant variant = parse_baseline_variant(rc.variant);
    require(variant == BaselineVariant::kStandard || !rc.embeddings.empty(),
            "the Turian baseline needs --embeddings");
    const BaselineTrainOptions options = baseline_options(rc);
    const Corpus train_corpus = read_cupt_file(rc.train);
    std::optional<EmbeddingTable> table;
    if (variant == BaselineVariant::kTurian)
      table = load_vec_file(rc.embeddings, rc.embedding_dim);
    BaselineTrainStats stats;
    BaselineModel model = train_baseline(train_corpus, variant, table ? &*table : nullptr, options, &stats);
    if (table) model.embeddings_source = rc.embeddings;
    save_model(model, rc.model);
    const json report{{"kind", std::string(baseline_kind(variant))},
                      {"iterations", stats.iterations},
                      {"objective", stats.objective},
                      {"gradient_norm", stats.gradient_norm},
                      {"converged", stats.converged}};
    write_file_atomic(report_path, report.dump(2) + "\n");
    out << "trained " << baseline_kind(variant) << " in " << stats.iterations
        << " iterations, objective " << stats.objective << "\n";
    return kExitOk;
  }

  const TaggerConfig config = tagger_config(rc);
  const bool pretrained = config.embedding_mode == EmbeddingMode::kPretrained;
  require(!pretrained || !rc.embeddings.empty(), "pretrained embeddings need --embeddings");

  const Corpus train_corpus = read_cupt_file(rc.train);
  std::optional<Corpus> dev;
  if (!rc.dev.empty()) dev = read_cupt_file(rc.dev);
  EmbeddingTable table(1);
  std::size_t dim = rc.embedding_dim;
  if (!rc.embeddings.empty()) {
    table = load_vec_file(rc.embeddings, rc.embedding_dim);
    for (const auto& w : table.warnings()) err << rc.embeddings << ": " << w << "\n";
    dim = table.dimension();
  }
  if (dim == 0) dim = 300;
  if (!pretrained) table = EmbeddingTable(dim);

  TaggerModel model = initialize(config, train_corpus, dim);
  if (pretrained) model.embeddings_source = rc.embeddings;
  TrainResult result = train(std::move(model), train_corpus, dev ? &*dev : nullptr, table);
  for (std::size_t k = 0; k < result.report.epochs.size(); ++k) {
    const EpochStats& e = result.report.epochs[k];
    err << "epoch " << k + 1 << " loss " << e.train_loss;
    if (e.dev_mwe_f1) err << " dev_mwe_f1 " << *e.dev_mwe_f1;
    err << " (" << std::fixed << std::setprecision(1) << e.seconds << "s)\n" << std::defaultfloat;
  }
  save_model(std::move(result.model), rc.model);
  write_file_atomic(report_path, report_to_json(result.report).dump(2) + "\n");
  out << "trained neural tagger, selected epoch " << result.report.selected_epoch << "\n";
  return kExitOk;
}

int cmd_tag(const RunConfig& rc, std::ostream& out) {
  require(!rc.model.empty() && !rc.input.empty() && !rc.output.empty(),
          "tag needs --model, --input and --output");
  const bool filter = !rc.no_filter;
  AnyModel any = load_model(rc.model);
  const Corpus input = read_cupt_file(rc.input);

  auto load_table = [&](const std::string& source, std::size_t dim) {
    const std::string path = rc.embeddings.empty() ? source : rc.embeddings;
    if (path.empty()) throw UsageError("the model needs --embeddings");
    EmbeddingTable t = load_vec_file(path, dim);
    if (t.dimension() != dim)
      throw DataError(path + ": dimension " + std::to_string(t.dimension()) + " does not match the model");
    return t;
  };

  std::function<TagSequence(const Sentence&)> tagger;
  std::optional<EmbeddingTable> table;
  if (auto* neural = std::get_if<TaggerModel>(&any)) {
    if (neural->config.embedding_mode == EmbeddingMode::kPretrained)
      table = load_table(neural->embeddings_source, neural->embedding_dim);
    else
      table = EmbeddingTable(neural->embedding_dim);
    tagger = [&, neural](const Sentence& s) { return predict(*neural, encode_for(*neural, s, *table)); };
  } else {
    const auto& base = std::get<BaselineModel>(any);
    if (base.variant == BaselineVariant::kTurian)
      table = load_table(base.embeddings_source, base.embedding_dim);
    tagger = [&](const Sentence& s) { return tag_baseline(base, s, table ? &*table : nullptr); };
  }

  Corpus predicted;
  predicted.reserve(input.size());
  for (const Sentence& s : input) {
    if (s.tokens.empty()) {
      Sentence copy = s;
      copy.vmwes.clear();
      predicted.push_back(std::move(copy));
      continue;
    }
    predicted.push_back(from_tags(tagger(s), s, filter));
  }
  write_file_atomic(rc.output, write_cupt(predicted));
  out << "tagged " << predicted.size() << " sentences\n";
  return kExitOk;
}

json seen_unseen_json(const SeenUnseenResult& r) {
  return json{{"seen_fraction", r.partition.seen_fraction},
              {"seen_count", r.partition.seen.size()},
              {"unseen_count", r.partition.unseen.size()},
              {"seen", report_to_json(r.seen)},
              {"unseen", report_to_json(r.unseen)}};
}

int cmd_eval(const RunConfig& rc, std::ostream& out) {
  require(!rc.gold.empty() && rc.gold.size() == rc.pred.size(),
          "eval needs matching --gold and --pred files");
  require(!rc.report.empty(), "eval needs --report");
  require(rc.eval_train.empty() || rc.eval_train.size() == rc.gold.size(),
          "give one --train file per --gold file");

  std::vector<std::pair<std::string, EvalReport>> rows;
  std::vector<EvalReport> reports;
  json languages = json::array();
  for (std::size_t k = 0; k < rc.gold.size(); ++k) {
    const Corpus gold = read_cupt_file(rc.gold[k]);
    const Corpus pred = read_cupt_file(rc.pred[k]);
    EvalReport report;
    try {
      report = evaluate(gold, pred);
    } catch (const EvaluationError& e) {
      throw EvaluationError(rc.gold[k] + " vs " + rc.pred[k] + ": " + e.what());
    }
    json entry = report_to_json(report);
    if (!rc.eval_train.empty()) {
      const Corpus train_corpus = read_cupt_file(rc.eval_train[k]);
      entry["seen_unseen"] = seen_unseen_json(seen_unseen(train_corpus, gold, pred));
    }
    const std::string name = std::filesystem::path(rc.gold[k]).stem().string();
    rows.emplace_back(name, report);
    reports.push_back(report);
    entry["name"] = name;
    languages.push_back(std::move(entry));
  }

  json result;
  if (reports.size() == 1) {
    result = languages.front();
    result.erase("name");
  } else {
    const EvalReport avg = macro_average(reports);
    rows.emplace_back("macro-average", avg);
    result = json{{"languages", std::move(languages)}, {"macro_average", report_to_json(avg)}};
  }
  write_file_atomic(rc.report, result.dump(2) + "\n");
  out << render_table(rows);
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& rc, std::ostream& out) {
  bool ok = true;
  for (const GradCheckEntry& e : run_gradient_suite(rc.seed)) {
    const bool pass = e.max_relative_error < kGradCheckTolerance;
    ok = ok && pass;
    std::ostringstream line;
    line << std::left << std::setw(30) << e.name << std::scientific << std::setprecision(3)
         << e.max_relative_error << (pass ? "  ok" : "  FAIL");
    out << line.str() << "\n";
  }
  return ok ? kExitOk : kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Verbal multiword expression tagging toolkit", "mwetag"};
  app.require_subcommand(1, 1);

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", rc.config, "JSON file with defaults for any flag");
  };

  CLI::App* convert = app.add_subcommand("convert", "cupt to one label per line");
  convert->add_option("--input", rc.input, "cupt file");
  convert->add_option("--output", rc.output, "label file");
  convert->add_flag("--filter", rc.filter, "turn orphan continuations into O");
  add_config(convert);

  CLI::App* train_cmd = app.add_subcommand("train", "train a tagger or a baseline");
  train_cmd->add_option("--train", rc.train, "training cupt file");
  train_cmd->add_option("--dev", rc.dev, "development cupt file for checkpoint selection");
  train_cmd->add_option("--embeddings", rc.embeddings, "word vectors (text, optionally gzipped)");
  train_cmd->add_option("--embedding-dim", rc.embedding_dim, "vector dimension (default: inferred)");
  train_cmd->add_option("--model", rc.model, "output model file");
  train_cmd->add_option("--report", rc.report, "training report (default: MODEL.report.json)");
  train_cmd->add_option("--head", rc.head, "output layer")->check(CLI::IsMember({"softmax", "crf"}));
  train_cmd->add_option("--variant", rc.variant, "model family")
      ->check(CLI::IsMember({"neural", "baseline-standard", "baseline-turian"}));
  train_cmd->add_option("--seed", rc.seed, "random seed");
  train_cmd->add_option("--epochs", rc.epochs, "training epochs");
  train_cmd->add_option("--batch-size", rc.batch_size, "sentences per update");
  add_config(train_cmd);

  CLI::App* tag = app.add_subcommand("tag", "predict annotations for a cupt file");
  tag->add_option("--model", rc.model, "model file");
  tag->add_option("--input", rc.input, "cupt file to tag");
  tag->add_option("--output", rc.output, "predicted cupt file");
  tag->add_option("--embeddings", rc.embeddings, "word vectors (default: the training-time path)");
  tag->add_flag("--no-filter", rc.no_filter, "keep orphan continuations");
  add_config(tag);

  CLI::App* eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--gold", rc.gold, "gold cupt file (repeat for several languages)");
  eval->add_option("--pred", rc.pred, "predicted cupt file, paired with --gold");
  eval->add_option("--train", rc.eval_train, "training cupt file for seen/unseen scores");
  eval->add_option("--report", rc.report, "JSON report");
  add_config(eval);

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--seed", rc.seed, "random seed");
  add_config(gradcheck);

  std::vector<std::string> argv_storage{"mwetag"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  for (const CLI::Option* opt : sub->get_options())
    if (opt->count() > 0) {
      std::string key = opt->get_name().substr(2);
      std::replace(key.begin(), key.end(), '-', '_');
      rc.explicit_keys.insert(key);
    }
  try {
    merge_config_file(rc, sub);
    if (sub == convert) return cmd_convert(rc, out);
    if (sub == train_cmd) return cmd_train(rc, out, err);
    if (sub == tag) return cmd_tag(rc, out);
    if (sub == eval) return cmd_eval(rc, out);
    return cmd_gradcheck(rc, out);
  } catch (const UsageError& e) {
    err << "mwetag " << sub->get_name() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "mwetag " << sub->get_name() << ": " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace mwetag::cli
