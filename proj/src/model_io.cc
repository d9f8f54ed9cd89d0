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

#include "mwetag/model_io.h"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>

#include "mwetag/error.h"
#include "mwetag/fileio.h"

namespace mwetag {
namespace {

using nlohmann::json;

const std::map<std::string, Activation>& activation_names() {
  static const std::map<std::string, Activation> names{{"identity", Activation::kIdentity},
                                                       {"relu", Activation::kRelu},
                                                       {"tanh", Activation::kTanh},
                                                       {"sigmoid", Activation::kSigmoid}};
  return names;
}

template <typename E>
std::string name_of(const std::map<std::string, E>& names, E value) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  throw ContractViolation("unnamed enum value");
}

template <typename E>
E parse_enum(const std::map<std::string, E>& names, const json& j, const std::string& field) {
  if (!j.is_string()) throw DataError("config field '" + field + "' must be a string");
  auto it = names.find(j.get<std::string>());
  if (it == names.end())
    throw DataError("config field '" + field + "' has unknown value '" + j.get<std::string>() + "'");
  return it->second;
}

const std::map<std::string, Head> kHeads{{"softmax", Head::kSoftmax}, {"crf", Head::kCrf}};
const std::map<std::string, EmbeddingMode> kModes{
    {"pretrained", EmbeddingMode::kPretrained},
    {"random_trainable", EmbeddingMode::kRandomTrainable}};

template <typename T>
T get_field(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw DataError("config field '" + field + "' has the wrong type");
  }
}

std::size_t get_count(const json& j, const std::string& field) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw DataError("config field '" + field + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

json tensor_json(const std::string& name, const Tensor& t) {
  return json{{"name", name}, {"shape", t.shape()}, {"data", t.values()}};
}

std::map<std::string, Tensor> read_parameters(const json& params) {
  std::map<std::string, Tensor> out;
  for (const json& p : params.at("parameters")) {
    auto shape = p.at("shape").get<std::vector<std::size_t>>();
    auto data = p.at("data").get<std::vector<double>>();
    auto name = p.at("name").get<std::string>();
    if (shape_size(shape) != data.size())
      throw ModelFormatError("parameter '" + name + "' has " + std::to_string(data.size()) +
                             " values for shape " + shape_string(shape));
    if (!out.emplace(name, Tensor(std::move(shape), std::move(data))).second)
      throw ModelFormatError("duplicate parameter '" + name + "'");
  }
  return out;
}

void assign(Tensor& target, std::map<std::string, Tensor>& stored, const std::string& name) {
  auto it = stored.find(name);
  if (it == stored.end()) throw ModelFormatError("missing parameter '" + name + "'");
  if (it->second.shape() != target.shape())
    throw ModelFormatError("parameter '" + name + "' has shape " + shape_string(it->second.shape()) +
                           ", expected " + shape_string(target.shape()));
  target = std::move(it->second);
  stored.erase(it);
}

void check_version(const json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw ModelFormatError("unsupported model format version " + std::to_string(version) +
                           " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
}

TaggerModel neural_from_json(const json& j) {
  const TaggerConfig config = config_from_json(j.at("config"));
  auto tags = j.at("tags").get<std::vector<std::string>>();
  auto pos = j.at("pos").get<std::vector<std::string>>();
  const auto dim = j.at("embedding_dim").get<std::size_t>();
  std::vector<std::string> words;
  if (j.contains("words")) words = j.at("words").get<std::vector<std::string>>();

  RngStream rng(0, 0);
  TaggerModel model = build(config, dim, PosVocabulary(std::move(pos)), std::move(tags), rng,
                            std::move(words));
  model.embeddings_source = j.value("embeddings_source", std::string());
  auto stored = read_parameters(j);
  for (auto& [name, tensor] : model.parameters()) assign(*tensor, stored, name);
  if (!stored.empty()) throw ModelFormatError("unexpected parameter '" + stored.begin()->first + "'");
  return model;
}

BaselineModel baseline_from_json(const json& j, BaselineVariant variant) {
  BaselineModel m;
  m.variant = variant;
  m.sigma = j.at("sigma").get<double>();
  m.tags = j.at("tags").get<std::vector<std::string>>();
  m.features = j.at("features").get<std::vector<std::string>>();
  m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  m.embeddings_source = j.value("embeddings_source", std::string());
  if (m.tags.empty() || !std::is_sorted(m.tags.begin(), m.tags.end()))
    throw ModelFormatError("baseline tag vocabulary must be sorted and non-empty");
  if (std::adjacent_find(m.features.begin(), m.features.end(), std::greater_equal<>()) !=
      m.features.end())
    throw ModelFormatError("baseline feature list must be strictly sorted");
  if (!(m.sigma > 0.0)) throw ModelFormatError("baseline sigma must be positive");
  if ((variant == BaselineVariant::kTurian) != (m.embedding_dim > 0))
    throw ModelFormatError("embedding dimension does not match the baseline variant");

  const std::size_t T = m.tags.size();
  m.feature_weights = Tensor({m.features.size(), T});
  m.dense_weights = Tensor({kWindowSize * m.embedding_dim, T});
  m.transitions = Tensor({T, T});
  m.start = Tensor({T});
  m.stop = Tensor({T});
  auto stored = read_parameters(j);
  assign(m.feature_weights, stored, "feature_weights");
  assign(m.dense_weights, stored, "dense_weights");
  assign(m.transitions, stored, "transitions");
  assign(m.start, stored, "start");
  assign(m.stop, stored, "stop");
  if (!stored.empty()) throw ModelFormatError("unexpected parameter '" + stored.begin()->first + "'");
  return m;
}

}  // namespace

TaggerConfig config_from_json(const json& j, TaggerConfig c) {
  if (!j.is_object()) throw DataError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "filter_widths") {
      if (!v.is_array()) throw DataError("config field 'filter_widths' must be an array");
      c.filter_widths.clear();
      for (const json& w : v) c.filter_widths.push_back(get_count(w, key));
    } else if (key == "filters_per_width") {
      c.filters_per_width = get_count(v, key);
    } else if (key == "lstm_hidden") {
      c.lstm_hidden = get_count(v, key);
    } else if (key == "dropout") {
      c.dropout = get_field<double>(v, key);
    } else if (key == "recurrent_dropout") {
      c.recurrent_dropout = get_field<double>(v, key);
    } else if (key == "conv_activation") {
      c.conv_activation = parse_enum(activation_names(), v, key);
    } else if (key == "head") {
      c.head = parse_enum(kHeads, v, key);
    } else if (key == "epochs") {
      c.epochs = get_count(v, key);
    } else if (key == "pos_merge") {
      c.pos_merge = get_field<std::string>(v, key);
    } else if (key == "embeddings_trainable") {
      if (!v.is_boolean()) throw DataError("config field 'embeddings_trainable' must be a boolean");
      c.embeddings_trainable = v.get<bool>();
    } else if (key == "embedding_mode") {
      c.embedding_mode = parse_enum(kModes, v, key);
    } else if (key == "optimizer") {
      if (!v.is_object()) throw DataError("config field 'optimizer' must be an object");
      for (const auto& [okey, ov] : v.items()) {
        if (okey == "name") c.optimizer.name = get_field<std::string>(ov, okey);
        else if (okey == "learning_rate") c.optimizer.learning_rate = get_field<double>(ov, okey);
        else if (okey == "beta1") c.optimizer.beta1 = get_field<double>(ov, okey);
        else if (okey == "beta2") c.optimizer.beta2 = get_field<double>(ov, okey);
        else if (okey == "epsilon") c.optimizer.epsilon = get_field<double>(ov, okey);
        else throw DataError("unknown optimizer field '" + okey + "'");
      }
    } else if (key == "batch_size") {
      c.batch_size = get_count(v, key);
    } else if (key == "seed") {
      c.seed = get_field<std::uint64_t>(v, key);
    } else {
      throw DataError("unknown config field '" + key + "'");
    }
  }
  return c;
}

json config_to_json(const TaggerConfig& c) {
  return json{{"filter_widths", c.filter_widths},
              {"filters_per_width", c.filters_per_width},
              {"lstm_hidden", c.lstm_hidden},
              {"dropout", c.dropout},
              {"recurrent_dropout", c.recurrent_dropout},
              {"conv_activation", name_of(activation_names(), c.conv_activation)},
              {"head", name_of(kHeads, c.head)},
              {"epochs", c.epochs},
              {"pos_merge", c.pos_merge},
              {"embeddings_trainable", c.embeddings_trainable},
              {"embedding_mode", name_of(kModes, c.embedding_mode)},
              {"optimizer",
               {{"name", c.optimizer.name},
                {"learning_rate", c.optimizer.learning_rate},
                {"beta1", c.optimizer.beta1},
                {"beta2", c.optimizer.beta2},
                {"epsilon", c.optimizer.epsilon}}},
              {"batch_size", c.batch_size},
              {"seed", c.seed}};
}

std::string_view baseline_kind(BaselineVariant variant) {
  return variant == BaselineVariant::kTurian ? "baseline-turian" : "baseline-standard";
}

std::string serialize_model(const TaggerModel& model) {
  json params = json::array();
  for (const auto& [name, tensor] : model.parameters()) params.push_back(tensor_json(name, *tensor));
  json j{{"format_version", kModelFormatVersion},
         {"kind", "neural"},
         {"config", config_to_json(model.config)},
         {"tags", model.tags},
         {"pos", model.pos.entries()},
         {"embedding_dim", model.embedding_dim},
         {"embeddings_source", model.embeddings_source},
         {"parameters", std::move(params)}};
  if (!model.words.empty()) j["words"] = model.words;
  return j.dump() + "\n";
}

std::string serialize_model(const BaselineModel& m) {
  json j{{"format_version", kModelFormatVersion},
         {"kind", baseline_kind(m.variant)},
         {"sigma", m.sigma},
         {"tags", m.tags},
         {"features", m.features},
         {"embedding_dim", m.embedding_dim},
         {"embeddings_source", m.embeddings_source},
         {"parameters",
          {tensor_json("feature_weights", m.feature_weights),
           tensor_json("dense_weights", m.dense_weights),
           tensor_json("transitions", m.transitions), tensor_json("start", m.start),
           tensor_json("stop", m.stop)}}};
  return j.dump() + "\n";
}

AnyModel parse_model(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ModelFormatError("model file is not a JSON object");
    check_version(j);
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "neural") return neural_from_json(j);
    if (kind == baseline_kind(BaselineVariant::kStandard))
      return baseline_from_json(j, BaselineVariant::kStandard);
    if (kind == baseline_kind(BaselineVariant::kTurian))
      return baseline_from_json(j, BaselineVariant::kTurian);
    throw ModelFormatError("unknown model kind '" + kind + "'");
  } catch (const ModelFormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("corrupt model file: ") + e.what());
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const AnyModel& model, const std::string& path) {
  const std::string text = std::visit([](const auto& m) { return serialize_model(m); }, model);
  write_file_atomic(path, text);
}

AnyModel load_model(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_model(text);
  } catch (const ModelFormatError& e) {
    throw ModelFormatError(path + ": " + e.what());
  }
}

}  // namespace mwetag
