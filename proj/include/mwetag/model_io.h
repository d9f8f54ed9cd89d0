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

#ifndef MWETAG_MODEL_IO_H_
#define MWETAG_MODEL_IO_H_

#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "mwetag/baseline.h"
#include "mwetag/tagger.h"

namespace mwetag {

inline constexpr int kModelFormatVersion = 1;

using AnyModel = std::variant<TaggerModel, BaselineModel>;

// Partial objects are accepted: absent fields keep the value from `base`.
// Unknown fields and ill-typed values throw DataError.
TaggerConfig config_from_json(const nlohmann::json& j, TaggerConfig base = {});
nlohmann::json config_to_json(const TaggerConfig& config);

std::string_view baseline_kind(BaselineVariant variant);

std::string serialize_model(const TaggerModel& model);
std::string serialize_model(const BaselineModel& model);

// Throws ModelFormatError on malformed text, a version mismatch, or
// parameters that do not fit the declared configuration.
AnyModel parse_model(std::string_view text);

void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

}  // namespace mwetag

#endif  // MWETAG_MODEL_IO_H_
