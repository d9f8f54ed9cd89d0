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

#ifndef MWETAG_GRADSUITE_H_
#define MWETAG_GRADSUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mwetag/tagger.h"

namespace mwetag {

struct GradCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
};

inline constexpr double kGradCheckTolerance = 1e-4;

// Central-difference checks of every differentiable operation on small
// random inputs drawn from `seed`: dense, conv1d_same, bilstm (with
// dropout masks), softmax + cross-entropy, crf_nll, the full tagger loss for
// both heads and with trainable embeddings, and the baseline objective.
std::vector<GradCheckEntry> run_gradient_suite(std::uint64_t seed);

// The tiny tagger used by the suite: embedding dim 5, 3 filters per width,
// hidden 4, three tags.
TaggerConfig tiny_tagger_config(Head head);

}  // namespace mwetag

#endif  // MWETAG_GRADSUITE_H_
