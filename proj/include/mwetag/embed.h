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

#ifndef MWETAG_EMBED_H_
#define MWETAG_EMBED_H_

#include <array>
#include <cstddef>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mwetag/corpus.h"
#include "mwetag/tensor.h"

namespace mwetag {

// Frozen word -> vector table. Immutable once loaded.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension = 0);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }

  // Returns false (and keeps the existing row) when the word is present.
  bool insert(const std::string& word, std::span<const double> vec);

  // Exact match only; empty span when absent.
  std::span<const double> find(const std::string& word) const;
  // Exact match, then lowercase match, then the zero vector.
  std::span<const double> lookup(const std::string& word) const;

  // Non-fatal issues seen while loading (duplicate words).
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> rows_;
  std::vector<double> zeros_;
  std::vector<std::string> warnings_;
};

// Text vector format: optional "count dim" header, then "word v1 ... vD" per
// line. gzip input is detected from its magic bytes. Throws ParseError
// naming the line on a wrong value count or a header/dimension mismatch.
// expected_dim = 0 takes the dimension from the header or the first vector.
EmbeddingTable load_vec(std::istream& in, std::size_t expected_dim);
EmbeddingTable load_vec_file(const std::string& path, std::size_t expected_dim);

// Binary word-shape flags, in this order.
enum ShapeBit : std::size_t {
  kStartsWithCapital = 0,
  kAllCapitals,
  kFirstCharHash,
  kFirstCharAt,
  kIsUrl,
  kContainsDigit,
  kIsAllDigits,
};
inline constexpr std::size_t kShapeFeatureCount = 7;

struct ShapeFeatures {
  std::array<int, kShapeFeatureCount> bits{};
  bool operator==(const ShapeFeatures&) const = default;
};

ShapeFeatures shape_features(std::string_view form);

// Dense POS index with "<UNK>" at 0 followed by the sorted observed tags.
class PosVocabulary {
 public:
  PosVocabulary();
  explicit PosVocabulary(std::vector<std::string> entries);

  std::size_t size() const { return entries_.size(); }
  std::size_t index(const std::string& upos) const;
  const std::vector<std::string>& entries() const { return entries_; }

  static constexpr std::string_view kUnknown = "<UNK>";

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

PosVocabulary pos_vocabulary(const Corpus& corpus);

struct SentenceEncoding {
  Tensor word_input;  // n x (dim + 7): embedding followed by shape bits
  Tensor pos_input;   // n x |P| one-hot
  // Rows into a trainable embedding matrix; only used when the model owns
  // its embeddings.
  std::vector<std::size_t> word_ids;

  std::size_t length() const { return word_input.rows(); }
};

SentenceEncoding encode(const Sentence& sentence, const EmbeddingTable& table,
                        const PosVocabulary& posv);

}  // namespace mwetag

#endif  // MWETAG_EMBED_H_
