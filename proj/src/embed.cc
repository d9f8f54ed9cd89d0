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

#include "mwetag/embed.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "mwetag/error.h"
#include "mwetag/unicode.h"

namespace mwetag {

EmbeddingTable::EmbeddingTable(std::size_t dimension)
    : dimension_(dimension), zeros_(dimension, 0.0) {}

bool EmbeddingTable::insert(const std::string& word, std::span<const double> vec) {
  if (vec.size() != dimension_)
    throw ContractViolation("embedding for '" + word + "' has " + std::to_string(vec.size()) +
                            " values, table dimension is " + std::to_string(dimension_));
  if (!index_.emplace(word, index_.size()).second) return false;
  rows_.insert(rows_.end(), vec.begin(), vec.end());
  return true;
}

std::span<const double> EmbeddingTable::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return {};
  return {rows_.data() + it->second * dimension_, dimension_};
}

std::span<const double> EmbeddingTable::lookup(const std::string& word) const {
  if (index_.count(word)) return find(word);
  const std::string lower = unicode::to_lower(word);
  if (lower != word && index_.count(lower)) return find(lower);
  return zeros_;
}

namespace {

std::string gunzip(const std::string& compressed) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw DataError("zlib initialisation failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  std::string out;
  char buffer[1 << 16];
  int status = Z_OK;
  while (status != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof(buffer);
    status = inflate(&zs, Z_NO_FLUSH);
    if (status != Z_OK && status != Z_STREAM_END) {
      inflateEnd(&zs);
      throw DataError("corrupt gzip vector stream");
    }
    out.append(buffer, sizeof(buffer) - zs.avail_out);
    if (status == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw DataError("truncated gzip vector stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_size(std::string_view s, std::size_t& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

EmbeddingTable parse_vec_text(std::istream& in, std::size_t expected_dim) {
  std::size_t dim = expected_dim;
  EmbeddingTable table(std::max<std::size_t>(dim, 1));
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto parts = fields(line);
    if (parts.empty()) continue;
    std::size_t count = 0, declared = 0;
    if (line_no == 1 && parts.size() == 2 && parse_size(parts[0], count) &&
        parse_size(parts[1], declared) && expected_dim != 1) {
      if (dim == 0 && declared > 0) {
        dim = declared;
        table = EmbeddingTable(dim);
      }
      if (declared != dim)
        throw ParseError(line_no, "header declares dimension " + std::to_string(declared) +
                                      ", expected " + std::to_string(dim));
      continue;
    }
    if (dim == 0) {
      if (parts.size() < 2) throw ParseError(line_no, "vector line has no values");
      dim = parts.size() - 1;
      table = EmbeddingTable(dim);
    }
    if (parts.size() - 1 != dim)
      throw ParseError(line_no, "expected " + std::to_string(dim) + " values for '" +
                                    std::string(parts[0]) + "', found " +
                                    std::to_string(parts.size() - 1));
    values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const std::string_view f = parts[k + 1];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), values[k]);
      if (ec != std::errc() || p != f.data() + f.size())
        throw ParseError(line_no, "invalid number '" + std::string(f) + "'");
    }
    const std::string word(parts[0]);
    if (!table.insert(word, values))
      table.add_warning("line " + std::to_string(line_no) + ": duplicate word '" + word +
                        "' ignored");
  }
  if (dim == 0) throw ParseError(line_no, "no vectors found, dimension unknown");
  return table;
}

}  // namespace

EmbeddingTable load_vec(std::istream& in, std::size_t expected_dim) {
  const int first = in.peek();
  if (first == 0x1f) {
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() >= 2 && static_cast<unsigned char>(raw[1]) == 0x8b) {
      std::istringstream text(gunzip(raw));
      return parse_vec_text(text, expected_dim);
    }
    std::istringstream text(raw);
    return parse_vec_text(text, expected_dim);
  }
  return parse_vec_text(in, expected_dim);
}

EmbeddingTable load_vec_file(const std::string& path, std::size_t expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return load_vec(in, expected_dim);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

ShapeFeatures shape_features(std::string_view form) {
  ShapeFeatures out;
  const std::vector<char32_t> chars = unicode::decode_utf8(form);
  if (chars.empty()) return out;
  out.bits[kStartsWithCapital] = unicode::is_upper(chars.front());
  out.bits[kAllCapitals] =
      std::all_of(chars.begin(), chars.end(), [](char32_t c) { return unicode::is_upper(c); });
  out.bits[kFirstCharHash] = chars.front() == U'#';
  out.bits[kFirstCharAt] = chars.front() == U'@';
  out.bits[kIsUrl] = form.starts_with("http://") || form.starts_with("https://") ||
                     form.starts_with("www.");
  out.bits[kContainsDigit] =
      std::any_of(chars.begin(), chars.end(), [](char32_t c) { return unicode::is_digit(c); });
  out.bits[kIsAllDigits] =
      std::all_of(chars.begin(), chars.end(), [](char32_t c) { return unicode::is_digit(c); });
  return out;
}

PosVocabulary::PosVocabulary() : PosVocabulary(std::vector<std::string>{std::string(kUnknown)}) {}

PosVocabulary::PosVocabulary(std::vector<std::string> entries) : entries_(std::move(entries)) {
  if (entries_.empty() || entries_.front() != kUnknown)
    throw ContractViolation("POS vocabulary must start with " + std::string(kUnknown));
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!index_.emplace(entries_[i], i).second)
      throw ContractViolation("duplicate POS entry '" + entries_[i] + "'");
}

std::size_t PosVocabulary::index(const std::string& upos) const {
  auto it = index_.find(upos);
  return it == index_.end() ? 0 : it->second;
}

PosVocabulary pos_vocabulary(const Corpus& corpus) {
  std::set<std::string> tags;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens) tags.insert(t.upos);
  tags.erase(std::string(PosVocabulary::kUnknown));
  std::vector<std::string> entries{std::string(PosVocabulary::kUnknown)};
  entries.insert(entries.end(), tags.begin(), tags.end());
  return PosVocabulary(std::move(entries));
}

SentenceEncoding encode(const Sentence& sentence, const EmbeddingTable& table,
                        const PosVocabulary& posv) {
  const std::size_t n = sentence.tokens.size();
  if (n == 0) throw ContractViolation("cannot encode an empty sentence");
  const std::size_t dim = table.dimension();
  SentenceEncoding enc;
  enc.word_input = Tensor({n, dim + kShapeFeatureCount});
  enc.pos_input = Tensor({n, posv.size()});
  for (std::size_t i = 0; i < n; ++i) {
    const Token& tok = sentence.tokens[i];
    auto row = enc.word_input.row(i);
    auto vec = table.lookup(tok.form);
    std::copy(vec.begin(), vec.end(), row.begin());
    const ShapeFeatures shape = shape_features(tok.form);
    for (std::size_t b = 0; b < kShapeFeatureCount; ++b) row[dim + b] = shape.bits[b];
    enc.pos_input(i, posv.index(tok.upos)) = 1.0;
  }
  return enc;
}

}  // namespace mwetag
