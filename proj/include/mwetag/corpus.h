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

#ifndef MWETAG_CORPUS_H_
#define MWETAG_CORPUS_H_

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace mwetag {

// One taggable row of a .cupt file.
struct Token {
  int id = 0;  // 1-based, consecutive within the sentence
  std::string form;
  std::string lemma;
  std::string upos;
  // XPOS through MISC, verbatim.
  std::vector<std::string> misc_columns;
  // Raw PARSEME:MWE column as read ("*", "_", or items like "1:VID;2").
  std::string mwe_annotation = "*";
};

// A verbal MWE occurrence.
struct VmweInstance {
  int vmwe_id = 0;
  std::string category;
  std::vector<int> token_positions;  // strictly increasing token ids
};

// A line kept verbatim that is not a tagging position: multiword-token
// ranges ("3-4") and empty nodes ("3.1"). It is emitted after the first
// `after_tokens` tokens.
struct RawLine {
  std::size_t after_tokens = 0;
  std::string text;
};

struct Sentence {
  std::vector<std::string> source_comments;  // including the leading '#'
  std::vector<Token> tokens;
  std::vector<RawLine> raw_lines;
  std::vector<VmweInstance> vmwes;
};

using Corpus = std::vector<Sentence>;

// One label per taggable token: "O" or a ';'-join of B-CAT / I-CAT atoms.
using TagSequence = std::vector<std::string>;

inline constexpr std::size_t kCuptColumns = 11;
inline constexpr std::string_view kOutside = "O";

// Throws ParseError (with the line number) on malformed input.
Corpus parse_cupt(std::istream& in);
Corpus parse_cupt_string(std::string_view text);
Corpus read_cupt_file(const std::string& path);

// The MWE column of every token is regenerated from sentence.vmwes.
// Throws SerializationError on an instance without positions.
std::string write_cupt(const Corpus& corpus);

// MWE column for the token at index `token_index` derived from the vmwes.
std::string annotation_column(const Sentence& sentence, std::size_t token_index);

TagSequence to_tags(const Sentence& sentence);

// Rebuilds sentence.vmwes (and the raw MWE column) from a tag sequence.
Sentence from_tags(const TagSequence& tags, const Sentence& sentence, bool apply_filter);

// Drops every I-CAT atom that has no B-CAT atom of the same category at a
// strictly earlier position; labels left without atoms become O.
TagSequence filter_orphans(const TagSequence& tags);

// Sorted, deduplicated labels over the corpus; always contains O.
std::vector<std::string> tag_vocabulary(const Corpus& corpus);

// Label atoms.
struct TagAtom {
  bool begin = false;
  std::string category;

  std::string str() const { return (begin ? "B-" : "I-") + category; }
  bool operator==(const TagAtom&) const = default;
};

// Splits a label into atoms; "O" yields none. Throws DataError on
// malformed labels.
std::vector<TagAtom> split_label(std::string_view label);
std::string join_atoms(const std::vector<TagAtom>& atoms);

}  // namespace mwetag

#endif  // MWETAG_CORPUS_H_
