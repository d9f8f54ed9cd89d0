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

#include "mwetag/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mwetag/error.h"

namespace mwetag {
namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(sep, start);
    parts.emplace_back(text.substr(start, end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

bool parse_positive(std::string_view text, int& value) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end && value >= 1;
}

bool is_unannotated(std::string_view column) { return column == "*" || column == "_"; }

class SentenceBuilder {
 public:
  bool empty() const { return sentence_.tokens.empty() && sentence_.source_comments.empty() &&
                              sentence_.raw_lines.empty(); }

  void add_comment(std::string line) {
    if (sentence_.tokens.empty() && sentence_.raw_lines.empty())
      sentence_.source_comments.push_back(std::move(line));
    else
      sentence_.raw_lines.push_back({sentence_.tokens.size(), std::move(line)});
  }

  void add_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != kCuptColumns)
      throw ParseError(line_no, "expected " + std::to_string(kCuptColumns) +
                                    " tab-separated columns, found " +
                                    std::to_string(cols.size()));
    const std::string& id_text = cols[0];
    if (id_text.find_first_of("-.") != std::string::npos) {
      sentence_.raw_lines.push_back({sentence_.tokens.size(), line});
      return;
    }
    Token tok;
    if (!parse_positive(id_text, tok.id))
      throw ParseError(line_no, "invalid token id '" + id_text + "'");
    if (tok.id != static_cast<int>(sentence_.tokens.size()) + 1)
      throw ParseError(line_no, "token id " + id_text + " out of sequence");
    if (cols[1].empty()) throw ParseError(line_no, "empty word form");
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.misc_columns.assign(cols.begin() + 4, cols.end() - 1);
    tok.mwe_annotation = cols.back();
    if (!is_unannotated(tok.mwe_annotation)) add_annotation(tok, line_no);
    sentence_.tokens.push_back(std::move(tok));
  }

  Sentence finish() {
    std::vector<VmweInstance> vmwes;
    for (auto& [id, inst] : open_) vmwes.push_back(std::move(inst));
    sentence_.vmwes = std::move(vmwes);
    Sentence out = std::move(sentence_);
    sentence_ = Sentence{};
    open_.clear();
    return out;
  }

 private:
  void add_annotation(const Token& tok, std::size_t line_no) {
    for (const std::string& item : split(tok.mwe_annotation, ';')) {
      const std::size_t colon = item.find(':');
      int k = 0;
      if (!parse_positive(std::string_view(item).substr(0, colon), k))
        throw ParseError(line_no, "malformed MWE annotation item '" + item + "'");
      if (colon != std::string::npos) {
        std::string category = item.substr(colon + 1);
        if (category.empty()) throw ParseError(line_no, "empty MWE category in '" + item + "'");
        if (open_.count(k))
          throw ParseError(line_no, "MWE " + std::to_string(k) + " opened twice");
        open_[k] = VmweInstance{k, std::move(category), {tok.id}};
      } else {
        auto it = open_.find(k);
        if (it == open_.end())
          throw ParseError(line_no, "MWE " + std::to_string(k) +
                                        " continued before its category was given");
        auto& positions = it->second.token_positions;
        if (positions.back() == tok.id)
          throw ParseError(line_no, "MWE " + std::to_string(k) + " repeated on one token");
        positions.push_back(tok.id);
      }
    }
  }

  Sentence sentence_;
  std::map<int, VmweInstance> open_;
};

}  // namespace

Corpus parse_cupt(std::istream& in) {
  Corpus corpus;
  SentenceBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!builder.empty()) corpus.push_back(builder.finish());
      continue;
    }
    if (line.front() == '#')
      builder.add_comment(line);
    else
      builder.add_line(line, line_no);
  }
  if (!builder.empty()) corpus.push_back(builder.finish());
  return corpus;
}

Corpus parse_cupt_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_cupt(in);
}

Corpus read_cupt_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return parse_cupt(in);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string annotation_column(const Sentence& sentence, std::size_t token_index) {
  const int id = static_cast<int>(token_index) + 1;
  std::vector<const VmweInstance*> sorted;
  for (const auto& v : sentence.vmwes) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(),
            [](const VmweInstance* a, const VmweInstance* b) { return a->vmwe_id < b->vmwe_id; });
  std::string out;
  for (const VmweInstance* v : sorted) {
    const auto& pos = v->token_positions;
    if (std::find(pos.begin(), pos.end(), id) == pos.end()) continue;
    if (!out.empty()) out += ';';
    out += std::to_string(v->vmwe_id);
    if (pos.front() == id) out += ":" + v->category;
  }
  return out.empty() ? "*" : out;
}

std::string write_cupt(const Corpus& corpus) {
  std::string out;
  for (const Sentence& s : corpus) {
    for (const auto& v : s.vmwes)
      if (v.token_positions.empty())
        throw SerializationError("MWE " + std::to_string(v.vmwe_id) + " has no tokens");
    for (const auto& c : s.source_comments) out += c + '\n';
    auto raw = s.raw_lines.begin();
    for (std::size_t i = 0; i <= s.tokens.size(); ++i) {
      for (; raw != s.raw_lines.end() && raw->after_tokens == i; ++raw) out += raw->text + '\n';
      if (i == s.tokens.size()) break;
      const Token& t = s.tokens[i];
      out += std::to_string(i + 1) + '\t' + t.form + '\t' + t.lemma + '\t' + t.upos;
      for (std::size_t c = 0; c + 5 < kCuptColumns; ++c)
        out += '\t' + (c < t.misc_columns.size() ? t.misc_columns[c] : std::string("_"));
      out += '\t' + annotation_column(s, i) + '\n';
    }
    for (; raw != s.raw_lines.end(); ++raw) out += raw->text + '\n';
    out += '\n';
  }
  return out;
}

std::vector<TagAtom> split_label(std::string_view label) {
  std::vector<TagAtom> atoms;
  if (label == kOutside) return atoms;
  for (const std::string& part : split(label, ';')) {
    if (part.size() < 3 || (part[0] != 'B' && part[0] != 'I') || part[1] != '-')
      throw DataError("malformed tag '" + std::string(label) + "'");
    atoms.push_back({part[0] == 'B', part.substr(2)});
  }
  return atoms;
}

std::string join_atoms(const std::vector<TagAtom>& atoms) {
  if (atoms.empty()) return std::string(kOutside);
  std::string out;
  for (const auto& a : atoms) {
    if (!out.empty()) out += ';';
    out += a.str();
  }
  return out;
}

TagSequence to_tags(const Sentence& sentence) {
  std::vector<std::vector<TagAtom>> atoms(sentence.tokens.size());
  std::vector<const VmweInstance*> sorted;
  for (const auto& v : sentence.vmwes) sorted.push_back(&v);
  std::sort(sorted.begin(), sorted.end(),
            [](const VmweInstance* a, const VmweInstance* b) { return a->vmwe_id < b->vmwe_id; });
  for (const VmweInstance* v : sorted)
    for (std::size_t k = 0; k < v->token_positions.size(); ++k)
      atoms[static_cast<std::size_t>(v->token_positions[k] - 1)].push_back({k == 0, v->category});
  TagSequence tags;
  tags.reserve(atoms.size());
  for (const auto& a : atoms) tags.push_back(join_atoms(a));
  return tags;
}

TagSequence filter_orphans(const TagSequence& tags) {
  std::set<std::string> opened;
  TagSequence out;
  out.reserve(tags.size());
  for (const std::string& label : tags) {
    std::vector<TagAtom> kept;
    std::vector<std::string> begun;
    for (auto& atom : split_label(label)) {
      if (atom.begin)
        begun.push_back(atom.category);
      else if (!opened.count(atom.category))
        continue;
      kept.push_back(std::move(atom));
    }
    opened.insert(begun.begin(), begun.end());
    out.push_back(join_atoms(kept));
  }
  return out;
}

Sentence from_tags(const TagSequence& tags, const Sentence& sentence, bool apply_filter) {
  if (tags.size() != sentence.tokens.size())
    throw ContractViolation("tag sequence length " + std::to_string(tags.size()) +
                            " does not match sentence length " +
                            std::to_string(sentence.tokens.size()));
  const TagSequence labels = apply_filter ? filter_orphans(tags) : tags;
  std::vector<VmweInstance> built;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int id = static_cast<int>(p) + 1;
    for (const TagAtom& atom : split_label(labels[p])) {
      if (atom.begin) {
        built.push_back({0, atom.category, {id}});
        continue;
      }
      // Nearest preceding open instance of the same category.
      auto it = std::find_if(built.rbegin(), built.rend(), [&](const VmweInstance& v) {
        return v.category == atom.category && v.token_positions.back() != id;
      });
      if (it != built.rend())
        it->token_positions.push_back(id);
      else if (!apply_filter)
        built.push_back({0, atom.category, {id}});
    }
  }
  Sentence out = sentence;
  for (std::size_t i = 0; i < built.size(); ++i) built[i].vmwe_id = static_cast<int>(i) + 1;
  out.vmwes = std::move(built);
  for (std::size_t i = 0; i < out.tokens.size(); ++i)
    out.tokens[i].mwe_annotation = annotation_column(out, i);
  return out;
}

std::vector<std::string> tag_vocabulary(const Corpus& corpus) {
  std::set<std::string> labels{std::string(kOutside)};
  for (const Sentence& s : corpus)
    for (auto& t : to_tags(s)) labels.insert(std::move(t));
  return {labels.begin(), labels.end()};
}

}  // namespace mwetag
