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

#ifndef MWETAG_TESTS_SYNTHETIC_H_
#define MWETAG_TESTS_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mwetag/corpus.h"
#include "mwetag/embed.h"
#include "mwetag/rng.h"

namespace mwetag::testing {

// Generated corpus: about 100 word types, VID and LVC.full instances built
// from a fixed verb + noun lexicon, every tenth instance discontinuous (one
// filler word in the gap), and some lexicon verbs used literally.
struct SyntheticCorpus {
  Corpus sentences;
  std::size_t instances = 0;
  std::size_t discontinuous = 0;
  std::size_t vocabulary = 0;
};

SyntheticCorpus synthetic_corpus(std::size_t sentence_count, std::uint64_t seed);

// U(-1, 1) vectors for every form in the corpus.
EmbeddingTable random_embeddings(const Corpus& corpus, std::size_t dim, std::uint64_t seed);
// The same vectors in the text format, with a header line.
std::string vec_text(const Corpus& corpus, std::size_t dim, std::uint64_t seed);

Token make_token(int id, const std::string& form, const std::string& upos,
                 const std::string& lemma = "");

// Adds an instance and refreshes the MWE column of every token.
void annotate(Sentence& sentence, const std::string& category, std::vector<int> positions);

// Random sentence of 1..max_len tokens with instances of up to three
// categories. Instances of one category never share or interleave tokens,
// so the tag encoding is lossless; different categories overlap freely.
Sentence random_annotated_sentence(RngStream& rng, std::size_t max_len);

// Random label sequence over B-/I- atoms of two categories, including
// joined labels and orphans.
TagSequence random_tags(RngStream& rng, std::size_t max_len);

// (category, positions) pairs, sorted.
std::vector<std::pair<std::string, std::vector<int>>> spans(const Sentence& sentence);

// Sentence-level cupt text with one token per entry of `annotations`.
std::string cupt_sentence(const std::vector<std::string>& forms,
                          const std::vector<std::string>& annotations);

}  // namespace mwetag::testing

#endif  // MWETAG_TESTS_SYNTHETIC_H_
