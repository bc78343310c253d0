#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "claa/aspect.hpp"
#include "claa/corpus.hpp"

namespace claa {

struct KeywordAspect {
  Aspect aspect;
  std::vector<std::string> keywords;
};

// Seeded corpus where an aspect is present iff one of its keywords is.
// Sentences are neutral filler words with keywords inserted at random
// positions; background sentences carry no keyword.
struct KeywordCorpusOptions {
  std::vector<KeywordAspect> aspects;
  std::size_t sentences_per_aspect = 40;
  std::size_t background_sentences = 40;
  // Label for keyword-free sentences.
  Aspect background_aspect = Aspect::Others;
  std::size_t min_words = 5;
  std::size_t max_words = 10;
  std::uint64_t seed = 0;
  std::string id_prefix = "syn";
};

Corpus make_keyword_corpus(const KeywordCorpusOptions& options);

// Two or three keywords for each aspect except Others.
std::vector<KeywordAspect> default_fixture_keywords();

// The filler vocabulary; none of its words is a fixture keyword.
const std::vector<std::string>& filler_words();

}  // namespace claa
