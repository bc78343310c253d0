#include "claa/synthetic.hpp"

#include <cctype>

#include "claa/error.hpp"
#include "claa/util.hpp"

namespace claa {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words{
      "the",    "we",     "it",     "this",   "method", "call",   "returns", "value",   "when",
      "pass",   "data",   "into",   "then",   "our",    "code",   "uses",    "object",  "list",
      "string", "field",  "class",  "module", "team",   "today",  "client",  "request", "after",
      "before", "every",  "some",   "other",  "with",   "from",   "file",    "output",  "input",
      "parser", "map",    "key",    "array",  "loop",   "builder", "wrapper", "helper", "simple",
      "here",   "there",  "again",  "still",  "maybe",  "really", "just",    "also",    "only"};
  return words;
}

std::vector<KeywordAspect> default_fixture_keywords() {
  return {
      {Aspect::Performance, {"fast", "latency", "slow"}},
      {Aspect::Usability, {"easy", "intuitive"}},
      {Aspect::Security, {"encryption", "cipher"}},
      {Aspect::Community, {"forum", "community"}},
      {Aspect::Compatibility, {"compatible", "version"}},
      {Aspect::Portability, {"android", "windows"}},
      {Aspect::Documentation, {"docs", "tutorial"}},
      {Aspect::Bug, {"bug", "crash"}},
      {Aspect::Legal, {"license", "copyright"}},
      {Aspect::OnlySentiment, {"love", "awesome"}},
  };
}

namespace {

std::string make_sentence(Rng& rng, const KeywordCorpusOptions& o, const std::string* keyword) {
  const auto& filler = filler_words();
  const std::size_t n = o.min_words + uniform_index(rng, o.max_words - o.min_words + 1);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < n; ++i) words.push_back(filler[uniform_index(rng, filler.size())]);
  if (keyword) words.insert(words.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, n + 1)), *keyword);
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out + ".";
}

}  // namespace

Corpus make_keyword_corpus(const KeywordCorpusOptions& options) {
  if (options.min_words == 0 || options.max_words < options.min_words) {
    throw ValidationError("keyword corpus: need 0 < min_words <= max_words");
  }
  Rng rng(options.seed);
  std::vector<ReviewSentence> out;
  std::size_t next = 0;
  auto add = [&](std::string text, std::vector<Aspect> aspects) {
    out.push_back({options.id_prefix + "-" + std::to_string(++next), std::move(text), std::move(aspects), std::nullopt});
  };
  for (const auto& ka : options.aspects) {
    if (ka.keywords.empty()) throw ValidationError("keyword corpus: aspect without keywords");
    for (std::size_t i = 0; i < options.sentences_per_aspect; ++i) {
      const auto& kw = ka.keywords[uniform_index(rng, ka.keywords.size())];
      add(make_sentence(rng, options, &kw), {ka.aspect});
    }
  }
  for (std::size_t i = 0; i < options.background_sentences; ++i) {
    add(make_sentence(rng, options, nullptr), {options.background_aspect});
  }
  shuffle_in_place(out, rng);
  return Corpus(std::move(out));
}

}  // namespace claa
