#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "claa/aspect.hpp"
#include "claa/classifier.hpp"
#include "claa/corpus.hpp"
#include "claa/html.hpp"

namespace claa {

// Rule-based splitter. A whitespace-delimited token ending in '.', '!' or
// '?' (optionally followed by closing quotes or brackets) ends a sentence
// unless it is a guarded abbreviation or a single-letter initial. Splits
// only happen at whitespace, so URLs and dotted names stay whole.
std::vector<std::string> split_sentences(std::string_view text);

// Streaming reader for Stack Exchange dump files: a root element holding
// self-closing <row .../> elements whose attributes carry the data.
class XmlRowReader {
 public:
  explicit XmlRowReader(std::istream& in, std::string origin = "<stream>");

  // Name of the root element; reads up to it on first call. Throws
  // ValidationError when the input holds no element.
  const std::string& root();
  // Next row's attributes (entity-decoded), nullopt at the end.
  std::optional<std::map<std::string, std::string>> next();

 private:
  bool read_tag(std::string& tag);
  std::istream& in_;
  std::string origin_;
  std::optional<std::string> root_;
  std::size_t rows_ = 0;
};

// "<a><b>" or "|a|b|" into {"a", "b"}, lowercased.
std::set<std::string> parse_tags(std::string_view tags);

struct IngestOptions {
  std::set<std::string> tags;
  StripOptions strip;
  // Sentences shorter than this (bytes, after trimming) are dropped.
  std::size_t min_length = 3;
};

struct IngestStats {
  std::size_t posts = 0;
  std::size_t questions = 0;
  std::size_t answers = 0;
  std::size_t comments = 0;
  std::size_t sentences = 0;
  // Sentences produced by the splitter before filtering.
  std::size_t split_total = 0;
  std::map<std::string, std::size_t> dropped;

  std::size_t dropped_total() const;
};

nlohmann::json to_json(const IngestStats& s);

struct IngestResult {
  Corpus corpus;
  IngestStats stats;
};

// path is a dump directory (Posts.xml and optional Comments.xml) or a
// Posts.xml file with Comments.xml looked up beside it. Questions are kept
// when their tags intersect options.tags; answers and comments inherit the
// tags of their question. Titles count as their own text. Sentence ids are
// p<post>-s<n> and c<comment>-s<n>.
IngestResult ingest_dump(const std::filesystem::path& path, const IngestOptions& options);

// ---------------------------------------------------------------------------

struct SystemDistribution {
  std::string name;
  std::size_t sentences = 0;
  std::array<std::size_t, kAspectCount> per_aspect{};
  std::size_t none = 0;
  // Sentences keyed by how many aspects they received (2, 3, ...).
  std::map<std::size_t, std::size_t> multi;
};

struct DistributionReport {
  std::vector<SystemDistribution> systems;
  std::optional<double> threshold;
};

// One column per (name, bundle).
DistributionReport aspect_distribution(std::span<const std::pair<std::string, const AspectModelBundle*>> systems,
                                       const Corpus& sentences, std::optional<double> threshold = std::nullopt);

nlohmann::json to_json(const DistributionReport& r);
// Rows: aspects, None, 2-aspect, 3-aspect, ...; one column per system.
std::string distribution_csv(const DistributionReport& r);

}  // namespace claa
