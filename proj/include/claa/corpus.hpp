#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "claa/aspect.hpp"

namespace claa {

enum class SourceKind { Post, Comment };

struct SentenceSource {
  std::optional<std::string> post_id;
  std::optional<std::string> url;
  SourceKind kind = SourceKind::Post;

  friend bool operator==(const SentenceSource&, const SentenceSource&) = default;
};

struct ReviewSentence {
  std::string id;
  std::string text;
  // Gold labels in canonical order, no repeats. Empty only for ingested data.
  std::vector<Aspect> aspects;
  std::optional<SentenceSource> source;

  bool has(Aspect a) const;
  friend bool operator==(const ReviewSentence&, const ReviewSentence&) = default;
};

struct CorpusSummary {
  std::size_t sentences = 0;
  std::array<std::size_t, kAspectCount> per_aspect{};
  std::size_t unlabeled = 0;
  // Sentence count keyed by label-set size (1, 2, 3, ...).
  std::map<std::size_t, std::size_t> by_label_count;

  std::size_t count(Aspect a) const { return per_aspect[aspect_index(a)]; }
};

class Corpus {
 public:
  Corpus() = default;
  // Throws ValidationError on duplicate ids or empty text.
  explicit Corpus(std::vector<ReviewSentence> sentences);

  const std::vector<ReviewSentence>& sentences() const { return sentences_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  const ReviewSentence& operator[](std::size_t i) const { return sentences_[i]; }

  CorpusSummary summary() const;
  // Content hash over the canonical JSONL serialization.
  std::string fingerprint() const;

 private:
  std::vector<ReviewSentence> sentences_;
};

// Dataset file: one JSON object per line,
// {"id", "text", "aspects": [..], "source": {post_id,url,kind}|null}.
Corpus load_benchmark(const std::filesystem::path& path);
Corpus parse_benchmark(std::istream& in, const std::string& origin = "<stream>");

std::string to_jsonl_line(const ReviewSentence& s);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

// Two-column CSV (text, pipe-separated aspects), optional header row.
// Ids are "row-<n>" with n the 1-based data row number.
Corpus convert_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Per-aspect binary tasks

struct BinaryItem {
  ReviewSentence sentence;
  int label = 0;
  // Set on copies produced by augment_minority; never evaluated on.
  bool duplicate = false;
};

struct BinaryDataset {
  Aspect aspect = Aspect::Others;
  std::vector<BinaryItem> items;
  bool augmented = false;

  std::size_t positives() const;
  std::size_t negatives() const { return items.size() - positives(); }
  std::size_t size() const { return items.size(); }
};

BinaryDataset derive_binary_task(const Corpus& corpus, Aspect aspect);

inline constexpr std::size_t kDefaultAugmentThreshold = 100;

// Positive count < threshold: every positive gets one duplicate (flagged)
// appended after the originals. Otherwise returns the items unchanged.
// Either way the result is marked augmented; a second call throws.
BinaryDataset augment_minority(const BinaryDataset& dataset,
                               std::size_t threshold = kDefaultAugmentThreshold);

// Same decision but from an externally supplied positive count; used by
// cross validation, where the threshold is judged on the full task while
// duplicates are only added to training folds.
BinaryDataset augment_minority_with_count(const BinaryDataset& dataset, std::size_t decision_count,
                                          std::size_t threshold = kDefaultAugmentThreshold);

struct FoldPlan {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> assignments;

  std::size_t fold_of(const std::string& id) const;
  std::vector<std::size_t> fold_sizes() const;
};

// Stratified k-fold over unique sentence ids. Duplicates share their
// original's id and therefore its fold.
FoldPlan make_folds(const BinaryDataset& dataset, std::size_t k, std::uint64_t seed);

struct FoldSplit {
  BinaryDataset train;
  BinaryDataset test;
};

// Test side never contains duplicates.
FoldSplit split_fold(const BinaryDataset& dataset, const FoldPlan& plan, std::size_t fold);

// Indices into BinaryDataset::items.
struct Batch {
  std::vector<std::size_t> indices;
  std::size_t size() const { return indices.size(); }
};

enum class ShortfallPolicy {
  // Fewer positives than batches: throw.
  Strict,
  // Fewer positives than batches: positive-less batches borrow one extra
  // positive copy, so those batches may hold batch_size + 1 items.
  Borrow,
};

std::vector<Batch> make_batches(const BinaryDataset& dataset, std::size_t batch_size,
                                std::uint64_t seed,
                                ShortfallPolicy policy = ShortfallPolicy::Borrow);

}  // namespace claa
