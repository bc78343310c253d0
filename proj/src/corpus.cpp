#include "claa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "claa/error.hpp"
#include "claa/html.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

bool ReviewSentence::has(Aspect a) const {
  return std::find(aspects.begin(), aspects.end(), a) != aspects.end();
}

namespace {

void canonicalize(std::vector<Aspect>& aspects) {
  std::sort(aspects.begin(), aspects.end());
  aspects.erase(std::unique(aspects.begin(), aspects.end()), aspects.end());
}

std::string row_prefix(const std::string& origin, std::size_t row) {
  return origin + ": row " + std::to_string(row) + ": ";
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

ReviewSentence parse_record(const json& j) {
  if (!j.is_object()) throw ValidationError("record is not a JSON object");
  ReviewSentence s;
  if (!j.contains("id") || !j["id"].is_string()) throw ValidationError("missing string field 'id'");
  if (!j.contains("text") || !j["text"].is_string()) throw ValidationError("missing string field 'text'");
  s.id = j["id"].get<std::string>();
  s.text = strip_html(j["text"].get<std::string>());
  if (s.text.empty()) throw ValidationError("empty text");
  if (auto it = j.find("aspects"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("'aspects' must be an array");
    for (const auto& a : *it) {
      if (!a.is_string()) throw ValidationError("aspect names must be strings");
      const auto name = a.get<std::string>();
      auto parsed = parse_aspect(name);
      if (!parsed) throw ValidationError("unknown aspect '" + name + "'");
      s.aspects.push_back(*parsed);
    }
    canonicalize(s.aspects);
  }
  if (auto it = j.find("source"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ValidationError("'source' must be an object or null");
    SentenceSource src;
    src.post_id = optional_string(*it, "post_id");
    src.url = optional_string(*it, "url");
    const auto kind = optional_string(*it, "kind").value_or("post");
    if (kind == "post") {
      src.kind = SourceKind::Post;
    } else if (kind == "comment") {
      src.kind = SourceKind::Comment;
    } else {
      throw ValidationError("source.kind must be 'post' or 'comment', got '" + kind + "'");
    }
    s.source = std::move(src);
  }
  return s;
}

json to_json(const ReviewSentence& s) {
  json aspects = json::array();
  for (auto a : s.aspects) aspects.push_back(std::string(aspect_name(a)));
  json j{{"id", s.id}, {"text", s.text}, {"aspects", std::move(aspects)}};
  if (s.source) {
    json src;
    src["post_id"] = s.source->post_id ? json(*s.source->post_id) : json(nullptr);
    src["url"] = s.source->url ? json(*s.source->url) : json(nullptr);
    src["kind"] = s.source->kind == SourceKind::Post ? "post" : "comment";
    j["source"] = std::move(src);
  } else {
    j["source"] = nullptr;
  }
  return j;
}

// RFC 4180 style record reader: quoted fields may hold commas, doubled
// quotes and newlines.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (in_quotes) throw ValidationError("unterminated quoted CSV field");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

Corpus::Corpus(std::vector<ReviewSentence> sentences) : sentences_(std::move(sentences)) {
  std::unordered_set<std::string> seen;
  for (auto& s : sentences_) {
    if (s.text.empty()) throw ValidationError("sentence '" + s.id + "' has empty text");
    if (!seen.insert(s.id).second) throw ValidationError("duplicate sentence id '" + s.id + "'");
    canonicalize(s.aspects);
  }
}

CorpusSummary Corpus::summary() const {
  CorpusSummary out;
  out.sentences = sentences_.size();
  for (const auto& s : sentences_) {
    for (auto a : s.aspects) ++out.per_aspect[aspect_index(a)];
    if (s.aspects.empty()) {
      ++out.unlabeled;
    } else {
      ++out.by_label_count[s.aspects.size()];
    }
  }
  return out;
}

std::string Corpus::fingerprint() const {
  std::ostringstream ss;
  write_corpus(*this, ss);
  return text_fingerprint(ss.str());
}

Corpus parse_benchmark(std::istream& in, const std::string& origin) {
  std::vector<ReviewSentence> rows;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    ReviewSentence s;
    try {
      s = parse_record(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(row_prefix(origin, row) + "malformed JSON: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(row_prefix(origin, row) + e.what());
    }
    if (!seen.insert(s.id).second) {
      throw ValidationError(row_prefix(origin, row) + "duplicate id '" + s.id + "'");
    }
    rows.push_back(std::move(s));
  }
  return Corpus(std::move(rows));
}

Corpus load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset file not found or unreadable: " + path.string());
  return parse_benchmark(in, path.string());
}

std::string to_jsonl_line(const ReviewSentence& s) { return to_json(s).dump(); }

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.sentences()) out << to_jsonl_line(s) << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ostringstream ss;
  write_corpus(corpus, ss);
  write_file(path, ss.str());
}

Corpus convert_csv(std::istream& in) {
  std::vector<ReviewSentence> rows;
  std::vector<std::string> fields;
  std::size_t line = 0;
  std::size_t data_row = 0;
  while (read_csv_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != 2) {
      throw ValidationError("csv row " + std::to_string(line) + ": expected 2 columns, got " +
                            std::to_string(fields.size()));
    }
    if (line == 1 && to_lower_ascii(trim(fields[0])) == "text") continue;
    ++data_row;
    ReviewSentence s;
    s.id = "row-" + std::to_string(data_row);
    s.text = strip_html(fields[0]);
    if (s.text.empty()) throw ValidationError("csv row " + std::to_string(line) + ": empty text");
    std::stringstream labels(fields[1]);
    std::string name;
    while (std::getline(labels, name, '|')) {
      if (trim(name).empty()) continue;
      auto a = parse_aspect(name);
      if (!a) {
        throw ValidationError("csv row " + std::to_string(line) + ": unknown aspect '" + trim(name) + "'");
      }
      s.aspects.push_back(*a);
    }
    rows.push_back(std::move(s));
  }
  return Corpus(std::move(rows));
}

// ---------------------------------------------------------------------------

std::size_t BinaryDataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const BinaryItem& it) { return it.label == 1; }));
}

BinaryDataset derive_binary_task(const Corpus& corpus, Aspect aspect) {
  BinaryDataset out;
  out.aspect = aspect;
  out.items.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) out.items.push_back({s, s.has(aspect) ? 1 : 0, false});
  return out;
}

BinaryDataset augment_minority_with_count(const BinaryDataset& dataset, std::size_t decision_count,
                                          std::size_t threshold) {
  if (dataset.augmented) throw ValidationError("dataset is already augmented");
  BinaryDataset out = dataset;
  out.augmented = true;
  if (decision_count >= threshold) return out;
  for (const auto& item : dataset.items) {
    if (item.label == 1) out.items.push_back({item.sentence, 1, true});
  }
  return out;
}

BinaryDataset augment_minority(const BinaryDataset& dataset, std::size_t threshold) {
  return augment_minority_with_count(dataset, dataset.positives(), threshold);
}

std::size_t FoldPlan::fold_of(const std::string& id) const {
  auto it = assignments.find(id);
  if (it == assignments.end()) throw ValidationError("id '" + id + "' is not in the fold plan");
  return it->second;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (const auto& [id, f] : assignments) ++sizes[f];
  return sizes;
}

FoldPlan make_folds(const BinaryDataset& dataset, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("k must be at least 2");
  std::vector<std::string> pos, neg;
  std::unordered_set<std::string> seen;
  for (const auto& item : dataset.items) {
    if (!seen.insert(item.sentence.id).second) continue;
    (item.label == 1 ? pos : neg).push_back(item.sentence.id);
  }
  const std::size_t unique = pos.size() + neg.size();
  if (k > unique) {
    throw ValidationError("k=" + std::to_string(k) + " exceeds item count " + std::to_string(unique));
  }
  Rng rng(seed);
  shuffle_in_place(pos, rng);
  shuffle_in_place(neg, rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  std::size_t cursor = 0;
  for (const auto* group : {&pos, &neg}) {
    for (const auto& id : *group) plan.assignments.emplace(id, cursor++ % k);
  }
  return plan;
}

FoldSplit split_fold(const BinaryDataset& dataset, const FoldPlan& plan, std::size_t fold) {
  if (fold >= plan.k) throw ValidationError("fold index out of range");
  FoldSplit split;
  split.train.aspect = split.test.aspect = dataset.aspect;
  split.train.augmented = dataset.augmented;
  for (const auto& item : dataset.items) {
    if (plan.fold_of(item.sentence.id) == fold) {
      if (!item.duplicate) split.test.items.push_back(item);
    } else {
      split.train.items.push_back(item);
    }
  }
  return split;
}

std::vector<Batch> make_batches(const BinaryDataset& dataset, std::size_t batch_size,
                                std::uint64_t seed, ShortfallPolicy policy) {
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  const std::size_t n = dataset.items.size();
  std::vector<std::size_t> positives_all;
  for (std::size_t i = 0; i < n; ++i) {
    if (dataset.items[i].label == 1) positives_all.push_back(i);
  }
  if (positives_all.empty()) {
    throw ValidationError("cannot guarantee positive per batch: dataset has no positive items");
  }
  const std::size_t n_batches = (n + batch_size - 1) / batch_size;
  if (positives_all.size() < n_batches && policy == ShortfallPolicy::Strict) {
    throw ValidationError("cannot guarantee positive per batch: " + std::to_string(positives_all.size()) +
                          " positives for " + std::to_string(n_batches) + " batches");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  shuffle_in_place(order, rng);

  std::vector<Batch> batches(n_batches);
  for (std::size_t i = 0; i < n; ++i) batches[i / batch_size].indices.push_back(order[i]);

  auto is_pos = [&](std::size_t idx) { return dataset.items[idx].label == 1; };
  auto count_pos = [&](const Batch& b) {
    return static_cast<std::size_t>(std::count_if(b.indices.begin(), b.indices.end(), is_pos));
  };
  std::vector<std::size_t> pos_count(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) pos_count[b] = count_pos(batches[b]);

  // Move surplus positives into positive-less batches by swapping them with
  // a negative, so batch sizes stay put.
  std::size_t donor = 0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    if (pos_count[b] > 0) continue;
    while (donor < n_batches && pos_count[donor] < 2) ++donor;
    if (donor == n_batches) break;
    auto& from = batches[donor].indices;
    auto& to = batches[b].indices;
    auto pit = std::find_if(from.begin(), from.end(), is_pos);
    // Every item of a positive-less batch is a negative.
    std::swap(*pit, to.back());
    --pos_count[donor];
    ++pos_count[b];
  }

  for (std::size_t b = 0; b < n_batches; ++b) {
    if (pos_count[b] > 0) continue;
    // Only reachable under Borrow.
    batches[b].indices.push_back(positives_all[uniform_index(rng, positives_all.size())]);
    pos_count[b] = 1;
  }
  return batches;
}

}  // namespace claa
