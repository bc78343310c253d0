#include "claa/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "claa/error.hpp"
#include "claa/html.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

namespace {

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> words{"e.g.", "i.e.", "etc.", "vs.",  "mr.",  "mrs.", "ms.", "dr.",  "prof.",
                                           "cf.",  "approx.", "fig.", "no.", "st.", "jr.", "sr.", "inc.", "ltd.",
                                           "co.",  "al.",  "viz.", "ca.", "resp.", "eq."};
  return words;
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool ends_sentence(std::string_view token, std::string_view next) {
  std::size_t end = token.size();
  while (end > 0 && is_closer(token[end - 1])) --end;
  if (end == 0) return false;
  const char last = token[end - 1];
  if (last == '!' || last == '?') return true;
  if (last != '.') return false;
  std::size_t start = 0;
  while (start < end && (token[start] == '(' || token[start] == '"' || token[start] == '\'')) ++start;
  const std::string core = to_lower_ascii(token.substr(start, end - start));
  if (core.size() == 2 && std::isalpha(static_cast<unsigned char>(core[0]))) return false;
  if (core == "etc.") return !next.empty() && std::isupper(static_cast<unsigned char>(next[0]));
  return abbreviations().count(core) == 0;
}

struct TextDoc {
  std::string id_prefix;
  SentenceSource source;
  std::vector<std::string> segments;
};

struct DocOutput {
  std::vector<ReviewSentence> sentences;
  std::size_t split = 0;
  std::size_t too_short = 0;
  bool empty = false;
};

DocOutput process(const TextDoc& doc, const IngestOptions& options) {
  DocOutput out;
  std::size_t n = 0;
  for (const auto& seg : doc.segments) {
    for (auto& s : split_sentences(strip_html(seg, options.strip))) {
      ++out.split;
      if (s.size() < options.min_length) {
        ++out.too_short;
        continue;
      }
      out.sentences.push_back({doc.id_prefix + "-s" + std::to_string(n++), std::move(s), {}, doc.source});
    }
  }
  out.empty = out.split == 0;
  return out;
}

std::ifstream open_dump(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read dump file " + p.string());
  return in;
}

void expect_root(XmlRowReader& reader, const std::string& expected, const std::filesystem::path& p) {
  const auto& root = reader.root();
  if (root != expected) {
    throw ValidationError("unknown dump schema in " + p.string() + ": root element <" + root + ">, expected <" +
                          expected + ">");
  }
}

std::string required(const std::map<std::string, std::string>& row, const std::string& key,
                     const std::filesystem::path& p) {
  const auto it = row.find(key);
  if (it == row.end() || it->second.empty()) {
    throw ValidationError(p.string() + ": row without " + key + " attribute");
  }
  return it->second;
}

std::string attr(const std::map<std::string, std::string>& row, const std::string& key) {
  const auto it = row.find(key);
  return it == row.end() ? std::string() : it->second;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  std::vector<std::string> out;
  std::string current;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!current.empty()) current += ' ';
    current += tokens[t];
    const std::string_view next = t + 1 < tokens.size() ? tokens[t + 1] : std::string_view();
    if (ends_sentence(tokens[t], next)) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

// ---------------------------------------------------------------------------

XmlRowReader::XmlRowReader(std::istream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

bool XmlRowReader::read_tag(std::string& tag) {
  tag.clear();
  int c;
  while ((c = in_.get()) != EOF && c != '<') {
  }
  if (c == EOF) return false;
  char quote = 0;
  while ((c = in_.get()) != EOF) {
    if (quote) {
      if (c == quote) quote = 0;
    } else if ((c == '"' || c == '\'') && tag.rfind("!--", 0) != 0) {
      quote = static_cast<char>(c);
    } else if (c == '>') {
      // Comments may contain '>'.
      if (tag.rfind("!--", 0) == 0 && (tag.size() < 5 || tag.compare(tag.size() - 2, 2, "--") != 0)) {
        tag += '>';
        continue;
      }
      return true;
    }
    tag += static_cast<char>(c);
  }
  throw ValidationError(origin_ + ": truncated element after row " + std::to_string(rows_));
}

const std::string& XmlRowReader::root() {
  if (root_) return *root_;
  std::string tag;
  while (read_tag(tag)) {
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    std::size_t end = 0;
    while (end < tag.size() && !is_space(tag[end]) && tag[end] != '/') ++end;
    root_ = tag.substr(0, end);
    return *root_;
  }
  throw ValidationError(origin_ + ": no root element");
}

std::optional<std::map<std::string, std::string>> XmlRowReader::next() {
  root();
  std::string tag;
  while (read_tag(tag)) {
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (tag.substr(1) == *root_) return std::nullopt;
      continue;
    }
    std::size_t i = 0;
    while (i < tag.size() && !is_space(tag[i]) && tag[i] != '/') ++i;
    if (tag.substr(0, i) != "row") continue;
    ++rows_;
    std::map<std::string, std::string> attrs;
    while (i < tag.size()) {
      while (i < tag.size() && (is_space(tag[i]) || tag[i] == '/')) ++i;
      const std::size_t name_start = i;
      while (i < tag.size() && tag[i] != '=' && !is_space(tag[i]) && tag[i] != '/') ++i;
      std::string name = tag.substr(name_start, i - name_start);
      while (i < tag.size() && is_space(tag[i])) ++i;
      if (i >= tag.size() || tag[i] != '=') {
        if (!name.empty()) attrs[name] = "";
        continue;
      }
      ++i;
      while (i < tag.size() && is_space(tag[i])) ++i;
      if (i >= tag.size() || (tag[i] != '"' && tag[i] != '\'')) {
        throw ValidationError(origin_ + ": row " + std::to_string(rows_) + ": unquoted attribute " + name);
      }
      const char q = tag[i++];
      const auto close = tag.find(q, i);
      if (close == std::string::npos) {
        throw ValidationError(origin_ + ": row " + std::to_string(rows_) + ": unterminated attribute " + name);
      }
      attrs[std::move(name)] = decode_entities(std::string_view(tag).substr(i, close - i));
      i = close + 1;
    }
    return attrs;
  }
  return std::nullopt;
}

std::set<std::string> parse_tags(std::string_view tags) {
  std::set<std::string> out;
  std::string cur;
  for (char c : tags) {
    if (c == '<' || c == '>' || c == '|') {
      if (!cur.empty()) out.insert(to_lower_ascii(trim(cur)));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.insert(to_lower_ascii(trim(cur)));
  out.erase("");
  return out;
}

std::size_t IngestStats::dropped_total() const {
  std::size_t n = 0;
  for (const auto& [reason, count] : dropped) n += count;
  return n;
}

json to_json(const IngestStats& s) {
  return {{"posts", s.posts},       {"questions", s.questions},     {"answers", s.answers},
          {"comments", s.comments}, {"sentences", s.sentences},     {"split_total", s.split_total},
          {"dropped", s.dropped},   {"dropped_total", s.dropped_total()}};
}

IngestResult ingest_dump(const std::filesystem::path& path, const IngestOptions& options) {
  std::filesystem::path posts_path, comments_path;
  if (std::filesystem::is_directory(path)) {
    posts_path = path / "Posts.xml";
    comments_path = path / "Comments.xml";
  } else {
    posts_path = path;
    comments_path = path.parent_path() / "Comments.xml";
  }
  if (!std::filesystem::exists(posts_path)) throw IoError("dump has no Posts.xml: " + path.string());
  std::set<std::string> wanted;
  for (const auto& t : options.tags) wanted.insert(to_lower_ascii(trim(t)));

  std::set<std::string> questions;
  {
    auto in = open_dump(posts_path);
    XmlRowReader reader(in, posts_path.string());
    expect_root(reader, "posts", posts_path);
    while (auto row = reader.next()) {
      if (attr(*row, "PostTypeId") != "1") continue;
      const auto tags = parse_tags(attr(*row, "Tags"));
      const bool match = std::any_of(tags.begin(), tags.end(), [&](const std::string& t) { return wanted.count(t); });
      if (match) questions.insert(required(*row, "Id", posts_path));
    }
  }

  IngestStats stats;
  std::vector<TextDoc> docs;
  std::set<std::string> kept_posts;
  {
    auto in = open_dump(posts_path);
    XmlRowReader reader(in, posts_path.string());
    expect_root(reader, "posts", posts_path);
    while (auto row = reader.next()) {
      const auto type = attr(*row, "PostTypeId");
      const auto id = required(*row, "Id", posts_path);
      TextDoc doc;
      if (type == "1" && questions.count(id)) {
        ++stats.questions;
        doc.source = {id, "https://stackoverflow.com/questions/" + id, SourceKind::Post};
        if (auto title = attr(*row, "Title"); !title.empty()) doc.segments.push_back(std::move(title));
      } else if (type == "2" && questions.count(attr(*row, "ParentId"))) {
        ++stats.answers;
        doc.source = {id, "https://stackoverflow.com/a/" + id, SourceKind::Post};
      } else {
        continue;
      }
      doc.id_prefix = "p" + id;
      doc.segments.push_back(attr(*row, "Body"));
      kept_posts.insert(id);
      docs.push_back(std::move(doc));
    }
  }
  stats.posts = stats.questions + stats.answers;

  if (std::filesystem::exists(comments_path) && !kept_posts.empty()) {
    auto in = open_dump(comments_path);
    XmlRowReader reader(in, comments_path.string());
    expect_root(reader, "comments", comments_path);
    while (auto row = reader.next()) {
      const auto post = attr(*row, "PostId");
      if (!kept_posts.count(post)) continue;
      const auto id = required(*row, "Id", comments_path);
      ++stats.comments;
      TextDoc doc;
      doc.id_prefix = "c" + id;
      doc.source = {post, "https://stackoverflow.com/posts/comments/" + id, SourceKind::Comment};
      doc.segments.push_back(attr(*row, "Text"));
      docs.push_back(std::move(doc));
    }
  }

  std::vector<DocOutput> outputs(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(docs.size()); ++i) {
    outputs[static_cast<std::size_t>(i)] = process(docs[static_cast<std::size_t>(i)], options);
  }

  std::vector<ReviewSentence> sentences;
  for (auto& o : outputs) {
    stats.split_total += o.split;
    if (o.too_short) stats.dropped["too_short"] += o.too_short;
    if (o.empty) stats.dropped["empty_text"] += 1;
    for (auto& s : o.sentences) sentences.push_back(std::move(s));
  }
  stats.sentences = sentences.size();
  return {Corpus(std::move(sentences)), stats};
}

// ---------------------------------------------------------------------------

DistributionReport aspect_distribution(std::span<const std::pair<std::string, const AspectModelBundle*>> systems,
                                       const Corpus& sentences, std::optional<double> threshold) {
  if (systems.empty()) throw ValidationError("aspect_distribution: no system given");
  DistributionReport report;
  report.threshold = threshold;
  constexpr std::size_t kChunk = 512;
  for (const auto& [name, bundle] : systems) {
    if (!bundle) throw ValidationError("aspect_distribution: missing bundle for " + name);
    SystemDistribution dist;
    dist.name = name;
    dist.sentences = sentences.size();
    for (std::size_t start = 0; start < sentences.size(); start += kChunk) {
      std::vector<std::string> texts;
      for (std::size_t i = start; i < std::min(sentences.size(), start + kChunk); ++i) texts.push_back(sentences[i].text);
      for (const auto& labels : label_sentences(*bundle, texts, threshold)) {
        for (auto a : labels.aspects) ++dist.per_aspect[aspect_index(a)];
        if (labels.none()) ++dist.none;
        if (labels.aspects.size() >= 2) ++dist.multi[labels.aspects.size()];
      }
    }
    report.systems.push_back(std::move(dist));
  }
  return report;
}

json to_json(const DistributionReport& r) {
  json systems = json::array();
  for (const auto& s : r.systems) {
    json per = json::object();
    for (auto a : kAllAspects) per[std::string(aspect_name(a))] = s.per_aspect[aspect_index(a)];
    json multi = json::object();
    for (const auto& [k, v] : s.multi) multi[std::to_string(k)] = v;
    systems.push_back({{"name", s.name}, {"sentences", s.sentences}, {"aspects", per}, {"None", s.none}, {"multi", multi}});
  }
  return {{"systems", systems}, {"threshold", r.threshold ? json(*r.threshold) : json(nullptr)}};
}

std::string distribution_csv(const DistributionReport& r) {
  std::size_t max_k = 1;
  for (const auto& s : r.systems) {
    if (!s.multi.empty()) max_k = std::max(max_k, s.multi.rbegin()->first);
  }
  std::string out = "row";
  for (const auto& s : r.systems) out += "," + s.name;
  out += '\n';
  for (auto a : kAllAspects) {
    out += std::string(aspect_name(a));
    for (const auto& s : r.systems) out += "," + std::to_string(s.per_aspect[aspect_index(a)]);
    out += '\n';
  }
  out += std::string(kNoneMarker);
  for (const auto& s : r.systems) out += "," + std::to_string(s.none);
  out += '\n';
  for (std::size_t k = 2; k <= max_k; ++k) {
    out += std::to_string(k) + "-aspect";
    for (const auto& s : r.systems) {
      const auto it = s.multi.find(k);
      out += "," + std::to_string(it == s.multi.end() ? 0 : it->second);
    }
    out += '\n';
  }
  return out;
}

}  // namespace claa
