#include "fixtures.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>

#include <sys/wait.h>

#include "claa/synthetic.hpp"
#include "claa/util.hpp"

namespace claa::testing {

Corpus two_aspect_corpus(std::size_t per_aspect, std::uint64_t seed) {
  KeywordCorpusOptions o;
  o.aspects = {{Aspect::Security, {"encryption", "cipher"}}, {Aspect::Performance, {"fast", "latency", "slow"}}};
  o.sentences_per_aspect = per_aspect;
  o.background_sentences = per_aspect;
  o.seed = seed;
  return make_keyword_corpus(o);
}

Corpus full_fixture_corpus(std::uint64_t seed) {
  KeywordCorpusOptions o;
  o.aspects = default_fixture_keywords();
  o.sentences_per_aspect = 40;
  o.background_sentences = 60;
  o.seed = seed;
  return make_keyword_corpus(o);
}

PipelineOptions fixture_pipeline(bool with_contrastive) {
  PipelineOptions p;
  p.contrastive.learning_rate = kFixtureLr;
  p.classifier.learning_rate = kFixtureLr;
  p.with_contrastive = with_contrastive;
  return p;
}

std::filesystem::path fixture_dir() { return CLAA_FIXTURE_DIR; }

const AspectModelBundle& fixture_bundle() {
  static const AspectModelBundle bundle = [] {
    const auto dir = fixture_dir() / "bundle";
    if (std::filesystem::exists(dir / "bundle.json")) return load_bundle(dir);
    return train_bundle(full_fixture_corpus(kFixtureCorpusSeed), fixture_pipeline(), kFixtureBundleSeed);
  }();
  return bundle;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("claa-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      probe(i, j) = v + h;
      const double up = f(probe);
      probe(i, j) = v - h;
      const double down = f(probe);
      probe(i, j) = v;
      g(i, j) = (up - down) / (2 * h);
    }
  }
  return g;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-8});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

Matrix random_unit_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) z(i, j) = standard_normal(rng);
    z.row(i).normalize();
  }
  return z;
}

void write_fixture_dump(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "Posts.xml",
             "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
             "<posts>\n"
             "  <row Id=\"1\" PostTypeId=\"1\" Title=\"How do I parse JSON quickly\" "
             "Tags=\"&lt;java&gt;&lt;json&gt;\" Body=\"&lt;p&gt;I use &lt;code&gt;GSON&lt;/code&gt; "
             "today. It is slow on big files.&lt;/p&gt;\" />\n"
             "  <row Id=\"2\" PostTypeId=\"2\" ParentId=\"1\" Body=\"&lt;p&gt;Try Jackson "
             "streaming.&lt;/p&gt;&lt;p&gt;It avoids building the tree!&lt;/p&gt;\" />\n"
             "  <row Id=\"3\" PostTypeId=\"1\" Title=\"Sorting a list\" Tags=\"&lt;python&gt;\" "
             "Body=\"&lt;p&gt;Use sorted. It is stable.&lt;/p&gt;\" />\n"
             "  <!-- rows that must be ignored -->\n"
             "  <row Id=\"4\" PostTypeId=\"2\" ParentId=\"3\" Body=\"&lt;p&gt;Or list.sort.&lt;/p&gt;\" />\n"
             "</posts>\n");
  write_file(dir / "Comments.xml",
             "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
             "<comments>\n"
             "  <row Id=\"10\" PostId=\"2\" Text=\"Jackson worked for me.\" />\n"
             "  <row Id=\"11\" PostId=\"3\" Text=\"Thanks, that helped.\" />\n"
             "</comments>\n");
}

std::string random_markup(std::uint64_t seed) {
  static const std::array<const char*, 24> pieces = {
      "<p>",     "</p>",      "<code>",   "</code>", "<pre>",    "</pre>",  "<a href=\"x.html\">", "</a>",
      "&amp;",   "&lt;",      "&gt;",     "&quot;",  "&#39;",    "&nbsp;",  "<!-- note -->",      "<br/>",
      " < ",     "a<b",       "x > y",    "&lt;p&gt;", "<div class='c'>", "</div>", "&#x41;",         "<"};
  static const std::array<const char*, 10> words = {"json", "parse", "fast", "the", "API", "is", "ok.", "Why?",
                                                    "slow!", "GSON"};
  Rng rng(seed);
  std::string out;
  const std::size_t n = 1 + uniform_index(rng, 40);
  for (std::size_t i = 0; i < n; ++i) {
    if (uniform_index(rng, 2) == 0) {
      out += pieces[uniform_index(rng, pieces.size())];
    } else {
      out += words[uniform_index(rng, words.size())];
      out += uniform_index(rng, 3) == 0 ? "" : " ";
    }
  }
  return out;
}

std::string run_command(const std::string& command, int& exit_code) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  if (!pipe) {
    exit_code = -1;
    return {};
  }
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe.release());
  exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

}  // namespace claa::testing
