#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "claa/error.hpp"
#include "claa/explain.hpp"
#include "claa/text.hpp"

namespace claa {
namespace {

bool has_token(const std::string& text, const std::string& token) {
  const auto t = word_tokens(text);
  return std::find(t.begin(), t.end(), token) != t.end();
}

PredictFn keyword_oracle(std::string keyword) {
  return [keyword](std::span<const std::string> texts) {
    std::vector<double> out;
    for (const auto& t : texts) out.push_back(has_token(t, keyword) ? 0.9 : 0.1);
    return out;
  };
}

TEST(Perturb, OneTokenSentence) {
  const auto s = perturb("encryption", 50, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].mask, std::vector<std::uint8_t>{1});
}

TEST(Perturb, DeterministicAndNonEmpty) {
  const std::string sentence = "the cipher suite is slow";
  const auto a = perturb(sentence, 1000, 7);
  const auto b = perturb(sentence, 100, 7);
  ASSERT_EQ(a.size(), 1000u);
  EXPECT_DOUBLE_EQ(a[0].proximity, 1.0);
  EXPECT_EQ(a[0].text, sentence);
  for (const auto& s : a) {
    EXPECT_GE(std::count(s.mask.begin(), s.mask.end(), 1), 1);
    EXPECT_LE(s.proximity, 1.0);
  }
  const auto c = perturb(sentence, 100, 7);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(b[i].mask, c[i].mask);
    EXPECT_EQ(b[i].text, c[i].text);
  }
}

TEST(Perturb, EmptySentenceRejected) { EXPECT_THROW(perturb("  ", 10, 0), ValidationError); }

TEST(Explain, KeywordOracleTopWeight) {
  const std::string sentence = "CBC encryption in itself is not thread safe";
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ExplainConfig c;
    c.seed = seed;
    const auto e = explain(keyword_oracle("encryption"), sentence, c);
    ASSERT_FALSE(e.token_weights.empty());
    if (e.token_weights[0].token == "encryption" && e.token_weights[0].weight > 0) ++hits;
  }
  EXPECT_GE(hits, 19);
}

TEST(Explain, LinearOracleFidelity) {
  const std::vector<std::string> tokens{"alpha", "beta", "gamma", "delta", "eps", "zeta"};
  const std::map<std::string, double> w{{"alpha", 0.3}, {"beta", -0.2}, {"gamma", 0.1},
                                        {"delta", 0.05}, {"eps", -0.15}, {"zeta", 0.25}};
  const PredictFn linear = [&](std::span<const std::string> texts) {
    std::vector<double> out;
    for (const auto& t : texts) {
      double p = 0.3;
      for (const auto& tok : word_tokens(t)) p += w.at(tok);
      out.push_back(p);
    }
    return out;
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExplainConfig c;
    c.seed = seed;
    const auto e = explain(linear, join_tokens(tokens), c);
    EXPECT_GE(e.fidelity, 0.99);
    for (const auto& tw : e.token_weights) EXPECT_EQ(std::signbit(tw.weight), std::signbit(w.at(tw.token)));
  }
}

TEST(Explain, ConstantClassifierHasNoWeight) {
  const PredictFn constant = [](std::span<const std::string> texts) {
    return std::vector<double>(texts.size(), 0.42);
  };
  const auto e = explain(constant, "the docs are thin here", {});
  for (const auto& tw : e.token_weights) EXPECT_LT(std::abs(tw.weight), 1e-6);
  EXPECT_EQ(e.fidelity, 1.0);
}

TEST(Explain, ConjunctionOracleTopTwo) {
  const PredictFn both = [](std::span<const std::string> texts) {
    std::vector<double> out;
    for (const auto& t : texts) out.push_back(has_token(t, "thread") && has_token(t, "encryption") ? 0.9 : 0.1);
    return out;
  };
  const auto e = explain(both, "CBC encryption in itself is not thread safe", {});
  ASSERT_GE(e.token_weights.size(), 2u);
  const std::set<std::string> top{e.token_weights[0].token, e.token_weights[1].token};
  EXPECT_EQ(top, (std::set<std::string>{"thread", "encryption"}));
}

TEST(Explain, MaxFeaturesRespected) {
  ExplainConfig c;
  c.max_features = 3;
  const auto e = explain(keyword_oracle("cipher"), "a b c d e cipher f g", c);
  EXPECT_EQ(e.token_weights.size(), 3u);
}

TEST(Explain, PredictFailureWrapped) {
  const PredictFn broken = [](std::span<const std::string>) -> std::vector<double> {
    throw std::runtime_error("backend down");
  };
  EXPECT_THROW(explain(broken, "some words here", {}), Error);
}

TEST(RenderHtml, OpacityNormalized) {
  Explanation e;
  e.sentence = "the encryption <b>";
  e.token_weights = {{"encryption", 1, 0.8}, {"the", 0, -0.05}};
  const auto html = render_html(e);
  EXPECT_NE(html.find("rgba(255, 165, 0, 1.000)"), std::string::npos);
  EXPECT_NE(html.find("rgba(0, 0, 255, 0.062)"), std::string::npos);
  EXPECT_EQ(html.find("<b>"), std::string::npos);
}

}  // namespace
}  // namespace claa
