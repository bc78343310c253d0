#include "claa/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "claa/error.hpp"
#include "claa/linalg.hpp"
#include "claa/text.hpp"
#include "claa/util.hpp"

namespace claa {

using nlohmann::json;

namespace {

// Below this the weighted target variance counts as zero.
constexpr double kFlatVariance = 1e-18;

struct RidgeFit {
  Vector beta;
  double intercept = 0.0;
  double r2 = 1.0;
};

// Weighted ridge with an unpenalized intercept, solved on centered data.
RidgeFit weighted_ridge(const Matrix& x, const Vector& y, const Vector& w, double lambda) {
  const double wsum = w.sum();
  const Eigen::RowVectorXd xbar = (w.transpose() * x) / wsum;
  const double ybar = w.dot(y) / wsum;
  const Matrix xc = x.rowwise() - xbar;
  const Vector yc = y.array() - ybar;
  RidgeFit fit;
  if (x.cols() > 0) {
    Matrix a = xc.transpose() * w.asDiagonal() * xc;
    a.diagonal().array() += lambda;
    const Vector b = xc.transpose() * w.asDiagonal() * yc;
    fit.beta = a.ldlt().solve(b);
  } else {
    fit.beta = Vector::Zero(0);
  }
  fit.intercept = ybar - xbar.dot(fit.beta);
  const double ss_tot = w.dot(yc.cwiseProduct(yc));
  if (ss_tot <= kFlatVariance * wsum) {
    fit.r2 = 1.0;
  } else {
    const Vector resid = yc - xc * fit.beta;
    fit.r2 = std::clamp(1.0 - w.dot(resid.cwiseProduct(resid)) / ss_tot, 0.0, 1.0);
  }
  return fit;
}

std::string escape_html(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

double mask_proximity(std::size_t kept, std::size_t tokens, double kernel_width_factor) {
  if (tokens == 0) throw ValidationError("mask_proximity: no tokens");
  const double cosine = std::sqrt(static_cast<double>(kept) / static_cast<double>(tokens));
  const double sigma = kernel_width_factor * std::sqrt(static_cast<double>(tokens));
  const double dist = 1.0 - cosine;
  return std::exp(-(dist * dist) / (sigma * sigma));
}

std::vector<PerturbedSample> perturb(const std::string& sentence, std::size_t n_samples, std::uint64_t seed,
                                     double kernel_width_factor) {
  const auto tokens = word_tokens(sentence);
  if (tokens.empty()) throw ValidationError("perturb: sentence has no tokens");
  if (n_samples == 0) throw ValidationError("perturb: n_samples must be > 0");
  const std::size_t d = tokens.size();
  std::vector<PerturbedSample> out;
  out.push_back({std::vector<std::uint8_t>(d, 1), join_tokens(tokens), 1.0});
  if (d == 1) return out;
  Rng rng(seed);
  std::vector<std::size_t> positions(d);
  for (std::size_t s = 1; s < n_samples; ++s) {
    const std::size_t drop = 1 + uniform_index(rng, d - 1);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `drop` positions are removed.
    for (std::size_t i = 0; i < drop; ++i) std::swap(positions[i], positions[i + uniform_index(rng, d - i)]);
    PerturbedSample p;
    p.mask.assign(d, 1);
    for (std::size_t i = 0; i < drop; ++i) p.mask[positions[i]] = 0;
    std::vector<std::string> kept;
    for (std::size_t t = 0; t < d; ++t) {
      if (p.mask[t]) kept.push_back(tokens[t]);
    }
    p.text = join_tokens(kept);
    p.proximity = mask_proximity(d - drop, d, kernel_width_factor);
    out.push_back(std::move(p));
  }
  return out;
}

Explanation explain(const PredictFn& predict_fn, const std::string& sentence, const ExplainConfig& config,
                    const std::string& aspect) {
  if (config.max_features == 0) throw ValidationError("explain: max_features must be > 0");
  if (config.batch_size == 0) throw ValidationError("explain: batch_size must be > 0");
  if (!(config.ridge_lambda >= 0.0)) throw ValidationError("explain: ridge_lambda must be >= 0");
  const auto tokens = word_tokens(sentence);
  const auto samples = perturb(sentence, config.n_samples, config.seed, config.kernel_width_factor);
  const std::size_t n = samples.size();
  const std::size_t d = tokens.size();

  std::vector<double> preds;
  preds.reserve(n);
  for (std::size_t start = 0; start < n; start += config.batch_size) {
    const std::size_t end = std::min(n, start + config.batch_size);
    std::vector<std::string> texts;
    for (std::size_t i = start; i < end; ++i) texts.push_back(samples[i].text);
    std::vector<double> got;
    try {
      got = predict_fn(texts);
    } catch (const std::exception& e) {
      throw Error("predict_fn failed on samples " + std::to_string(start) + ".." + std::to_string(end - 1) + ": " +
                  e.what());
    }
    if (got.size() != texts.size()) {
      throw Error("predict_fn returned " + std::to_string(got.size()) + " values for " +
                  std::to_string(texts.size()) + " samples starting at " + std::to_string(start));
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (!std::isfinite(got[i])) throw Error("predict_fn returned a non-finite value for sample " + std::to_string(start + i));
      preds.push_back(got[i]);
    }
  }

  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vector y(static_cast<Eigen::Index>(n)), w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < d; ++t) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = samples[i].mask[t];
    y(static_cast<Eigen::Index>(i)) = preds[i];
    w(static_cast<Eigen::Index>(i)) = samples[i].proximity;
  }

  const auto full = weighted_ridge(x, y, w, config.ridge_lambda);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(full.beta(static_cast<Eigen::Index>(a))) > std::abs(full.beta(static_cast<Eigen::Index>(b)));
  });
  order.resize(std::min(d, config.max_features));

  Matrix xs(x.rows(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t c = 0; c < order.size(); ++c) xs.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(order[c]));
  const auto fit = weighted_ridge(xs, y, w, config.ridge_lambda);

  Explanation e;
  e.sentence = sentence;
  e.aspect = aspect;
  e.prediction = preds.front();
  e.intercept = fit.intercept;
  e.fidelity = fit.r2;
  e.n_samples = n;
  e.seed = config.seed;
  for (std::size_t c = 0; c < order.size(); ++c) {
    e.token_weights.push_back({tokens[order[c]], order[c], fit.beta(static_cast<Eigen::Index>(c))});
  }
  std::stable_sort(e.token_weights.begin(), e.token_weights.end(),
                   [](const TokenWeight& a, const TokenWeight& b) { return std::abs(a.weight) > std::abs(b.weight); });
  return e;
}

json to_json(const Explanation& e) {
  json tokens = json::array();
  for (const auto& t : e.token_weights) tokens.push_back({{"token", t.token}, {"position", t.position}, {"weight", t.weight}});
  return {{"sentence", e.sentence},
          {"aspect", e.aspect},
          {"prediction", e.prediction},
          {"tokens", tokens},
          {"intercept", e.intercept},
          {"fidelity", e.fidelity},
          {"n_samples", e.n_samples},
          {"seed", e.seed},
          {"surrogate", e.surrogate}};
}

std::string render_html(const Explanation& e) {
  const auto tokens = word_tokens(e.sentence);
  std::vector<double> weight(tokens.size(), 0.0);
  std::vector<bool> selected(tokens.size(), false);
  double max_abs = 0.0;
  for (const auto& t : e.token_weights) {
    if (t.position >= tokens.size()) continue;
    weight[t.position] = t.weight;
    selected[t.position] = true;
    max_abs = std::max(max_abs, std::abs(t.weight));
  }
  std::string out = "<p class=\"claa-explanation\">";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    if (!selected[i] || max_abs == 0.0 || weight[i] == 0.0) {
      out += escape_html(tokens[i]);
      continue;
    }
    const double alpha = std::abs(weight[i]) / max_abs;
    char style[96];
    std::snprintf(style, sizeof style, "background-color: rgba(%s, %.3f)",
                  weight[i] > 0 ? "255, 165, 0" : "0, 0, 255", alpha);
    out += "<span style=\"" + std::string(style) + "\">" + escape_html(tokens[i]) + "</span>";
  }
  return out + "</p>";
}

}  // namespace claa
