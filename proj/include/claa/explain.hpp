#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace claa {

struct PerturbedSample {
  // Presence bit per token position.
  std::vector<std::uint8_t> mask;
  std::string text;
  double proximity = 1.0;
};

// Sample 0 is the unperturbed sentence. Every other sample drops between 1
// and d - 1 token positions (count uniform, then positions uniform). A
// one-token sentence yields only the original. Throws on a sentence
// without tokens.
std::vector<PerturbedSample> perturb(const std::string& sentence, std::size_t n_samples, std::uint64_t seed,
                                     double kernel_width_factor = 0.75);

// exp(-(1 - cos(mask, ones))^2 / sigma^2), sigma = factor * sqrt(d).
double mask_proximity(std::size_t kept, std::size_t tokens, double kernel_width_factor = 0.75);

struct ExplainConfig {
  std::size_t n_samples = 1000;
  std::size_t max_features = 10;
  std::uint64_t seed = 0;
  double ridge_lambda = 1.0;
  double kernel_width_factor = 0.75;
  // Texts per predict_fn call.
  std::size_t batch_size = 256;
};

struct TokenWeight {
  std::string token;
  std::size_t position = 0;
  double weight = 0.0;
};

struct Explanation {
  std::string sentence;
  std::string aspect;
  double prediction = 0.0;
  // Selected features by descending |weight|.
  std::vector<TokenWeight> token_weights;
  double intercept = 0.0;
  // Proximity-weighted R^2 of the surrogate, clamped to [0, 1]; 1 when the
  // predictions do not vary.
  double fidelity = 1.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::string surrogate = "weighted ridge on token-presence masks";
};

// Probability for each text.
using PredictFn = std::function<std::vector<double>(std::span<const std::string>)>;

// Failures of predict_fn are rethrown as Error naming the sample range.
Explanation explain(const PredictFn& predict_fn, const std::string& sentence, const ExplainConfig& config = {},
                    const std::string& aspect = "");

nlohmann::json to_json(const Explanation& e);

// Sentence tokens in order; selected tokens get an inline background:
// orange toward the aspect, blue away, alpha = |w| / max |w|.
std::string render_html(const Explanation& e);

}  // namespace claa
