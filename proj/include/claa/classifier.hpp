#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "claa/aspect.hpp"
#include "claa/corpus.hpp"
#include "claa/encoder.hpp"
#include "claa/training.hpp"

namespace claa {

inline constexpr double kProbabilityEpsilon = 1e-7;
inline constexpr double kDefaultThreshold = 0.5;

// -(y log p + (1 - y) log(1 - p)), p clamped to [eps, 1 - eps].
// Throws ValidationError unless y_true is 0 or 1.
double bce_loss(double y_pred, int y_true);
// d bce_loss / d y_pred (inside the clamp range).
double bce_loss_grad(double y_pred, int y_true);
// Mean over aligned sequences.
double bce_loss(std::span<const double> y_pred, std::span<const int> y_true);

double sigmoid(double x);

// Dropout + single-logit linear layer on the normalized embedding.
struct ClassifierHead {
  std::vector<double> weights;
  double bias = 0.0;
  double dropout = 0.1;
};

class AspectClassifier {
 public:
  AspectClassifier(Aspect aspect, std::shared_ptr<Encoder> encoder, ClassifierHead head,
                   double threshold = kDefaultThreshold);

  Aspect aspect() const { return aspect_; }
  const Encoder& encoder() const { return *encoder_; }
  const std::shared_ptr<Encoder>& shared_encoder() const { return encoder_; }
  const ClassifierHead& head() const { return head_; }
  double threshold() const { return threshold_; }

  // Deterministic (no dropout). Throws on empty input.
  std::vector<double> predict(std::span<const std::string> sentences) const;
  std::vector<double> logits(std::span<const std::string> sentences) const;

  // Training record, written to the per-aspect manifest.
  nlohmann::json manifest;

 private:
  Aspect aspect_;
  std::shared_ptr<Encoder> encoder_;
  ClassifierHead head_;
  double threshold_;
};

struct ClassifierTraining {
  TrainingHistory history;
  double learning_rate = 0.0;
  // Validation F1 per grid candidate, when a grid was searched.
  std::vector<std::pair<double, double>> grid_scores;
};

// Stage 2: fine-tunes encoder + head with mean BCE. The dataset must hold
// both classes. With config.lr_grid set, each candidate is scored on a
// stratified 10% validation split and the best is retrained on everything.
AspectClassifier train_classifier(std::unique_ptr<Encoder> encoder, const BinaryDataset& dataset,
                                  const TrainingConfig& config, ClassifierTraining* report = nullptr);

// Stage 1 (optional) then stage 2 from a freshly built encoder.
struct PipelineOptions {
  EncoderSpec encoder;
  TrainingConfig contrastive;
  TrainingConfig classifier;
  bool with_contrastive = true;
  std::size_t augment_threshold = kDefaultAugmentThreshold;
};

struct PipelineResult {
  std::optional<TrainingHistory> contrastive;
  ClassifierTraining classifier;
};

AspectClassifier train_aspect_pipeline(const BinaryDataset& train, const PipelineOptions& options,
                                       std::uint64_t seed, PipelineResult* result = nullptr,
                                       std::optional<std::size_t> augment_decision_count = std::nullopt);

// ---------------------------------------------------------------------------

// Aspects whose probability reaches the threshold; the None marker when none do.
struct SentenceLabels {
  std::array<double, kAspectCount> probabilities{};
  std::vector<Aspect> aspects;

  bool none() const { return aspects.empty(); }
  // Canonical names, or {"None"}.
  std::vector<std::string> names() const;
};

class AspectModelBundle {
 public:
  void set(AspectClassifier classifier);
  const AspectClassifier* find(Aspect aspect) const;
  const AspectClassifier& at(Aspect aspect) const;
  bool complete() const;
  std::vector<Aspect> missing() const;
  std::size_t size() const;

  double threshold = kDefaultThreshold;
  std::string encoder_family;

 private:
  std::array<std::optional<AspectClassifier>, kAspectCount> classifiers_;
};

// Throws ValidationError naming the missing aspects on an incomplete bundle.
SentenceLabels label_sentence(const AspectModelBundle& bundle, const std::string& sentence,
                              std::optional<double> threshold = std::nullopt);
std::vector<SentenceLabels> label_sentences(const AspectModelBundle& bundle,
                                            std::span<const std::string> sentences,
                                            std::optional<double> threshold = std::nullopt);

// Directory: bundle.json index + one subdirectory per aspect (head.json,
// manifest.json) + encoder directories, deduplicated by shared encoder.
void save_bundle(const AspectModelBundle& bundle, const std::filesystem::path& dir);
AspectModelBundle load_bundle(const std::filesystem::path& dir);

// Adds or replaces one aspect inside an existing (possibly partial) bundle
// directory, creating it if needed.
void save_aspect_into_bundle(const AspectClassifier& classifier, const std::filesystem::path& dir);

// Trains all eleven aspects on a corpus.
AspectModelBundle train_bundle(const Corpus& corpus, const PipelineOptions& options, std::uint64_t seed);

}  // namespace claa
