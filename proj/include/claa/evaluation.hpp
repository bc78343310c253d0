#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "claa/aspect.hpp"
#include "claa/classifier.hpp"
#include "claa/corpus.hpp"
#include "claa/metrics.hpp"

namespace claa {

struct FoldResult {
  std::size_t fold = 0;
  MetricSet metrics;
  std::size_t train_size = 0;
  std::size_t train_duplicates = 0;
  std::size_t test_size = 0;
  std::size_t test_positives = 0;
  // Fingerprints over the sorted sentence ids on each side.
  std::string train_fingerprint;
  std::string test_fingerprint;
  std::optional<std::string> note;
};

struct MetricSummary {
  double mean = 0.0;
  // Sample standard deviation (n - 1); 0 for a single value.
  double stdev = 0.0;
  std::size_t count = 0;
};

MetricSummary summarize(std::span<const double> values);

// Held-out prediction of one original sentence.
struct HeldOutPrediction {
  std::string id;
  std::string text;
  int gold = 0;
  int pred = 0;
  double probability = 0.0;
  std::size_t fold = 0;
};

struct CVReport {
  Aspect aspect = Aspect::Others;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  bool with_contrastive = true;
  bool augmented = false;
  std::vector<FoldResult> folds;
  MetricSummary precision, recall, f1, mcc, accuracy;
  // Over folds whose test set holds both classes; nullopt when none does.
  std::optional<MetricSummary> auc;
  std::vector<std::string> notes;
  nlohmann::json config;
  // Dataset order.
  std::vector<HeldOutPrediction> predictions;
};

// k-fold cross validation of one aspect. Augmentation is decided on the
// full task and applied to training folds only. Throws Error if a training
// fold ever shares an id with its test fold.
CVReport cross_validate(const Corpus& corpus, Aspect aspect, const PipelineOptions& options,
                        bool with_contrastive, std::size_t k = 10, std::uint64_t seed = 0);

// Both readings of a multi-aspect average: the mean of per-aspect means and
// the mean over every fold of every aspect.
struct AggregateMetric {
  double over_aspects = 0.0;
  double over_folds = 0.0;
};

struct AggregateReport {
  std::size_t aspects = 0;
  AggregateMetric precision, recall, f1, mcc, accuracy;
  std::optional<AggregateMetric> auc;
};

AggregateReport aggregate_reports(std::span<const CVReport> reports);

// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultResamples = 1000;
inline constexpr double kSignificanceLevel = 0.95;

struct BootstrapResult {
  std::size_t n_resamples = kDefaultResamples;
  // Fraction of resamples where F1(A) > F1(B) strictly; drives `significant`.
  double fraction_a_better = 0.0;
  double fraction_a_better_accuracy = 0.0;
  bool significant = false;
  double level = kSignificanceLevel;
  std::uint64_t seed = 0;
};

BootstrapResult paired_bootstrap(std::span<const int> y_true, std::span<const int> preds_a,
                                 std::span<const int> preds_b, std::size_t n_resamples = kDefaultResamples,
                                 std::uint64_t seed = 0);

// ---------------------------------------------------------------------------

struct Disagreement {
  std::string id;
  std::string text;
  int gold = 0;
  int pred_a = 0;
  int pred_b = 0;
};

struct CorrectionReport {
  std::optional<Aspect> aspect;
  std::size_t items = 0;
  std::size_t errors_a = 0;
  std::size_t errors_b = 0;
  // Share of one system's errors the other gets right; nullopt when the
  // first system made no error.
  std::optional<double> corrected_by_b_pct;
  std::optional<double> corrected_by_a_pct;
  std::size_t both_wrong = 0;
  // Items where the systems predict differently.
  std::vector<Disagreement> disagreements;
};

CorrectionReport cross_correction(std::span<const int> y_true, std::span<const int> preds_a,
                                  std::span<const int> preds_b, std::span<const std::string> ids,
                                  std::span<const std::string> texts = {});

// ---------------------------------------------------------------------------

nlohmann::json to_json(const MetricSet& m);
nlohmann::json to_json(const CVReport& r);
nlohmann::json to_json(const AggregateReport& r);
nlohmann::json to_json(const BootstrapResult& r);
nlohmann::json to_json(const CorrectionReport& r);

// One row per fold: aspect,fold,precision,recall,f1,mcc,auc,accuracy,train,test.
std::string cv_reports_csv(std::span<const CVReport> reports);
// One row per aspect.
std::string correction_csv(std::span<const CorrectionReport> reports);
// {id, text, gold, pred_A, pred_B} per line.
std::string disagreements_jsonl(const CorrectionReport& report);

// Held-out predictions file written by `evaluate`: one JSON object per line.
std::string predictions_jsonl(const CVReport& report);
std::vector<HeldOutPrediction> read_predictions(const std::filesystem::path& path);

}  // namespace claa
