#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace claa {

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Labels must be 0/1 and aligned; empty input is an error.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct WeightedPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-class precision/recall/F1 for classes 1 and 0, averaged with weights
// equal to true support. 0/0 is taken as 0.
WeightedPRF weighted_prf(const ConfusionMatrix& cm);
WeightedPRF weighted_prf(std::span<const int> y_true, std::span<const int> y_pred);

double accuracy(const ConfusionMatrix& cm);

// Matthews correlation; 0 when any marginal is empty.
double mcc(const ConfusionMatrix& cm);

// Probability that a random positive outscores a random negative, ties
// counted half. Throws ValidationError when only one class is present.
double roc_auc(std::span<const int> y_true, std::span<const double> scores);

struct MetricSet {
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double mcc = 0.0;
  // Undefined for single-class inputs.
  std::optional<double> auc;
  double accuracy = 0.0;
};

MetricSet compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                          std::span<const double> scores);

}  // namespace claa
