#include "claa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "claa/error.hpp"

namespace claa {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

void check_binary(std::span<const int> v, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0 && v[i] != 1) {
      throw ValidationError(std::string(what) + "[" + std::to_string(i) + "] is not 0/1");
    }
  }
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("misaligned inputs: " + std::to_string(y_true.size()) + " labels vs " +
                          std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw ValidationError("empty input");
  check_binary(y_true, "y_true");
  check_binary(y_pred, "y_pred");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1) {
      (y_pred[i] == 1 ? cm.tp : cm.fn)++;
    } else {
      (y_pred[i] == 1 ? cm.fp : cm.tn)++;
    }
  }
  return cm;
}

WeightedPRF weighted_prf(const ConfusionMatrix& cm) {
  const double tp = cm.tp, fp = cm.fp, tn = cm.tn, fn = cm.fn;
  const double n = tp + fp + tn + fn;
  if (n == 0.0) return {};
  const double p1 = ratio(tp, tp + fp), r1 = ratio(tp, tp + fn);
  const double p0 = ratio(tn, tn + fn), r0 = ratio(tn, tn + fp);
  const double s1 = tp + fn, s0 = tn + fp;
  WeightedPRF out;
  out.precision = (s1 * p1 + s0 * p0) / n;
  out.recall = (s1 * r1 + s0 * r0) / n;
  out.f1 = (s1 * harmonic(p1, r1) + s0 * harmonic(p0, r0)) / n;
  return out;
}

WeightedPRF weighted_prf(std::span<const int> y_true, std::span<const int> y_pred) {
  return weighted_prf(confusion(y_true, y_pred));
}

double accuracy(const ConfusionMatrix& cm) {
  return ratio(static_cast<double>(cm.tp + cm.tn), static_cast<double>(cm.total()));
}

double mcc(const ConfusionMatrix& cm) {
  const double tp = cm.tp, fp = cm.fp, tn = cm.tn, fn = cm.fn;
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(den);
}

double roc_auc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw ValidationError("misaligned labels and scores");
  check_binary(y_true, "y_true");
  const std::size_t n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mid-ranks (1-based) for tied groups give exactly half credit per tie.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (y_true[order[k]] == 1) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("ROC AUC undefined: only one class present");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

MetricSet compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                          std::span<const double> scores) {
  const auto cm = confusion(y_true, y_pred);
  const auto prf = weighted_prf(cm);
  MetricSet m;
  m.weighted_precision = prf.precision;
  m.weighted_recall = prf.recall;
  m.weighted_f1 = prf.f1;
  m.mcc = mcc(cm);
  m.accuracy = accuracy(cm);
  if (cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0) m.auc = roc_auc(y_true, scores);
  return m;
}

}  // namespace claa
