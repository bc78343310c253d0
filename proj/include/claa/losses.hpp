#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "claa/linalg.hpp"

namespace claa {

// Loss value plus its gradient with respect to every embedding row.
struct LossResult {
  double value = 0.0;
  Matrix grad;
};

struct SupConResult : LossResult {
  std::size_t anchors_used = 0;
  std::size_t anchors_skipped = 0;
};

// Supervised contrastive loss, log outside the positive average:
//   L = mean_{i : P(i) != {}} -1/|P(i)| sum_{p in P(i)}
//         log( exp(z_i.z_p / tau) / sum_{a != i} exp(z_i.z_a / tau) )
// Anchors with no same-label partner are skipped. Throws ValidationError
// when no anchor has a partner, or (when check_normalized) a row is not
// unit norm within 1e-6.
SupConResult supcon_loss(const Matrix& z, std::span<const int> labels, double temperature,
                         bool check_normalized = true);

struct Triplet {
  std::size_t anchor, positive, negative;
};

struct Pair {
  std::size_t first, second;
  bool similar;
};

// Mean of max(0, d(a,p) - d(a,n) + margin) with Euclidean d over rows of z.
LossResult triplet_loss(const Matrix& z, std::span<const Triplet> triplets, double margin);

struct TripletGrads {
  double value = 0.0;
  Matrix grad_anchor, grad_positive, grad_negative;
};

// Aligned-row form: triplet k is (anchors[k], positives[k], negatives[k]).
TripletGrads triplet_loss(const Matrix& anchors, const Matrix& positives, const Matrix& negatives,
                          double margin);

// Mean of y d^2 + (1 - y) max(0, margin - d)^2, y = 1 for similar pairs.
LossResult pairwise_contrastive_loss(const Matrix& z, std::span<const Pair> pairs, double margin);

struct PairGrads {
  double value = 0.0;
  Matrix grad_first, grad_second;
};

PairGrads pairwise_contrastive_loss(const Matrix& first, const Matrix& second,
                                    std::span<const int> similar, double margin);

}  // namespace claa
