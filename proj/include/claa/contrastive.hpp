#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "claa/corpus.hpp"
#include "claa/encoder.hpp"
#include "claa/losses.hpp"
#include "claa/training.hpp"

namespace claa {

// All within-batch pairs i < j, similar iff labels match.
std::vector<Pair> mine_pairs(std::span<const int> labels);

struct TripletMining {
  std::vector<Triplet> triplets;
  std::size_t skipped_anchors = 0;
  std::vector<std::string> diagnostics;
};

// One triplet per positive-class anchor: a random other positive and a
// random negative. Anchors without a same-label partner are skipped with a
// diagnostic. Throws ValidationError when the batch has no negative.
TripletMining mine_triplets(std::span<const int> labels, std::uint64_t seed);

struct MinedSets {
  std::vector<Pair> pairs;
  TripletMining triplets;
};

MinedSets mine_pairs_and_triplets(std::span<const int> labels, std::uint64_t seed);

struct BatchLoss {
  double value = 0.0;
  Matrix grad;  // w.r.t. the normalized embeddings
  std::size_t skipped_anchors = 0;
};

// Configured objective on one batch of normalized embeddings. Returns
// nullopt when the batch carries no usable signal (no anchor with a
// partner, no negative for triplets).
std::optional<BatchLoss> batch_objective(const Matrix& z, std::span<const int> labels,
                                         const TrainingConfig& config, std::uint64_t seed);

// Stage 1: fine-tunes the encoder in place on an augmented binary dataset.
// Throws on a non-augmented dataset, an invalid config or a non-finite loss.
TrainingHistory train_contrastive(Encoder& encoder, const BinaryDataset& dataset,
                                  const TrainingConfig& config);

// Mean cosine similarity within and across classes over all pairs.
struct ClassSeparation {
  double intra = 0.0;
  double inter = 0.0;
  double gap() const { return intra - inter; }
};

ClassSeparation class_separation(const Matrix& z, std::span<const int> labels);

}  // namespace claa
