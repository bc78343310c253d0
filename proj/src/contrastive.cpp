#include "claa/contrastive.hpp"

#include <chrono>
#include <cmath>

#include "claa/error.hpp"
#include "claa/log.hpp"
#include "claa/util.hpp"

namespace claa {

namespace {

constexpr std::uint64_t kMiningStream = 0x6d696e696e67ULL;

bool has_partner(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int l : labels) pos += l == 1;
  return pos >= 2 || labels.size() - pos >= 2;
}

}  // namespace

std::vector<Pair> mine_pairs(std::span<const int> labels) {
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) pairs.push_back({i, j, labels[i] == labels[j]});
  }
  return pairs;
}

TripletMining mine_triplets(std::span<const int> labels, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (neg.empty()) throw ValidationError("triplet mining needs at least one negative in the batch");
  TripletMining out;
  Rng rng(seed);
  for (std::size_t a : pos) {
    if (pos.size() < 2) {
      ++out.skipped_anchors;
      out.diagnostics.push_back("anchor " + std::to_string(a) + ": no same-label partner, skipped");
      continue;
    }
    // Any positive other than the anchor itself.
    std::size_t p = pos[uniform_index(rng, pos.size() - 1)];
    if (p == a) p = pos.back();
    const std::size_t n = neg[uniform_index(rng, neg.size())];
    out.triplets.push_back({a, p, n});
  }
  return out;
}

MinedSets mine_pairs_and_triplets(std::span<const int> labels, std::uint64_t seed) {
  return {mine_pairs(labels), mine_triplets(labels, seed)};
}

std::optional<BatchLoss> batch_objective(const Matrix& z, std::span<const int> labels,
                                         const TrainingConfig& config, std::uint64_t seed) {
  if (labels.size() < 2) return std::nullopt;
  BatchLoss out;
  switch (config.objective) {
    case Objective::NtXent: {
      if (!has_partner(labels)) return std::nullopt;
      auto r = supcon_loss(z, labels, config.temperature);
      out.value = r.value;
      out.grad = std::move(r.grad);
      out.skipped_anchors = r.anchors_skipped;
      break;
    }
    case Objective::Triplet: {
      std::size_t pos = 0;
      for (int l : labels) pos += l == 1;
      if (pos == labels.size() || pos == 0) return std::nullopt;
      auto mined = mine_triplets(labels, seed);
      if (mined.triplets.empty()) return std::nullopt;
      auto r = triplet_loss(z, mined.triplets, config.margin);
      out.value = r.value;
      out.grad = std::move(r.grad);
      out.skipped_anchors = mined.skipped_anchors;
      break;
    }
    case Objective::Pairwise: {
      auto r = pairwise_contrastive_loss(z, mine_pairs(labels), config.margin);
      out.value = r.value;
      out.grad = std::move(r.grad);
      break;
    }
  }
  return out;
}

TrainingHistory train_contrastive(Encoder& encoder, const BinaryDataset& dataset,
                                  const TrainingConfig& config) {
  config.validate();
  if (!dataset.augmented) {
    throw ValidationError("train_contrastive expects a dataset produced by augment_minority");
  }
  const auto started = std::chrono::steady_clock::now();
  TrainingHistory history;
  history.config = config;
  history.seed = config.seed;

  auto params = encoder.parameters();
  const bool frozen = params.empty();
  if (frozen) {
    const std::string msg = "encoder has no trainable parameters; contrastive stage only measures the loss";
    history.warnings.push_back(msg);
    log_warning(msg);
  }
  AdamW optimizer(params.size(), adamw_config(config));
  std::vector<double> grad(params.size());

  std::uint64_t step = 0;
  // A frozen encoder cannot change, so one measured epoch stands for all.
  const std::size_t measured_epochs = frozen ? 1 : config.epochs;
  for (std::size_t epoch = 0; epoch < measured_epochs; ++epoch) {
    const auto batches =
        make_batches(dataset, config.batch_size, sub_seed(config.seed, epoch), ShortfallPolicy::Borrow);
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& batch : batches) {
      ++step;
      std::vector<std::string> texts;
      std::vector<int> labels;
      texts.reserve(batch.size());
      for (auto idx : batch.indices) {
        texts.push_back(dataset.items[idx].sentence.text);
        labels.push_back(dataset.items[idx].label);
      }
      auto pass = encoder.forward(texts);
      Matrix z = pass.output;
      const Vector norms = normalize_rows(z);
      auto loss = batch_objective(z, labels, config, sub_seed(config.seed ^ kMiningStream, step));
      if (!loss) {
        ++history.skipped_batches;
        continue;
      }
      if (!std::isfinite(loss->value) || !loss->grad.allFinite()) {
        throw NumericError("non-finite contrastive loss at epoch " + std::to_string(epoch + 1) + ", step " +
                           std::to_string(step));
      }
      history.skipped_anchors += loss->skipped_anchors;
      sum += loss->value;
      ++counted;
      if (frozen) continue;
      const Matrix grad_u = normalize_backward(z, norms, loss->grad);
      std::fill(grad.begin(), grad.end(), 0.0);
      encoder.backward(pass, grad_u, grad);
      optimizer.step(params, grad);
    }
    if (counted == 0) {
      throw ValidationError("epoch " + std::to_string(epoch + 1) + ": no batch produced a usable loss");
    }
    history.epoch_loss.push_back(sum / static_cast<double>(counted));
  }
  if (frozen) history.epoch_loss.assign(config.epochs, history.epoch_loss.front());
  if (history.skipped_anchors > 0) {
    log_info("contrastive training skipped " + std::to_string(history.skipped_anchors) +
             " anchors without a same-label partner");
  }
  history.steps = optimizer.steps();
  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return history;
}

ClassSeparation class_separation(const Matrix& z, std::span<const int> labels) {
  Matrix zn = z;
  normalize_rows(zn);
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (Eigen::Index i = 0; i < zn.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < zn.rows(); ++j) {
      const double c = zn.row(i).dot(zn.row(j));
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  return {n_intra ? intra / static_cast<double>(n_intra) : 0.0,
          n_inter ? inter / static_cast<double>(n_inter) : 0.0};
}

}  // namespace claa
