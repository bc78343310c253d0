#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace claa {

enum class Objective { NtXent, Triplet, Pairwise };

std::string_view objective_name(Objective o);
Objective parse_objective(std::string_view name);

// Knobs for both training stages.
struct TrainingConfig {
  Objective objective = Objective::NtXent;
  double temperature = 0.1;
  double margin = 1.0;
  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 5e-5;
  // AdamW with PyTorch defaults.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_decay = 0.01;
  std::size_t max_tokens = 160;
  std::uint64_t seed = 0;
  // Stage-2 head.
  double dropout = 0.1;
  bool freeze_encoder = false;
  // Stage-2 learning-rate candidates; empty = use learning_rate as is.
  std::vector<double> lr_grid;

  void validate() const;
};

nlohmann::json to_json(const TrainingConfig& c);
TrainingConfig training_config_from_json(const nlohmann::json& j);

struct TrainingHistory {
  std::vector<double> epoch_loss;
  double wall_seconds = 0.0;
  TrainingConfig config;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t skipped_batches = 0;
  std::size_t skipped_anchors = 0;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const TrainingHistory& h);

struct AdamWConfig {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

AdamWConfig adamw_config(const TrainingConfig& c);

// Decoupled weight decay Adam.
class AdamW {
 public:
  AdamW(std::size_t parameter_count, AdamWConfig config);
  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps() const { return t_; }

 private:
  AdamWConfig config_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace claa
