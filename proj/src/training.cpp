#include "claa/training.hpp"

#include <cmath>

#include "claa/error.hpp"

namespace claa {

using nlohmann::json;

std::string_view objective_name(Objective o) {
  switch (o) {
    case Objective::NtXent: return "ntxent";
    case Objective::Triplet: return "triplet";
    case Objective::Pairwise: return "pairwise";
  }
  return "ntxent";
}

Objective parse_objective(std::string_view name) {
  if (name == "ntxent") return Objective::NtXent;
  if (name == "triplet") return Objective::Triplet;
  if (name == "pairwise") return Objective::Pairwise;
  throw ValidationError("unknown loss '" + std::string(name) + "'; expected ntxent, triplet or pairwise");
}

void TrainingConfig::validate() const {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");
  if (!(margin > 0.0)) throw ValidationError("margin must be > 0");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ValidationError("dropout must be in [0, 1)");
  for (double lr : lr_grid) {
    if (!(lr > 0.0)) throw ValidationError("lr_grid entries must be > 0");
  }
}

json to_json(const TrainingConfig& c) {
  return json{{"objective", objective_name(c.objective)},
              {"temperature", c.temperature},
              {"margin", c.margin},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"optimizer",
               {{"name", "AdamW"},
                {"beta1", c.beta1},
                {"beta2", c.beta2},
                {"epsilon", c.adam_epsilon},
                {"weight_decay", c.weight_decay}}},
              {"max_tokens", c.max_tokens},
              {"seed", c.seed},
              {"dropout", c.dropout},
              {"freeze_encoder", c.freeze_encoder},
              {"lr_grid", c.lr_grid}};
}

TrainingConfig training_config_from_json(const json& j) {
  TrainingConfig c;
  try {
    c.objective = parse_objective(j.value("objective", std::string("ntxent")));
    c.temperature = j.value("temperature", c.temperature);
    c.margin = j.value("margin", c.margin);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (auto it = j.find("optimizer"); it != j.end()) {
      c.beta1 = it->value("beta1", c.beta1);
      c.beta2 = it->value("beta2", c.beta2);
      c.adam_epsilon = it->value("epsilon", c.adam_epsilon);
      c.weight_decay = it->value("weight_decay", c.weight_decay);
    }
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    c.seed = j.value("seed", c.seed);
    c.dropout = j.value("dropout", c.dropout);
    c.freeze_encoder = j.value("freeze_encoder", c.freeze_encoder);
    c.lr_grid = j.value("lr_grid", c.lr_grid);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid training config: ") + e.what());
  }
  c.validate();
  return c;
}

json to_json(const TrainingHistory& h) {
  return json{{"epoch_loss", h.epoch_loss},
              {"wall_seconds", h.wall_seconds},
              {"config", to_json(h.config)},
              {"seed", h.seed},
              {"steps", h.steps},
              {"skipped_batches", h.skipped_batches},
              {"skipped_anchors", h.skipped_anchors},
              {"warnings", h.warnings}};
}

AdamWConfig adamw_config(const TrainingConfig& c) {
  return {c.learning_rate, c.beta1, c.beta2, c.adam_epsilon, c.weight_decay};
}

AdamW::AdamW(std::size_t parameter_count, AdamWConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw ValidationError("AdamW: parameter/gradient size mismatch");
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double decay = 1.0 - lr * config_.weight_decay;
  const auto n = static_cast<std::ptrdiff_t>(params.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double g = grad[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] = params[i] * decay - lr * mhat / (std::sqrt(vhat) + config_.epsilon);
  }
}

}  // namespace claa
