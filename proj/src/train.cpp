#include "subaug/train.hpp"

namespace subaug {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd_momentum") return OptimizerKind::sgd_momentum;
  throw ValidationError("unknown optimizer '" + name + "' (expected adam or sgd_momentum)");
}

std::string to_string(OptimizerKind k) {
  return k == OptimizerKind::adam ? "adam" : "sgd_momentum";
}

void validate(const TrainConfig& config) {
  if (config.epochs < 0) throw ValidationError("train: epochs must be >= 0");
  if (config.batch_size <= 0) throw ValidationError("train: batch_size must be positive");
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ValidationError("train: learning_rate must be finite and >= 0");
  }
  if (!(config.weight_decay >= 0.0) || !std::isfinite(config.weight_decay)) {
    throw ValidationError("train: weight_decay must be finite and >= 0");
  }
  if (!(config.momentum >= 0.0) || config.momentum >= 1.0) {
    throw ValidationError("train: momentum must be in [0, 1)");
  }
  if (config.eval_every < 0) throw ValidationError("train: eval_every must be >= 0");
  if (config.early_stop_patience < 0) {
    throw ValidationError("train: early_stop_patience must be >= 0");
  }
}

}  // namespace subaug
