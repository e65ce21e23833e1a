#include "subaug/model.hpp"

namespace subaug {

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ValidationError("unknown activation '" + name + "' (expected relu or tanh)");
}

PoolKind parse_pool(const std::string& name) {
  if (name == "mean") return PoolKind::mean;
  if (name == "sum") return PoolKind::sum;
  if (name == "max") return PoolKind::max;
  throw ValidationError("unknown view pool '" + name + "' (expected mean, sum or max)");
}

ReadoutKind parse_readout(const std::string& name) {
  if (name == "mean") return ReadoutKind::mean;
  if (name == "sum") return ReadoutKind::sum;
  throw ValidationError("unknown node readout '" + name + "' (expected mean or sum)");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

std::string to_string(PoolKind p) {
  switch (p) {
    case PoolKind::mean: return "mean";
    case PoolKind::sum: return "sum";
    default: return "max";
  }
}

std::string to_string(ReadoutKind r) { return r == ReadoutKind::mean ? "mean" : "sum"; }

void validate(const ModelConfig& config) {
  if (config.num_layers < 0) throw ValidationError("model: num_layers must be >= 0");
  if (config.input_dim <= 0) throw ValidationError("model: input_dim must be positive");
  if (config.num_layers > 0 && config.hidden_dim <= 0) {
    throw ValidationError("model: hidden_dim must be positive");
  }
  if (config.output_dim <= 0) throw ValidationError("model: output_dim must be positive");
  for (int d : config.head_hidden_dims) {
    if (d <= 0) throw ValidationError("model: head hidden dims must be positive");
  }
}

std::vector<std::pair<int, int>> head_dims(const ModelConfig& config) {
  std::vector<std::pair<int, int>> dims;
  int in = embedding_dim(config);
  for (int hidden : config.head_hidden_dims) {
    dims.emplace_back(in, hidden);
    in = hidden;
  }
  dims.emplace_back(in, config.output_dim);
  return dims;
}

}  // namespace subaug
