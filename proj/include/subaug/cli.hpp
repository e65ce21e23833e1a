#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/data.hpp"
#include "subaug/graph.hpp"
#include "subaug/model.hpp"
#include "subaug/train.hpp"

namespace subaug {

/// Effective configuration of a CLI run. Mirrors the sectioned key = value
/// config file; every field here has a documented default and appears in the
/// serialized echo written next to command outputs.
struct RunConfig {
  // [synth]
  SynthConfig synth;

  // [data]
  double train_fraction = 0.7;
  double val_fraction = 0.15;
  double test_fraction = 0.15;
  std::uint64_t split_seed = 0;
  std::string task = "multiclass";
  int num_classes = 0;  // 0 = infer from the labels

  // [augment]
  int num_views = 2;
  double node_drop_rate = 0.2;
  double edge_drop_rate = 0.2;
  bool mask_cross_edges = false;
  bool readout_excludes_dropped = true;
  std::string strategy = "multi_view";

  // [model]
  int num_layers = 2;
  int hidden_dim = 32;
  std::string activation = "relu";
  std::string view_pool = "mean";
  std::string node_readout = "mean";
  std::vector<int> head_hidden_dims;
  std::string precision = "float32";

  // [train]
  int epochs = 200;
  int batch_size = 8;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  std::string optimizer = "adam";
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int eval_every = 1;
  int early_stop_patience = 0;

  // [ablate]
  std::vector<std::string> ablate_strategies = {"plain", "drop_node", "drop_edge",
                                                "drop_edge_sub", "multi_view"};
  std::vector<std::uint64_t> ablate_seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
};

/// Applies `key = value` lines (with `[section]` headers, `#`/`;` comments)
/// on top of `config`. Unknown sections or keys are rejected with the
/// offending line number; `origin` names the source in error messages.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin);

RunConfig load_config_file(const std::string& path);

/// Canonical echo: every key with its effective value, parseable by
/// apply_config_text.
std::string serialize_config(const RunConfig& config);

void validate(const RunConfig& config);

/// "3" -> {3}; "0,2,5" -> {0,2,5}; "0..9" -> {0,...,9}.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Dataset per config: loaded from `data_dir` (graph.edgelist,
/// node_features.txt if present, subgraphs.jsonl) or synthesized in memory
/// when `data_dir` is empty. Datasets without split assignments are split per
/// the [data] section.
SubgraphDataset resolve_dataset(const RunConfig& config,
                                const std::optional<std::string>& data_dir);

ModelConfig resolve_model_config(const RunConfig& config, const SubgraphDataset& dataset);
TrainConfig resolve_train_config(const RunConfig& config);
AugmentPlan resolve_plan(const RunConfig& config);

int cmd_synth(const RunConfig& config, const std::string& out_dir);
int cmd_train(const RunConfig& config, const std::optional<std::string>& data_dir,
              const std::vector<std::uint64_t>& seeds, const std::string& out_dir);
int cmd_eval(const RunConfig& config, const std::string& checkpoint_path,
             const std::optional<std::string>& data_dir, const std::string& split,
             const std::optional<std::string>& out_dir);
int cmd_ablate(const RunConfig& config, const std::optional<std::string>& data_dir,
               const std::string& out_dir);
int cmd_gradcheck(const std::optional<std::string>& corrupt_param,
                  const std::optional<std::string>& out_dir);
int cmd_augment(const RunConfig& config, const std::optional<std::string>& data_dir,
                const std::string& out_dir);

/// Full argument parsing and dispatch; maps exceptions to exit codes
/// (1 validation, 2 divergence, 3 I/O).
int run_cli(int argc, const char* const* argv);

}  // namespace subaug
