#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/common.hpp"
#include "subaug/graph.hpp"
#include "subaug/train.hpp"

namespace subaug {

enum class SamplerKind { bfs_ball, random_walk };

SamplerKind parse_sampler(const std::string& name);
std::string to_string(SamplerKind kind);

struct SynthConfig {
  int num_blocks = 3;
  int nodes_per_block = 100;
  double intra_block_edge_prob = 0.1;
  double inter_block_edge_prob = 0.005;
  int num_subgraphs = 60;
  int subgraph_size = 8;
  SamplerKind sampler = SamplerKind::bfs_ball;
  std::uint64_t seed = 7;
};

void validate(const SynthConfig& config);

/// Planted-partition task: an SBM base graph whose subgraph labels are the
/// majority block (ties to the lowest block id). Node features are the
/// one-hot block indicator with a fixed fraction of nodes re-drawn to a
/// uniformly random block, so the labels are learnable but not free.
SubgraphDataset synth_dataset(const SynthConfig& config);

/// Fraction of nodes whose one-hot block feature is corrupted.
inline constexpr double kFeatureCorruption = 0.4;

/// Seeded shuffle then contiguous assignment. Sizes are floor(fraction * n)
/// with the remainder going to train. Throws if any split would be empty.
SubgraphDataset split_dataset(const SubgraphDataset& dataset, double train_fraction,
                              double val_fraction, double test_fraction, std::uint64_t seed);

/// Loads a dataset from the text formats: edge list, optional feature file,
/// subgraph JSONL. Without a feature file the node count is inferred from the
/// largest id mentioned by any edge or subgraph and features default to ones.
SubgraphDataset load_dataset(const std::string& graph_path,
                             const std::optional<std::string>& feature_path,
                             const std::string& subgraph_path, const LabelSpec& label_spec);

/// Writes graph.edgelist / node_features.txt / subgraphs.jsonl under dir.
void save_dataset(const std::string& dir, const SubgraphDataset& dataset);

enum class StrategyKind { plain, drop_node, drop_edge, drop_edge_sub, multi_view };

StrategyKind parse_strategy(const std::string& name);
std::string to_string(StrategyKind kind);

/// Maps an ablation strategy onto an augmentation plan. The drop strategies
/// perturb in place (no clones, k = 0) with the same mask streams the
/// multi-view path would use, so strategy comparisons isolate the multi-view
/// mechanism itself.
AugmentPlan strategy_plan(StrategyKind kind, int num_views, double node_drop, double edge_drop);

struct StrategyRow {
  std::string strategy;
  std::vector<double> per_seed_f1;  // test micro-F1, one per seed, seed order
  double mean = 0.0;
  double sem = 0.0;
};

struct AblationReport {
  std::vector<StrategyRow> rows;
  std::string to_text() const;
  std::string to_csv() const;
};

double mean_of(const std::vector<double>& values);

/// Standard error of the mean with the sample standard deviation; 0 for a
/// single value.
double sem_of(const std::vector<double>& values);

/// Trains one model per (strategy, seed) cell on the dataset's train split
/// and scores the test split, reporting mean test micro-F1 with SEM per
/// strategy. The train config is used verbatim except for master_seed, which
/// iterates over `seeds`.
template <typename Real>
AblationReport ablation_table(const SubgraphDataset& dataset,
                              const std::vector<StrategyKind>& strategies,
                              const ModelConfig& model_config, const TrainConfig& train_config,
                              int num_views, double node_drop, double edge_drop,
                              const std::vector<std::uint64_t>& seeds) {
  if (strategies.empty()) throw ValidationError("ablation: no strategies");
  if (seeds.empty()) throw ValidationError("ablation: no seeds");
  const std::vector<int> test_idx = dataset.split_indices(Split::test);
  if (test_idx.empty()) throw ValidationError("ablation: empty test split");

  AblationReport report;
  for (StrategyKind strategy : strategies) {
    StrategyRow row;
    row.strategy = to_string(strategy);
    const AugmentPlan plan = strategy_plan(strategy, num_views, node_drop, edge_drop);
    for (std::uint64_t seed : seeds) {
      TrainConfig seeded = train_config;
      seeded.master_seed = seed;
      FitResult<Real> result = fit<Real>(dataset, model_config, seeded, plan);
      if (result.diverged) {
        throw DivergenceError("ablation: strategy " + row.strategy + " seed " +
                              std::to_string(seed) + " diverged: " + result.note);
      }
      MetricsRecord test = evaluate(dataset, test_idx, result.params, model_config, seed, "test");
      row.per_seed_f1.push_back(test.micro_f1);
    }
    row.mean = mean_of(row.per_seed_f1);
    row.sem = sem_of(row.per_seed_f1);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace subaug
