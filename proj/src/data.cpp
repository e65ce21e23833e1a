#include "subaug/data.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "subaug/io.hpp"
#include "subaug/rng.hpp"

namespace subaug {
namespace {

/// BFS from `start` over sorted neighbor lists, expanding whole layers until
/// the next layer would overshoot, then keeping its smallest node ids.
std::vector<int> sample_bfs_ball(const Graph& graph, int start, int target) {
  std::vector<char> member(graph.num_nodes(), 0);
  std::vector<int> nodes{start};
  member[start] = 1;
  std::vector<int> frontier{start};
  while (static_cast<int>(nodes.size()) < target && !frontier.empty()) {
    std::vector<int> layer;
    for (int u : frontier) {
      for (int v : graph.neighbors(u)) {
        if (!member[v]) {
          member[v] = 1;
          layer.push_back(v);
        }
      }
    }
    std::sort(layer.begin(), layer.end());
    const int room = target - static_cast<int>(nodes.size());
    if (static_cast<int>(layer.size()) > room) layer.resize(room);
    nodes.insert(nodes.end(), layer.begin(), layer.end());
    frontier = std::move(layer);
  }
  return nodes;
}

std::vector<int> sample_random_walk(const Graph& graph, int start, int target,
                                    rng::Stream& stream) {
  std::vector<char> member(graph.num_nodes(), 0);
  std::vector<int> nodes{start};
  member[start] = 1;
  int current = start;
  const int max_steps = 10 * target;
  for (int step = 0; step < max_steps && static_cast<int>(nodes.size()) < target; ++step) {
    auto nbrs = graph.neighbors(current);
    if (nbrs.empty()) break;
    current = nbrs[static_cast<std::size_t>(
        stream.next_below(static_cast<std::uint64_t>(nbrs.size())))];
    if (!member[current]) {
      member[current] = 1;
      nodes.push_back(current);
    }
  }
  return nodes;
}

int majority_block(const std::vector<int>& nodes, int nodes_per_block, int num_blocks) {
  std::vector<int> counts(num_blocks, 0);
  for (int v : nodes) ++counts[v / nodes_per_block];
  int best = 0;
  for (int b = 1; b < num_blocks; ++b) {
    if (counts[b] > counts[best]) best = b;  // ties keep the lowest block id
  }
  return best;
}

}  // namespace

SamplerKind parse_sampler(const std::string& name) {
  if (name == "bfs_ball") return SamplerKind::bfs_ball;
  if (name == "random_walk") return SamplerKind::random_walk;
  throw ValidationError("unknown sampler '" + name + "' (expected bfs_ball or random_walk)");
}

std::string to_string(SamplerKind kind) {
  return kind == SamplerKind::bfs_ball ? "bfs_ball" : "random_walk";
}

void validate(const SynthConfig& config) {
  if (config.num_blocks < 1) throw ValidationError("synth: num_blocks must be >= 1");
  if (config.nodes_per_block < 1) throw ValidationError("synth: nodes_per_block must be >= 1");
  if (config.intra_block_edge_prob < 0.0 || config.intra_block_edge_prob > 1.0 ||
      config.inter_block_edge_prob < 0.0 || config.inter_block_edge_prob > 1.0) {
    throw ValidationError("synth: edge probabilities must be in [0, 1]");
  }
  if (config.intra_block_edge_prob <= config.inter_block_edge_prob) {
    throw ValidationError("synth: intra_block_edge_prob must exceed inter_block_edge_prob");
  }
  if (config.num_subgraphs < 1) throw ValidationError("synth: num_subgraphs must be >= 1");
  if (config.subgraph_size < 2) throw ValidationError("synth: subgraph_size must be >= 2");
  if (config.subgraph_size > config.num_blocks * config.nodes_per_block) {
    throw ValidationError("synth: subgraph_size exceeds the number of nodes");
  }
}

SubgraphDataset synth_dataset(const SynthConfig& config) {
  validate(config);
  const int n = config.num_blocks * config.nodes_per_block;

  // Edges: one Bernoulli draw per unordered pair, i ascending then j.
  std::vector<std::pair<int, int>> edges;
  {
    rng::Stream stream(rng::fold(config.seed, rng::kDomainSbm));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const bool same = i / config.nodes_per_block == j / config.nodes_per_block;
        const double p = same ? config.intra_block_edge_prob : config.inter_block_edge_prob;
        if (stream.bernoulli(p)) edges.emplace_back(i, j);
      }
    }
  }

  // Features: one-hot block indicator, corrupted to a uniformly random block
  // for a kFeatureCorruption fraction of nodes. Per node: one uniform draw,
  // plus one block draw when it falls below the corruption rate.
  MatrixD features(n, config.num_blocks);
  {
    rng::Stream stream(rng::fold(config.seed, rng::kDomainFeatures));
    for (int v = 0; v < n; ++v) {
      int block = v / config.nodes_per_block;
      if (stream.next_unit() < kFeatureCorruption) {
        block = static_cast<int>(
            stream.next_below(static_cast<std::uint64_t>(config.num_blocks)));
      }
      features(v, block) = 1.0;
    }
  }

  Graph graph = build_graph(n, edges, features);

  std::vector<Subgraph> subgraphs;
  std::vector<Label> labels;
  {
    rng::Stream stream(rng::fold(config.seed, rng::kDomainSampler));
    for (int s = 0; s < config.num_subgraphs; ++s) {
      std::vector<int> nodes;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        const int start =
            static_cast<int>(stream.next_below(static_cast<std::uint64_t>(n)));
        nodes = config.sampler == SamplerKind::bfs_ball
                    ? sample_bfs_ball(graph, start, config.subgraph_size)
                    : sample_random_walk(graph, start, config.subgraph_size, stream);
        if (static_cast<int>(nodes.size()) >= 2) break;
        nodes.clear();
      }
      if (nodes.empty()) {
        throw ValidationError("synth: sampler could not reach 2 nodes in 1000 attempts");
      }
      labels.push_back({majority_block(nodes, config.nodes_per_block, config.num_blocks)});
      subgraphs.push_back(make_subgraph(std::move(nodes)));
    }
  }

  LabelSpec spec{TaskKind::multiclass, std::max(2, config.num_blocks)};
  return make_dataset(std::move(graph), std::move(subgraphs), std::move(labels), spec);
}

SubgraphDataset split_dataset(const SubgraphDataset& dataset, double train_fraction,
                              double val_fraction, double test_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(val_fraction > 0.0) || !(test_fraction > 0.0)) {
    throw ValidationError("split: all fractions must be positive");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw ValidationError("split: fractions must sum to 1");
  }
  const int n = dataset.size();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng::Stream stream(rng::fold(seed, rng::kDomainSplit));
  rng::shuffle(order, stream);

  const int n_val = static_cast<int>(val_fraction * n);
  const int n_test = static_cast<int>(test_fraction * n);
  const int n_train = n - n_val - n_test;  // floor remainders land in train
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw ValidationError("split: too few subgraphs to populate all splits");
  }
  std::vector<Split> split(n, Split::unassigned);
  for (int i = 0; i < n; ++i) {
    split[order[i]] = i < n_train ? Split::train : (i < n_train + n_val ? Split::val
                                                                        : Split::test);
  }
  return make_dataset(dataset.graph, dataset.subgraphs, dataset.labels, dataset.label_spec,
                      std::move(split));
}

SubgraphDataset load_dataset(const std::string& graph_path,
                             const std::optional<std::string>& feature_path,
                             const std::string& subgraph_path, const LabelSpec& label_spec) {
  const auto edges = load_edge_list(graph_path);
  const auto records = load_subgraph_records(subgraph_path);

  std::optional<MatrixD> features;
  int num_nodes = 0;
  if (feature_path) {
    features = load_features(*feature_path);
    num_nodes = features->rows;
  } else {
    for (const auto& [u, v] : edges) num_nodes = std::max({num_nodes, u + 1, v + 1});
    for (const auto& record : records) {
      for (int v : record.nodes) num_nodes = std::max(num_nodes, v + 1);
    }
  }
  Graph graph = build_graph(num_nodes, edges, features);

  std::vector<Subgraph> subgraphs;
  std::vector<Label> labels;
  std::vector<Split> split;
  for (const auto& record : records) {
    subgraphs.push_back(make_subgraph(record.nodes));
    labels.push_back(record.label);
    split.push_back(record.split);
  }
  return make_dataset(std::move(graph), std::move(subgraphs), std::move(labels), label_spec,
                      std::move(split));
}

void save_dataset(const std::string& dir, const SubgraphDataset& dataset) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  save_edge_list(dir + "/graph.edgelist", dataset.graph.edge_list());
  save_features(dir + "/node_features.txt", dataset.graph.features());
  save_subgraph_records(dir + "/subgraphs.jsonl", dataset);
}

StrategyKind parse_strategy(const std::string& name) {
  if (name == "plain") return StrategyKind::plain;
  if (name == "drop_node") return StrategyKind::drop_node;
  if (name == "drop_edge") return StrategyKind::drop_edge;
  if (name == "drop_edge_sub") return StrategyKind::drop_edge_sub;
  if (name == "multi_view") return StrategyKind::multi_view;
  throw ValidationError("unknown strategy '" + name +
                        "' (expected plain, drop_node, drop_edge, drop_edge_sub or multi_view)");
}

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::plain: return "plain";
    case StrategyKind::drop_node: return "drop_node";
    case StrategyKind::drop_edge: return "drop_edge";
    case StrategyKind::drop_edge_sub: return "drop_edge_sub";
    default: return "multi_view";
  }
}

AugmentPlan strategy_plan(StrategyKind kind, int num_views, double node_drop, double edge_drop) {
  AugmentPlan plan;
  switch (kind) {
    case StrategyKind::plain:
      plan.mode = BatchMode::multi_view;
      break;
    case StrategyKind::drop_node:
      plan.mode = BatchMode::inplace_whole_graph;
      plan.config.node_drop_rate = node_drop;
      break;
    case StrategyKind::drop_edge:
      plan.mode = BatchMode::inplace_whole_graph;
      plan.config.edge_drop_rate = edge_drop;
      break;
    case StrategyKind::drop_edge_sub:
      plan.mode = BatchMode::inplace_subgraph;
      plan.config.edge_drop_rate = edge_drop;
      break;
    case StrategyKind::multi_view:
      plan.mode = BatchMode::multi_view;
      plan.config.num_views = num_views;
      plan.config.node_drop_rate = node_drop;
      plan.config.edge_drop_rate = edge_drop;
      break;
  }
  return plan;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("mean of empty sample");
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sem_of(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n <= 1) return 0.0;
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sample_var = ss / static_cast<double>(n - 1);
  return std::sqrt(sample_var / static_cast<double>(n));
}

std::string AblationReport::to_text() const {
  std::size_t name_width = std::string("strategy").size();
  for (const auto& row : rows) name_width = std::max(name_width, row.strategy.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_width) + 2) << "strategy"
      << std::setw(15) << "mean_micro_f1" << std::setw(9) << "sem"
      << "seeds" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& row : rows) {
    out << std::setw(static_cast<int>(name_width) + 2) << row.strategy << std::setw(15)
        << row.mean << std::setw(9) << row.sem << row.per_seed_f1.size() << '\n';
  }
  return out.str();
}

std::string AblationReport::to_csv() const {
  std::ostringstream out;
  out << "strategy,mean_micro_f1,sem,seeds\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& row : rows) {
    out << row.strategy << ',' << row.mean << ',' << row.sem << ',' << row.per_seed_f1.size()
        << '\n';
  }
  return out.str();
}

}  // namespace subaug
