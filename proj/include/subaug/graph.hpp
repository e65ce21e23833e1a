#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subaug/common.hpp"

namespace subaug {

/// Undirected graph: symmetric 0/1 adjacency in CSR form (sorted neighbor
/// lists, no self-loops, no duplicates) plus a dense node feature matrix.
/// Immutable after construction; build through build_graph().
class Graph {
public:
  Graph() = default;

  int num_nodes() const { return num_nodes_; }
  /// Undirected edge count.
  int num_edges() const { return static_cast<int>(neighbors_.size() / 2); }
  int feature_dim() const { return features_.cols; }

  std::span<const int> neighbors(int u) const {
    return {neighbors_.data() + offsets_[u],
            static_cast<std::size_t>(offsets_[u + 1] - offsets_[u])};
  }
  int degree(int u) const { return static_cast<int>(offsets_[u + 1] - offsets_[u]); }
  bool has_edge(int u, int v) const;

  const MatrixD& features() const { return features_; }

  /// Edges as (u, v) with u < v, lexicographically sorted. This is also the
  /// canonical whole-graph edge order used by in-place edge masks.
  std::vector<std::pair<int, int>> edge_list() const;

private:
  friend Graph build_graph(int, const std::vector<std::pair<int, int>>&,
                           std::optional<MatrixD>);
  int num_nodes_ = 0;
  std::vector<std::int64_t> offsets_ = {0};
  std::vector<int> neighbors_;
  MatrixD features_;
};

/// Validated constructor. Edges may appear in either orientation and more than
/// once; duplicates collapse. Self-loops are rejected. When features are
/// omitted, every node gets a single all-ones feature column.
Graph build_graph(int num_nodes, const std::vector<std::pair<int, int>>& edges,
                  std::optional<MatrixD> features = std::nullopt);

/// Node-id subset of a parent Graph, strictly ascending. The edge set is
/// always the induced one: edges of the parent restricted to these nodes.
struct Subgraph {
  std::vector<int> node_ids;

  int size() const { return static_cast<int>(node_ids.size()); }
};

/// Sorts ids and validates non-empty / no duplicates. Range checking against
/// a parent graph happens wherever a (graph, subgraph) pair is consumed.
Subgraph make_subgraph(std::vector<int> node_ids);

/// Throws ValidationError unless every id is in [0, graph.num_nodes()).
void validate_subgraph(const Graph& graph, const Subgraph& subgraph);

/// Dense induced adjacency over subgraph-local indices: entry (i, j) is 1 iff
/// (node_ids[i], node_ids[j]) is an edge of the parent. Symmetric, zero diagonal.
MatrixD induced_adjacency(const Graph& graph, const Subgraph& subgraph);

/// Feature rows of the subgraph nodes, in node_ids order.
MatrixD subgraph_features(const Graph& graph, const Subgraph& subgraph);

enum class TaskKind { multiclass, multilabel };

struct LabelSpec {
  TaskKind task_kind = TaskKind::multiclass;
  int num_classes = 2;
};

void validate(const LabelSpec& spec);

/// One subgraph's label: exactly one class id for multiclass, a sorted set of
/// class ids (possibly empty) for multilabel.
using Label = std::vector<int>;

void validate_label(const Label& label, const LabelSpec& spec);

enum class Split : std::uint8_t { train, val, test, unassigned };

std::string split_name(Split split);
Split parse_split(const std::string& name);

struct SubgraphDataset {
  Graph graph;
  std::vector<Subgraph> subgraphs;
  std::vector<Label> labels;
  LabelSpec label_spec;
  std::vector<Split> split;

  int size() const { return static_cast<int>(subgraphs.size()); }
  std::vector<int> split_indices(Split which) const;
};

/// Validates lengths, subgraph ranges and labels; split may be all-unassigned.
SubgraphDataset make_dataset(Graph graph, std::vector<Subgraph> subgraphs,
                             std::vector<Label> labels, LabelSpec label_spec,
                             std::vector<Split> split = {});

}  // namespace subaug
