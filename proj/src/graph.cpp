#include "subaug/graph.hpp"

#include <algorithm>
#include <cmath>

namespace subaug {

bool Graph::has_edge(int u, int v) const {
  auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<std::pair<int, int>> Graph::edge_list() const {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(neighbors_.size() / 2);
  for (int u = 0; u < num_nodes_; ++u) {
    for (int v : neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return edges;
}

Graph build_graph(int num_nodes, const std::vector<std::pair<int, int>>& edges,
                  std::optional<MatrixD> features) {
  if (num_nodes < 0) throw ValidationError("build_graph: negative node count");

  std::vector<std::vector<int>> rows(num_nodes);
  for (std::size_t idx = 0; idx < edges.size(); ++idx) {
    auto [u, v] = edges[idx];
    if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes) {
      throw ValidationError("build_graph: edge " + std::to_string(idx) + " endpoint (" +
                            std::to_string(u) + ", " + std::to_string(v) +
                            ") out of range [0, " + std::to_string(num_nodes) + ")");
    }
    if (u == v) {
      throw ValidationError("build_graph: self-loop at node " + std::to_string(u));
    }
    rows[u].push_back(v);
    rows[v].push_back(u);
  }

  Graph g;
  g.num_nodes_ = num_nodes;
  g.offsets_.assign(1, 0);
  g.offsets_.reserve(num_nodes + 1);
  for (int u = 0; u < num_nodes; ++u) {
    auto& row = rows[u];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    g.neighbors_.insert(g.neighbors_.end(), row.begin(), row.end());
    g.offsets_.push_back(static_cast<std::int64_t>(g.neighbors_.size()));
  }

  if (features.has_value()) {
    if (features->rows != num_nodes) {
      throw ValidationError("build_graph: feature matrix has " + std::to_string(features->rows) +
                            " rows, expected " + std::to_string(num_nodes));
    }
    if (features->cols < 1) throw ValidationError("build_graph: feature dim must be >= 1");
    if (!all_finite(*features)) throw ValidationError("build_graph: non-finite feature value");
    g.features_ = std::move(*features);
  } else {
    g.features_ = MatrixD(num_nodes, 1, 1.0);
  }
  return g;
}

Subgraph make_subgraph(std::vector<int> node_ids) {
  if (node_ids.empty()) throw ValidationError("subgraph: empty node set");
  std::sort(node_ids.begin(), node_ids.end());
  if (std::adjacent_find(node_ids.begin(), node_ids.end()) != node_ids.end()) {
    throw ValidationError("subgraph: duplicate node id");
  }
  return Subgraph{std::move(node_ids)};
}

void validate_subgraph(const Graph& graph, const Subgraph& subgraph) {
  if (subgraph.node_ids.empty()) throw ValidationError("subgraph: empty node set");
  for (int id : subgraph.node_ids) {
    if (id < 0 || id >= graph.num_nodes()) {
      throw ValidationError("subgraph: node id " + std::to_string(id) + " out of range [0, " +
                            std::to_string(graph.num_nodes()) + ")");
    }
  }
}

MatrixD induced_adjacency(const Graph& graph, const Subgraph& subgraph) {
  validate_subgraph(graph, subgraph);
  const auto& ids = subgraph.node_ids;
  const int n = subgraph.size();
  MatrixD a(n, n);
  for (int i = 0; i < n; ++i) {
    auto nbrs = graph.neighbors(ids[i]);
    // ids and nbrs are both sorted; walk them together.
    std::size_t p = 0;
    for (int j = 0; j < n; ++j) {
      while (p < nbrs.size() && nbrs[p] < ids[j]) ++p;
      if (p < nbrs.size() && nbrs[p] == ids[j]) a(i, j) = 1.0;
    }
  }
  return a;
}

MatrixD subgraph_features(const Graph& graph, const Subgraph& subgraph) {
  validate_subgraph(graph, subgraph);
  const int n = subgraph.size();
  MatrixD x(n, graph.feature_dim());
  for (int i = 0; i < n; ++i) {
    auto src = graph.features().row(subgraph.node_ids[i]);
    std::copy(src.begin(), src.end(), x.row(i).begin());
  }
  return x;
}

void validate(const LabelSpec& spec) {
  if (spec.num_classes < 2) throw ValidationError("label spec: num_classes must be >= 2");
}

void validate_label(const Label& label, const LabelSpec& spec) {
  if (spec.task_kind == TaskKind::multiclass && label.size() != 1) {
    throw ValidationError("label: multiclass label must be a single class id");
  }
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] < 0 || label[i] >= spec.num_classes) {
      throw ValidationError("label: class id " + std::to_string(label[i]) +
                            " outside [0, " + std::to_string(spec.num_classes) + ")");
    }
    if (i > 0 && label[i] <= label[i - 1]) {
      throw ValidationError("label: class ids must be strictly ascending");
    }
  }
}

std::string split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ValidationError("split: unknown name '" + name + "'");
}

std::vector<int> SubgraphDataset::split_indices(Split which) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (split[i] == which) out.push_back(i);
  }
  return out;
}

SubgraphDataset make_dataset(Graph graph, std::vector<Subgraph> subgraphs,
                             std::vector<Label> labels, LabelSpec label_spec,
                             std::vector<Split> split) {
  validate(label_spec);
  if (subgraphs.size() != labels.size()) {
    throw ValidationError("dataset: " + std::to_string(subgraphs.size()) + " subgraphs vs " +
                          std::to_string(labels.size()) + " labels");
  }
  if (split.empty()) split.assign(subgraphs.size(), Split::unassigned);
  if (split.size() != subgraphs.size()) {
    throw ValidationError("dataset: split length mismatch");
  }
  for (const auto& s : subgraphs) validate_subgraph(graph, s);
  for (const auto& l : labels) validate_label(l, label_spec);
  return SubgraphDataset{std::move(graph), std::move(subgraphs), std::move(labels), label_spec,
                         std::move(split)};
}

}  // namespace subaug
