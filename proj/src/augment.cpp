#include "subaug/augment.hpp"

#include <algorithm>
#include <string>

namespace subaug {

void validate(const AugmentConfig& config) {
  if (config.num_views < 0) throw ValidationError("augment: num_views must be >= 0");
  auto check_rate = [](double r, const char* name) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw ValidationError(std::string("augment: ") + name + " must lie in [0, 1]");
    }
  };
  check_rate(config.node_drop_rate, "node_drop_rate");
  check_rate(config.edge_drop_rate, "edge_drop_rate");
}

std::vector<std::pair<int, int>> AugmentedBatch::edge_list() const {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(neighbors.size() / 2);
  for (int u = 0; u < total_nodes; ++u) {
    for (int v : node_neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return edges;
}

std::vector<std::pair<int, int>> canonical_induced_edges(const Graph& graph,
                                                         const Subgraph& subgraph) {
  MatrixD a = induced_adjacency(graph, subgraph);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < a.rows; ++i) {
    for (int j = i + 1; j < a.cols; ++j) {
      if (a(i, j) != 0.0) edges.emplace_back(i, j);
    }
  }
  return edges;
}

ViewMasks draw_view_masks(int subgraph_size, int induced_edge_count, const AugmentConfig& config,
                          rng::Stream& stream) {
  ViewMasks masks;
  masks.node_dropped.resize(subgraph_size);
  for (int i = 0; i < subgraph_size; ++i) {
    masks.node_dropped[i] = stream.bernoulli(config.node_drop_rate) ? 1 : 0;
  }
  masks.edge_dropped.resize(induced_edge_count);
  for (int e = 0; e < induced_edge_count; ++e) {
    masks.edge_dropped[e] = stream.bernoulli(config.edge_drop_rate) ? 1 : 0;
  }
  return masks;
}

MatrixD apply_masks(const MatrixD& sub_adjacency, const ViewMasks& masks) {
  const int n = sub_adjacency.rows;
  if (sub_adjacency.cols != n) throw ValidationError("apply_masks: adjacency must be square");
  if (static_cast<int>(masks.node_dropped.size()) != n) {
    throw ValidationError("apply_masks: node mask length " +
                          std::to_string(masks.node_dropped.size()) + " != " + std::to_string(n));
  }
  MatrixD out = sub_adjacency;
  for (int i = 0; i < n; ++i) {
    if (!masks.node_dropped[i]) continue;
    for (int j = 0; j < n; ++j) {
      out(i, j) = 0.0;
      out(j, i) = 0.0;
    }
  }
  int e = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (sub_adjacency(i, j) == 0.0) continue;
      if (e >= static_cast<int>(masks.edge_dropped.size())) {
        throw ValidationError("apply_masks: edge mask shorter than induced edge count");
      }
      if (masks.edge_dropped[e]) {
        out(i, j) = 0.0;
        out(j, i) = 0.0;
      }
      ++e;
    }
  }
  if (e != static_cast<int>(masks.edge_dropped.size())) {
    throw ValidationError("apply_masks: edge mask length " +
                          std::to_string(masks.edge_dropped.size()) + " != induced edge count " +
                          std::to_string(e));
  }
  return out;
}

std::vector<std::vector<int>> extract_cross_block(const Graph& graph, const Subgraph& subgraph) {
  validate_subgraph(graph, subgraph);
  std::vector<std::vector<int>> rows;
  rows.reserve(subgraph.node_ids.size());
  for (int id : subgraph.node_ids) {
    auto nbrs = graph.neighbors(id);
    rows.emplace_back(nbrs.begin(), nbrs.end());
  }
  return rows;
}

namespace {

AugmentedBatch finalize_batch(const Graph& graph, const std::vector<Subgraph>& batch,
                              std::vector<std::vector<int>> rows, int total_nodes,
                              std::vector<CloneOrigin> clone_map,
                              std::vector<std::vector<std::vector<int>>> readout_sets) {
  const int n = graph.num_nodes();
  AugmentedBatch out;
  out.base_nodes = n;
  out.total_nodes = total_nodes;
  out.clone_map = std::move(clone_map);
  out.view_readout_sets = std::move(readout_sets);

  out.offsets.assign(1, 0);
  out.offsets.reserve(total_nodes + 1);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end());
    out.neighbors.insert(out.neighbors.end(), row.begin(), row.end());
    out.offsets.push_back(static_cast<std::int64_t>(out.neighbors.size()));
  }

  out.features = MatrixD(total_nodes, graph.feature_dim());
  for (int u = 0; u < n; ++u) {
    auto src = graph.features().row(u);
    std::copy(src.begin(), src.end(), out.features.row(u).begin());
  }
  for (std::size_t c = 0; c < out.clone_map.size(); ++c) {
    auto src = graph.features().row(out.clone_map[c].original);
    std::copy(src.begin(), src.end(), out.features.row(n + static_cast<int>(c)).begin());
  }

  out.labeling.assign(total_nodes, 0);
  for (const auto& sub : batch) {
    for (int id : sub.node_ids) out.labeling[id] = 1;
  }
  for (int u = n; u < total_nodes; ++u) out.labeling[u] = 1;
  return out;
}

}  // namespace

AugmentedBatch build_augmented_batch(const Graph& graph, const std::vector<Subgraph>& batch,
                                     const AugmentConfig& config, const BatchKey& key) {
  validate(config);
  if (batch.empty()) throw ValidationError("augment: empty batch");
  for (const auto& sub : batch) validate_subgraph(graph, sub);

  const int n = graph.num_nodes();
  const int k = config.num_views;

  int total_nodes = n;
  for (const auto& sub : batch) total_nodes += k * sub.size();

  std::vector<std::vector<int>> rows(total_nodes);
  for (int u = 0; u < n; ++u) {
    auto nbrs = graph.neighbors(u);
    rows[u].assign(nbrs.begin(), nbrs.end());
  }

  std::vector<CloneOrigin> clone_map;
  clone_map.reserve(total_nodes - n);
  std::vector<std::vector<std::vector<int>>> readout_sets(batch.size());

  int next_clone = n;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const Subgraph& sub = batch[s];
    const int m = sub.size();
    readout_sets[s].resize(k + 1);
    readout_sets[s][0] = sub.node_ids;

    const MatrixD sub_adj = induced_adjacency(graph, sub);
    const auto cross = extract_cross_block(graph, sub);
    int induced_edges = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        if (sub_adj(i, j) != 0.0) ++induced_edges;
      }
    }

    for (int v = 1; v <= k; ++v) {
      rng::Stream stream =
          rng::mask_stream(key.master_seed, key.epoch, key.batch_index,
                           static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(v));
      const ViewMasks masks = draw_view_masks(m, induced_edges, config, stream);
      const MatrixD dropped = apply_masks(sub_adj, masks);

      const int block_start = next_clone;
      for (int i = 0; i < m; ++i) {
        clone_map.push_back(CloneOrigin{static_cast<int>(s), v, sub.node_ids[i]});
      }
      next_clone += m;

      for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
          if (dropped(i, j) != 0.0) {
            rows[block_start + i].push_back(block_start + j);
            rows[block_start + j].push_back(block_start + i);
          }
        }
      }
      for (int i = 0; i < m; ++i) {
        if (config.mask_cross_edges && masks.node_dropped[i]) continue;
        for (int orig : cross[i]) {
          rows[block_start + i].push_back(orig);
          rows[orig].push_back(block_start + i);
        }
      }

      auto& readout = readout_sets[s][v];
      for (int i = 0; i < m; ++i) {
        if (config.readout_excludes_dropped && masks.node_dropped[i]) continue;
        readout.push_back(block_start + i);
      }
    }
  }

  return finalize_batch(graph, batch, std::move(rows), total_nodes, std::move(clone_map),
                        std::move(readout_sets));
}

AugmentedBatch build_inplace_perturbed_batch(const Graph& graph,
                                             const std::vector<Subgraph>& batch,
                                             const AugmentConfig& config, PerturbScope scope,
                                             const BatchKey& key) {
  validate(config);
  if (batch.empty()) throw ValidationError("augment: empty batch");
  for (const auto& sub : batch) validate_subgraph(graph, sub);

  const int n = graph.num_nodes();
  std::vector<std::vector<int>> rows(n);
  for (int u = 0; u < n; ++u) {
    auto nbrs = graph.neighbors(u);
    rows[u].assign(nbrs.begin(), nbrs.end());
  }

  std::vector<std::vector<std::uint8_t>> sub_node_dropped(batch.size());
  auto remove_edge = [&rows](int u, int v) {
    auto drop = [](std::vector<int>& row, int id) {
      auto it = std::find(row.begin(), row.end(), id);
      if (it != row.end()) row.erase(it);
    };
    drop(rows[u], v);
    drop(rows[v], u);
  };

  if (scope == PerturbScope::whole_graph) {
    const auto edges = graph.edge_list();
    rng::Stream stream = rng::mask_stream(key.master_seed, key.epoch, key.batch_index, 0, 0);
    const ViewMasks masks =
        draw_view_masks(n, static_cast<int>(edges.size()), config, stream);
    for (int u = 0; u < n; ++u) {
      if (masks.node_dropped[u]) rows[u].clear();
    }
    for (int u = 0; u < n; ++u) {
      std::erase_if(rows[u], [&](int v) { return masks.node_dropped[v] != 0; });
    }
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (masks.edge_dropped[e]) remove_edge(edges[e].first, edges[e].second);
    }
    for (std::size_t s = 0; s < batch.size(); ++s) {
      sub_node_dropped[s].resize(batch[s].size());
      for (int i = 0; i < batch[s].size(); ++i) {
        sub_node_dropped[s][i] = masks.node_dropped[batch[s].node_ids[i]];
      }
    }
  } else {
    for (std::size_t s = 0; s < batch.size(); ++s) {
      const Subgraph& sub = batch[s];
      const MatrixD sub_adj = induced_adjacency(graph, sub);
      const auto edges = canonical_induced_edges(graph, sub);
      rng::Stream stream = rng::mask_stream(key.master_seed, key.epoch, key.batch_index,
                                            static_cast<std::uint64_t>(s), 0);
      const ViewMasks masks =
          draw_view_masks(sub.size(), static_cast<int>(edges.size()), config, stream);
      const MatrixD dropped = apply_masks(sub_adj, masks);
      for (int i = 0; i < sub.size(); ++i) {
        for (int j = i + 1; j < sub.size(); ++j) {
          if (sub_adj(i, j) != 0.0 && dropped(i, j) == 0.0) {
            remove_edge(sub.node_ids[i], sub.node_ids[j]);
          }
        }
      }
      sub_node_dropped[s] = masks.node_dropped;
    }
  }

  std::vector<std::vector<std::vector<int>>> readout_sets(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    readout_sets[s].resize(1);
    auto& readout = readout_sets[s][0];
    for (int i = 0; i < batch[s].size(); ++i) {
      if (config.readout_excludes_dropped && sub_node_dropped[s][i]) continue;
      readout.push_back(batch[s].node_ids[i]);
    }
  }

  return finalize_batch(graph, batch, std::move(rows), n, {}, std::move(readout_sets));
}

AugmentedBatch assemble_batch(const Graph& graph, const std::vector<Subgraph>& batch,
                              const AugmentPlan& plan, const BatchKey& key) {
  switch (plan.mode) {
    case BatchMode::multi_view:
      return build_augmented_batch(graph, batch, plan.config, key);
    case BatchMode::inplace_whole_graph:
      return build_inplace_perturbed_batch(graph, batch, plan.config, PerturbScope::whole_graph,
                                           key);
    case BatchMode::inplace_subgraph:
      return build_inplace_perturbed_batch(graph, batch, plan.config, PerturbScope::per_subgraph,
                                           key);
  }
  throw ValidationError("augment: unknown batch mode");
}

}  // namespace subaug
