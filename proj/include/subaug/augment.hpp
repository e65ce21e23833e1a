#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "subaug/common.hpp"
#include "subaug/graph.hpp"
#include "subaug/rng.hpp"

namespace subaug {

struct AugmentConfig {
  /// Augmented views per subgraph, on top of the always-present original view.
  int num_views = 0;
  double node_drop_rate = 0.0;
  double edge_drop_rate = 0.0;
  /// When true, cross edges of dropped clone nodes are zeroed as well, so a
  /// dropped clone ends up fully isolated. Default keeps them: the cross block
  /// is extracted from the base adjacency independently of the masks.
  bool mask_cross_edges = false;
  /// When true, dropped clones are left out of their view's readout set.
  bool readout_excludes_dropped = true;
};

void validate(const AugmentConfig& config);

/// Boolean drop masks for one view. Node flags are indexed by subgraph-local
/// node position; edge flags follow the canonical induced-edge order ((i, j)
/// with i < j in local indices, lexicographic).
struct ViewMasks {
  std::vector<std::uint8_t> node_dropped;
  std::vector<std::uint8_t> edge_dropped;
};

/// Where a clone node came from: batch subgraph index, view index (1..k for
/// multi-view clones) and the original node id in the base graph.
struct CloneOrigin {
  int subgraph = 0;
  int view = 0;
  int original = 0;
};

/// The assembled batch graph: original nodes 0..base_nodes-1 followed by clone
/// blocks, one per (subgraph, augmented view). Adjacency is symmetric CSR with
/// sorted rows. view_readout_sets[s][0] is subgraph s's own node ids; entries
/// 1..k are that view's clone readout sets. labeling marks clone nodes and the
/// original members of every batch subgraph with 1.
struct AugmentedBatch {
  int base_nodes = 0;
  int total_nodes = 0;
  std::vector<std::int64_t> offsets;
  std::vector<int> neighbors;
  MatrixD features;
  std::vector<CloneOrigin> clone_map;  // clone id = base_nodes + index
  std::vector<std::vector<std::vector<int>>> view_readout_sets;
  std::vector<std::uint8_t> labeling;

  std::span<const int> node_neighbors(int u) const {
    return {neighbors.data() + offsets[u],
            static_cast<std::size_t>(offsets[u + 1] - offsets[u])};
  }
  int node_degree(int u) const { return static_cast<int>(offsets[u + 1] - offsets[u]); }
  std::vector<std::pair<int, int>> edge_list() const;
};

/// Induced edges in canonical order: (i, j) with i < j, subgraph-local indices,
/// lexicographically sorted. Mask reproducibility depends on this order.
std::vector<std::pair<int, int>> canonical_induced_edges(const Graph& graph,
                                                         const Subgraph& subgraph);

/// Draws independent Bernoulli flags: one per node (rate node_drop_rate), then
/// one per induced edge (rate edge_drop_rate), from the given stream.
ViewMasks draw_view_masks(int subgraph_size, int induced_edge_count, const AugmentConfig& config,
                          rng::Stream& stream);

/// Masked subgraph adjacency: zero the rows and columns of dropped nodes, then
/// both symmetric entries of each dropped edge. Entries stay in {0, 1}.
MatrixD apply_masks(const MatrixD& sub_adjacency, const ViewMasks& masks);

/// Cross block: for each subgraph node (local order), its full base-graph
/// neighbor row over all original columns. Columns belonging to the subgraph's
/// own members are included.
std::vector<std::vector<int>> extract_cross_block(const Graph& graph, const Subgraph& subgraph);

/// Addresses the mask streams of one forward step; see rng.hpp for the
/// key-derivation scheme.
struct BatchKey {
  std::uint64_t master_seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t batch_index = 0;
};

/// Multi-view assembly: appends config.num_views clone blocks per subgraph,
/// each with freshly drawn masks, and wires them to the base graph through the
/// cross block. config.num_views == 0 yields the plain batch (original views
/// only, no perturbation).
AugmentedBatch build_augmented_batch(const Graph& graph, const std::vector<Subgraph>& batch,
                                     const AugmentConfig& config, const BatchKey& key);

enum class PerturbScope {
  whole_graph,  // masks drawn over all base nodes / all base edges
  per_subgraph  // masks drawn over each subgraph's induced structure
};

/// Degraded-baseline assembly: no clones; masks are applied directly to the
/// base adjacency. Whole-graph scope keys its masks as (subgraph 0, view 0);
/// per-subgraph scope keys each subgraph's masks as (subgraph index, view 0).
AugmentedBatch build_inplace_perturbed_batch(const Graph& graph,
                                             const std::vector<Subgraph>& batch,
                                             const AugmentConfig& config, PerturbScope scope,
                                             const BatchKey& key);

enum class BatchMode { multi_view, inplace_whole_graph, inplace_subgraph };

/// How the trainer turns (graph, batch subgraphs) into a batch graph.
struct AugmentPlan {
  AugmentConfig config;
  BatchMode mode = BatchMode::multi_view;
};

AugmentedBatch assemble_batch(const Graph& graph, const std::vector<Subgraph>& batch,
                              const AugmentPlan& plan, const BatchKey& key);

}  // namespace subaug
