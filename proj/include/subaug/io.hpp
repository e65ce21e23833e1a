#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/common.hpp"
#include "subaug/graph.hpp"
#include "subaug/train.hpp"

namespace subaug {

/// Edge-list text format: one `u<TAB>v` pair per line, 0-based ids, lines
/// whose first non-space character is '#' are comments, blank lines ignored.
std::vector<std::pair<int, int>> load_edge_list(const std::string& path);
void save_edge_list(const std::string& path, const std::vector<std::pair<int, int>>& edges);

/// Feature text format: one node per line, whitespace-separated decimal
/// reals, line index = node id. Writing uses shortest-round-trip formatting
/// so load(save(x)) == x exactly.
MatrixD load_features(const std::string& path);
void save_features(const std::string& path, const MatrixD& features);

/// One line of a subgraph JSONL file: {"nodes": [...], "label": int | [int],
/// "split": "train"|"val"|"test"} with `split` optional.
struct SubgraphRecord {
  std::vector<int> nodes;
  Label label;
  Split split = Split::unassigned;
};

std::vector<SubgraphRecord> load_subgraph_records(const std::string& path);
void save_subgraph_records(const std::string& path, const SubgraphDataset& dataset);

std::string metrics_json_line(const MetricsRecord& record);
void save_metrics(const std::string& path, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> load_metrics(const std::string& path);

/// Clone-map JSONL: {"clone_id", "subgraph", "view", "original"} per clone.
void save_clone_map(const std::string& path, const AugmentedBatch& batch);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace subaug
