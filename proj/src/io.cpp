#include "subaug/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace subaug {
namespace {

using nlohmann::json;

std::ifstream open_for_read(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open '" + path + "' for reading");
  return file;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  return file;
}

void finish_write(std::ofstream& file, const std::string& path) {
  file.flush();
  if (!file) throw IoError("write to '" + path + "' failed");
}

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(line) + ": " + what);
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') continue;
    return c == '#';
  }
  return true;
}

std::string format_real(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("failed to format a real value");
  return std::string(buf, ptr);
}

json parse_json_line(const std::string& path, int line_no, const std::string& line) {
  json value = json::parse(line, nullptr, false);
  if (value.is_discarded()) parse_fail(path, line_no, "invalid JSON");
  if (!value.is_object()) parse_fail(path, line_no, "expected a JSON object");
  return value;
}

}  // namespace

std::vector<std::pair<int, int>> load_edge_list(const std::string& path) {
  std::ifstream file = open_for_read(path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream fields(line);
    long long u = 0;
    long long v = 0;
    std::string rest;
    if (!(fields >> u >> v)) parse_fail(path, line_no, "expected two integer node ids");
    if (fields >> rest) parse_fail(path, line_no, "trailing content after edge pair");
    if (u < 0 || v < 0) parse_fail(path, line_no, "negative node id");
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  return edges;
}

void save_edge_list(const std::string& path, const std::vector<std::pair<int, int>>& edges) {
  std::ofstream file = open_for_write(path);
  for (const auto& [u, v] : edges) {
    file << u << '\t' << v << '\n';
  }
  finish_write(file, path);
}

MatrixD load_features(const std::string& path) {
  std::ifstream file = open_for_read(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    std::istringstream fields(line);
    std::vector<double> row;
    double value = 0.0;
    while (fields >> value) row.push_back(value);
    if (!fields.eof()) parse_fail(path, line_no, "expected decimal reals");
    if (row.empty()) parse_fail(path, line_no, "empty feature row");
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_fail(path, line_no, "feature row has " + std::to_string(row.size()) +
                                    " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": no feature rows");
  MatrixD features(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].begin(), rows[r].end(), features.row(static_cast<int>(r)).begin());
  }
  return features;
}

void save_features(const std::string& path, const MatrixD& features) {
  std::ofstream file = open_for_write(path);
  for (int r = 0; r < features.rows; ++r) {
    auto row = features.row(r);
    for (int c = 0; c < features.cols; ++c) {
      if (c > 0) file << ' ';
      file << format_real(row[c]);
    }
    file << '\n';
  }
  finish_write(file, path);
}

std::vector<SubgraphRecord> load_subgraph_records(const std::string& path) {
  std::ifstream file = open_for_read(path);
  std::vector<SubgraphRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    json object = parse_json_line(path, line_no, line);
    SubgraphRecord record;
    if (!object.contains("nodes") || !object["nodes"].is_array()) {
      parse_fail(path, line_no, "missing 'nodes' array");
    }
    for (const auto& node : object["nodes"]) {
      if (!node.is_number_integer()) parse_fail(path, line_no, "'nodes' must hold integers");
      record.nodes.push_back(node.get<int>());
    }
    if (!object.contains("label")) parse_fail(path, line_no, "missing 'label'");
    const json& label = object["label"];
    if (label.is_number_integer()) {
      record.label.push_back(label.get<int>());
    } else if (label.is_array()) {
      for (const auto& entry : label) {
        if (!entry.is_number_integer()) parse_fail(path, line_no, "'label' must hold integers");
        record.label.push_back(entry.get<int>());
      }
    } else {
      parse_fail(path, line_no, "'label' must be an integer or array of integers");
    }
    if (object.contains("split")) {
      if (!object["split"].is_string()) parse_fail(path, line_no, "'split' must be a string");
      try {
        record.split = parse_split(object["split"].get<std::string>());
      } catch (const ValidationError& e) {
        parse_fail(path, line_no, e.what());
      }
    }
    for (const auto& [key, unused] : object.items()) {
      if (key != "nodes" && key != "label" && key != "split") {
        parse_fail(path, line_no, "unknown field '" + key + "'");
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

void save_subgraph_records(const std::string& path, const SubgraphDataset& dataset) {
  std::ofstream file = open_for_write(path);
  for (std::size_t i = 0; i < dataset.subgraphs.size(); ++i) {
    json object;
    object["nodes"] = dataset.subgraphs[i].node_ids;
    if (dataset.label_spec.task_kind == TaskKind::multiclass) {
      object["label"] = dataset.labels[i][0];
    } else {
      object["label"] = dataset.labels[i];
    }
    if (dataset.split[i] != Split::unassigned) {
      object["split"] = split_name(dataset.split[i]);
    }
    file << object.dump() << '\n';
  }
  finish_write(file, path);
}

std::string metrics_json_line(const MetricsRecord& record) {
  json object;
  object["seed"] = record.seed;
  object["epoch"] = record.epoch;
  object["split"] = record.split;
  object["loss"] = record.loss;
  object["micro_f1"] = record.micro_f1;
  return object.dump();
}

void save_metrics(const std::string& path, const std::vector<MetricsRecord>& records) {
  std::ofstream file = open_for_write(path);
  for (const auto& record : records) {
    file << metrics_json_line(record) << '\n';
  }
  finish_write(file, path);
}

std::vector<MetricsRecord> load_metrics(const std::string& path) {
  std::ifstream file = open_for_read(path);
  std::vector<MetricsRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    json object = parse_json_line(path, line_no, line);
    MetricsRecord record;
    try {
      record.seed = object.at("seed").get<std::uint64_t>();
      record.epoch = object.at("epoch").get<int>();
      record.split = object.at("split").get<std::string>();
      record.loss = object.at("loss").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : object.at("loss").get<double>();
      record.micro_f1 = object.at("micro_f1").get<double>();
    } catch (const json::exception& e) {
      parse_fail(path, line_no, e.what());
    }
    records.push_back(std::move(record));
  }
  return records;
}

void save_clone_map(const std::string& path, const AugmentedBatch& batch) {
  std::ofstream file = open_for_write(path);
  for (std::size_t i = 0; i < batch.clone_map.size(); ++i) {
    json object;
    object["clone_id"] = batch.base_nodes + static_cast<int>(i);
    object["subgraph"] = batch.clone_map[i].subgraph;
    object["view"] = batch.clone_map[i].view;
    object["original"] = batch.clone_map[i].original;
    file << object.dump() << '\n';
  }
  finish_write(file, path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream file = open_for_read(path);
  std::ostringstream content;
  content << file.rdbuf();
  if (file.bad()) throw IoError("read of '" + path + "' failed");
  return content.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream file = open_for_write(path);
  file << content;
  finish_write(file, path);
}

}  // namespace subaug
