#include "subaug/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "subaug/checkpoint.hpp"
#include "subaug/io.hpp"
#include "subaug/metrics.hpp"
#include "subaug/rng.hpp"

namespace subaug {
namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

[[noreturn]] void config_fail(const std::string& origin, int line, const std::string& what) {
  throw ValidationError(origin + ":" + std::to_string(line) + ": " + what);
}

long long parse_ll(const std::string& value, const std::string& origin, int line) {
  try {
    std::size_t used = 0;
    const long long parsed = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    config_fail(origin, line, "expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& value, const std::string& origin, int line) {
  try {
    std::size_t used = 0;
    const unsigned long long parsed = std::stoull(value, &used);
    if (used != value.size() || value.front() == '-') throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    config_fail(origin, line, "expected a non-negative integer, got '" + value + "'");
  }
}

double parse_double(const std::string& value, const std::string& origin, int line) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    config_fail(origin, line, "expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& value, const std::string& origin, int line) {
  if (value == "true") return true;
  if (value == "false") return false;
  config_fail(origin, line, "expected true or false, got '" + value + "'");
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<int> parse_int_list(const std::string& value, const std::string& origin, int line) {
  std::vector<int> items;
  for (const std::string& item : split_commas(value)) {
    items.push_back(static_cast<int>(parse_ll(item, origin, line)));
  }
  return items;
}

std::string join_ints(const std::vector<int>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(items[i]);
  }
  return out;
}

std::string join_strings(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

std::string join_seeds(const std::vector<std::uint64_t>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(items[i]);
  }
  return out;
}

std::string format_double(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

void write_config_echo(const std::string& out_dir, const RunConfig& config) {
  write_text_file(out_dir + "/config.ini", serialize_config(config));
}

template <typename F>
auto with_precision(const std::string& precision, F&& call) {
  if (precision == "float32") return call(float{});
  if (precision == "float64") return call(double{});
  throw ValidationError("unknown precision '" + precision +
                        "' (expected float32 or float64)");
}

}  // namespace

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::istringstream stream(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_fail(origin, line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "synth" && section != "data" && section != "augment" &&
          section != "model" && section != "train" && section != "ablate") {
        config_fail(origin, line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_fail(origin, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_fail(origin, line_no, "empty key");
    if (section.empty()) config_fail(origin, line_no, "key outside any [section]");

    if (section == "synth") {
      if (key == "num_blocks") config.synth.num_blocks = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "nodes_per_block") config.synth.nodes_per_block = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "intra_block_edge_prob") config.synth.intra_block_edge_prob = parse_double(value, origin, line_no);
      else if (key == "inter_block_edge_prob") config.synth.inter_block_edge_prob = parse_double(value, origin, line_no);
      else if (key == "num_subgraphs") config.synth.num_subgraphs = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "subgraph_size") config.synth.subgraph_size = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "sampler") config.synth.sampler = parse_sampler(value);
      else if (key == "seed") config.synth.seed = parse_u64(value, origin, line_no);
      else config_fail(origin, line_no, "unknown key '" + key + "' in [synth]");
    } else if (section == "data") {
      if (key == "train_fraction") config.train_fraction = parse_double(value, origin, line_no);
      else if (key == "val_fraction") config.val_fraction = parse_double(value, origin, line_no);
      else if (key == "test_fraction") config.test_fraction = parse_double(value, origin, line_no);
      else if (key == "split_seed") config.split_seed = parse_u64(value, origin, line_no);
      else if (key == "task") config.task = value;
      else if (key == "num_classes") config.num_classes = static_cast<int>(parse_ll(value, origin, line_no));
      else config_fail(origin, line_no, "unknown key '" + key + "' in [data]");
    } else if (section == "augment") {
      if (key == "num_views") config.num_views = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "node_drop_rate") config.node_drop_rate = parse_double(value, origin, line_no);
      else if (key == "edge_drop_rate") config.edge_drop_rate = parse_double(value, origin, line_no);
      else if (key == "mask_cross_edges") config.mask_cross_edges = parse_bool(value, origin, line_no);
      else if (key == "readout_excludes_dropped") config.readout_excludes_dropped = parse_bool(value, origin, line_no);
      else if (key == "strategy") config.strategy = value;
      else config_fail(origin, line_no, "unknown key '" + key + "' in [augment]");
    } else if (section == "model") {
      if (key == "num_layers") config.num_layers = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "hidden_dim") config.hidden_dim = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "activation") config.activation = value;
      else if (key == "view_pool") config.view_pool = value;
      else if (key == "node_readout") config.node_readout = value;
      else if (key == "head_hidden_dims") config.head_hidden_dims = parse_int_list(value, origin, line_no);
      else if (key == "precision") config.precision = value;
      else config_fail(origin, line_no, "unknown key '" + key + "' in [model]");
    } else if (section == "train") {
      if (key == "epochs") config.epochs = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "batch_size") config.batch_size = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "learning_rate") config.learning_rate = parse_double(value, origin, line_no);
      else if (key == "weight_decay") config.weight_decay = parse_double(value, origin, line_no);
      else if (key == "optimizer") config.optimizer = value;
      else if (key == "momentum") config.momentum = parse_double(value, origin, line_no);
      else if (key == "seed") config.seed = parse_u64(value, origin, line_no);
      else if (key == "eval_every") config.eval_every = static_cast<int>(parse_ll(value, origin, line_no));
      else if (key == "early_stop_patience") config.early_stop_patience = static_cast<int>(parse_ll(value, origin, line_no));
      else config_fail(origin, line_no, "unknown key '" + key + "' in [train]");
    } else {  // ablate
      if (key == "strategies") config.ablate_strategies = split_commas(value);
      else if (key == "seeds") config.ablate_seeds = parse_seed_list(value);
      else config_fail(origin, line_no, "unknown key '" + key + "' in [ablate]");
    }
  }
}

RunConfig load_config_file(const std::string& path) {
  RunConfig config;
  apply_config_text(config, read_text_file(path), path);
  return config;
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out << "[synth]\n";
  out << "num_blocks = " << config.synth.num_blocks << "\n";
  out << "nodes_per_block = " << config.synth.nodes_per_block << "\n";
  out << "intra_block_edge_prob = " << format_double(config.synth.intra_block_edge_prob) << "\n";
  out << "inter_block_edge_prob = " << format_double(config.synth.inter_block_edge_prob) << "\n";
  out << "num_subgraphs = " << config.synth.num_subgraphs << "\n";
  out << "subgraph_size = " << config.synth.subgraph_size << "\n";
  out << "sampler = " << to_string(config.synth.sampler) << "\n";
  out << "seed = " << config.synth.seed << "\n";
  out << "\n[data]\n";
  out << "train_fraction = " << format_double(config.train_fraction) << "\n";
  out << "val_fraction = " << format_double(config.val_fraction) << "\n";
  out << "test_fraction = " << format_double(config.test_fraction) << "\n";
  out << "split_seed = " << config.split_seed << "\n";
  out << "task = " << config.task << "\n";
  out << "num_classes = " << config.num_classes << "\n";
  out << "\n[augment]\n";
  out << "num_views = " << config.num_views << "\n";
  out << "node_drop_rate = " << format_double(config.node_drop_rate) << "\n";
  out << "edge_drop_rate = " << format_double(config.edge_drop_rate) << "\n";
  out << "mask_cross_edges = " << (config.mask_cross_edges ? "true" : "false") << "\n";
  out << "readout_excludes_dropped = " << (config.readout_excludes_dropped ? "true" : "false")
      << "\n";
  out << "strategy = " << config.strategy << "\n";
  out << "\n[model]\n";
  out << "num_layers = " << config.num_layers << "\n";
  out << "hidden_dim = " << config.hidden_dim << "\n";
  out << "activation = " << config.activation << "\n";
  out << "view_pool = " << config.view_pool << "\n";
  out << "node_readout = " << config.node_readout << "\n";
  out << "head_hidden_dims = " << join_ints(config.head_hidden_dims) << "\n";
  out << "precision = " << config.precision << "\n";
  out << "\n[train]\n";
  out << "epochs = " << config.epochs << "\n";
  out << "batch_size = " << config.batch_size << "\n";
  out << "learning_rate = " << format_double(config.learning_rate) << "\n";
  out << "weight_decay = " << format_double(config.weight_decay) << "\n";
  out << "optimizer = " << config.optimizer << "\n";
  out << "momentum = " << format_double(config.momentum) << "\n";
  out << "seed = " << config.seed << "\n";
  out << "eval_every = " << config.eval_every << "\n";
  out << "early_stop_patience = " << config.early_stop_patience << "\n";
  out << "\n[ablate]\n";
  out << "strategies = " << join_strings(config.ablate_strategies) << "\n";
  out << "seeds = " << join_seeds(config.ablate_seeds) << "\n";
  return out.str();
}

void validate(const RunConfig& config) {
  validate(config.synth);
  if (config.task != "multiclass" && config.task != "multilabel") {
    throw ValidationError("data: task must be multiclass or multilabel");
  }
  if (config.num_classes < 0) throw ValidationError("data: num_classes must be >= 0");
  if (config.precision != "float32" && config.precision != "float64") {
    throw ValidationError("model: precision must be float32 or float64");
  }
  parse_strategy(config.strategy);
  parse_activation(config.activation);
  parse_pool(config.view_pool);
  parse_readout(config.node_readout);
  parse_optimizer(config.optimizer);
  for (const std::string& name : config.ablate_strategies) parse_strategy(name);
  if (config.ablate_seeds.empty()) throw ValidationError("ablate: seeds must be non-empty");
  validate(resolve_plan(config).config);
  TrainConfig train = resolve_train_config(config);
  validate(train);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  const std::string trimmed = trim(text);
  if (trimmed.empty()) throw ValidationError("seed list is empty");
  const auto range = trimmed.find("..");
  if (range != std::string::npos) {
    const std::string lo_text = trim(trimmed.substr(0, range));
    const std::string hi_text = trim(trimmed.substr(range + 2));
    const std::uint64_t lo = parse_u64(lo_text, "seed list", 1);
    const std::uint64_t hi = parse_u64(hi_text, "seed list", 1);
    if (hi < lo) throw ValidationError("seed range '" + trimmed + "' is descending");
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split_commas(trimmed)) {
    seeds.push_back(parse_u64(item, "seed list", 1));
  }
  if (seeds.empty()) throw ValidationError("seed list is empty");
  return seeds;
}

SubgraphDataset resolve_dataset(const RunConfig& config,
                                const std::optional<std::string>& data_dir) {
  SubgraphDataset dataset = [&] {
    if (!data_dir) return synth_dataset(config.synth);
    const std::string graph_path = *data_dir + "/graph.edgelist";
    const std::string feature_path = *data_dir + "/node_features.txt";
    const std::string subgraph_path = *data_dir + "/subgraphs.jsonl";
    std::optional<std::string> features;
    if (fs::exists(feature_path)) features = feature_path;

    const TaskKind task =
        config.task == "multiclass" ? TaskKind::multiclass : TaskKind::multilabel;
    int num_classes = config.num_classes;
    if (num_classes == 0) {
      for (const auto& record : load_subgraph_records(subgraph_path)) {
        for (int c : record.label) num_classes = std::max(num_classes, c + 1);
      }
      num_classes = std::max(num_classes, 2);
    }
    return load_dataset(graph_path, features, subgraph_path, LabelSpec{task, num_classes});
  }();

  const bool any_assigned =
      std::any_of(dataset.split.begin(), dataset.split.end(),
                  [](Split s) { return s != Split::unassigned; });
  if (!any_assigned) {
    dataset = split_dataset(dataset, config.train_fraction, config.val_fraction,
                            config.test_fraction, config.split_seed);
  }
  return dataset;
}

ModelConfig resolve_model_config(const RunConfig& config, const SubgraphDataset& dataset) {
  ModelConfig model;
  model.num_layers = config.num_layers;
  model.input_dim = dataset.graph.features().cols;
  model.hidden_dim = config.hidden_dim;
  model.activation = parse_activation(config.activation);
  model.view_pool = parse_pool(config.view_pool);
  model.node_readout = parse_readout(config.node_readout);
  model.head_hidden_dims = config.head_hidden_dims;
  model.output_dim = dataset.label_spec.num_classes;
  validate(model);
  return model;
}

TrainConfig resolve_train_config(const RunConfig& config) {
  TrainConfig train;
  train.epochs = config.epochs;
  train.batch_size = config.batch_size;
  train.learning_rate = config.learning_rate;
  train.weight_decay = config.weight_decay;
  train.optimizer = parse_optimizer(config.optimizer);
  train.momentum = config.momentum;
  train.master_seed = config.seed;
  train.eval_every = config.eval_every;
  train.early_stop_patience = config.early_stop_patience;
  return train;
}

AugmentPlan resolve_plan(const RunConfig& config) {
  return strategy_plan(parse_strategy(config.strategy), config.num_views,
                       config.node_drop_rate, config.edge_drop_rate);
}

int cmd_synth(const RunConfig& config, const std::string& out_dir) {
  validate(config);
  SubgraphDataset dataset = synth_dataset(config.synth);
  ensure_dir(out_dir);
  save_dataset(out_dir, dataset);
  write_config_echo(out_dir, config);
  std::cout << "nodes=" << dataset.graph.num_nodes()
            << " edges=" << dataset.graph.edge_list().size()
            << " subgraphs=" << dataset.size()
            << " classes=" << dataset.label_spec.num_classes
            << " feature_dim=" << dataset.graph.features().cols << "\n";
  return 0;
}

namespace {

template <typename Real>
int run_train_seeds(const RunConfig& config, const SubgraphDataset& dataset,
                    const ModelConfig& model, const std::vector<std::uint64_t>& seeds,
                    const std::string& out_dir) {
  const AugmentPlan plan = resolve_plan(config);
  bool any_diverged = false;
  for (std::uint64_t seed : seeds) {
    TrainConfig train = resolve_train_config(config);
    train.master_seed = seed;
    const std::string metrics_path =
        out_dir + "/metrics_seed" + std::to_string(seed) + ".jsonl";
    std::ofstream metrics(metrics_path);
    if (!metrics) throw IoError("cannot open '" + metrics_path + "' for writing");
    auto stream_record = [&metrics, &metrics_path](const MetricsRecord& record) {
      metrics << metrics_json_line(record) << '\n';
      metrics.flush();
      if (!metrics) throw IoError("write to '" + metrics_path + "' failed");
    };
    FitResult<Real> result = fit<Real>(dataset, model, train, plan, stream_record);
    metrics.close();

    double train_f1 = 0.0;
    double val_f1 = 0.0;
    for (const auto& record : result.history) {
      if (record.split == "train") train_f1 = record.micro_f1;
      if (record.split == "val") val_f1 = record.micro_f1;
    }
    if (result.diverged) {
      any_diverged = true;
      std::cout << "seed=" << seed << " diverged: " << result.note << "\n";
      continue;
    }
    save_checkpoint<Real>(out_dir + "/checkpoint_seed" + std::to_string(seed) + ".bin",
                          result.params, model, seed, train.epochs);
    std::cout << "seed=" << seed << " train_f1=" << train_f1 << " val_f1=" << val_f1;
    if (!result.note.empty()) std::cout << " note=\"" << result.note << "\"";
    std::cout << "\n";
  }
  return any_diverged ? 2 : 0;
}

}  // namespace

int cmd_train(const RunConfig& config, const std::optional<std::string>& data_dir,
              const std::vector<std::uint64_t>& seeds, const std::string& out_dir) {
  validate(config);
  if (seeds.empty()) throw ValidationError("train: no seeds given");
  SubgraphDataset dataset = resolve_dataset(config, data_dir);
  ModelConfig model = resolve_model_config(config, dataset);
  ensure_dir(out_dir);
  write_config_echo(out_dir, config);
  return with_precision(config.precision, [&](auto real) {
    return run_train_seeds<decltype(real)>(config, dataset, model, seeds, out_dir);
  });
}

int cmd_eval(const RunConfig& config, const std::string& checkpoint_path,
             const std::optional<std::string>& data_dir, const std::string& split,
             const std::optional<std::string>& out_dir) {
  validate(config);
  const Split which = parse_split(split);
  if (which == Split::unassigned) throw ValidationError("eval: split must be train, val or test");
  CheckpointInfo info = peek_checkpoint(checkpoint_path);
  SubgraphDataset dataset = resolve_dataset(config, data_dir);
  const std::vector<int> indices = dataset.split_indices(which);
  if (indices.empty()) throw ValidationError("eval: split '" + split + "' is empty");

  MetricsRecord record = with_precision(to_string(info.dtype), [&](auto real) {
    using Real = decltype(real);
    Parameters<Real> params = load_checkpoint<Real>(checkpoint_path);
    return evaluate<Real>(dataset, indices, params, info.model, info.seed, split);
  });
  std::cout << metrics_json_line(record) << "\n";
  if (out_dir) {
    ensure_dir(*out_dir);
    save_metrics(*out_dir + "/metrics.jsonl", {record});
    write_config_echo(*out_dir, config);
  }
  return 0;
}

int cmd_ablate(const RunConfig& config, const std::optional<std::string>& data_dir,
               const std::string& out_dir) {
  validate(config);
  SubgraphDataset dataset = resolve_dataset(config, data_dir);
  ModelConfig model = resolve_model_config(config, dataset);
  TrainConfig train = resolve_train_config(config);
  std::vector<StrategyKind> strategies;
  for (const std::string& name : config.ablate_strategies) {
    strategies.push_back(parse_strategy(name));
  }

  AblationReport report = with_precision(config.precision, [&](auto real) {
    return ablation_table<decltype(real)>(dataset, strategies, model, train, config.num_views,
                                          config.node_drop_rate, config.edge_drop_rate,
                                          config.ablate_seeds);
  });
  ensure_dir(out_dir);
  write_text_file(out_dir + "/ablation.txt", report.to_text());
  write_text_file(out_dir + "/ablation.csv", report.to_csv());
  write_config_echo(out_dir, config);
  std::cout << report.to_text();
  return 0;
}

namespace {

struct GradcheckCase {
  std::string description;
  SubgraphDataset dataset;
  ModelConfig model;
  AugmentPlan plan;
  std::uint64_t seed = 0;
};

GradcheckCase build_gradcheck_case(int index) {
  const std::uint64_t case_seed = 1000 + static_cast<std::uint64_t>(index);
  rng::Stream gen(rng::fold(case_seed, rng::kDomainSbm));

  const int n = 6 + static_cast<int>(gen.next_below(5));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (gen.bernoulli(0.4)) edges.emplace_back(i, j);
    }
  }
  const int feature_dim = 2 + static_cast<int>(gen.next_below(2));
  MatrixD features(n, feature_dim);
  for (double& v : features.data) v = gen.next_unit() * 2.0 - 1.0;
  Graph graph = build_graph(n, edges, features);

  const TaskKind task = index % 2 == 0 ? TaskKind::multiclass : TaskKind::multilabel;
  const int num_classes = 2 + static_cast<int>(gen.next_below(2));
  LabelSpec spec{task, num_classes};

  const int num_subgraphs = 2 + static_cast<int>(gen.next_below(2));
  std::vector<Subgraph> subgraphs;
  std::vector<Label> labels;
  for (int s = 0; s < num_subgraphs; ++s) {
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[i] = i;
    rng::shuffle(ids, gen);
    const int size = 2 + static_cast<int>(gen.next_below(3));
    ids.resize(size);
    subgraphs.push_back(make_subgraph(std::move(ids)));
    if (task == TaskKind::multiclass) {
      labels.push_back({static_cast<int>(gen.next_below(num_classes))});
    } else {
      Label label;
      for (int c = 0; c < num_classes; ++c) {
        if (gen.bernoulli(0.5)) label.push_back(c);
      }
      labels.push_back(std::move(label));
    }
  }

  GradcheckCase check;
  check.seed = case_seed;
  check.dataset = make_dataset(std::move(graph), std::move(subgraphs), std::move(labels), spec);

  check.model.num_layers = (index / 6) % 3;  // 0, 1, 2
  check.model.input_dim = feature_dim;
  check.model.hidden_dim = 3;
  check.model.activation = Activation::tanh;  // smooth, so finite differences are valid
  check.model.view_pool = static_cast<PoolKind>((index / 2) % 3);
  check.model.node_readout = index % 4 < 2 ? ReadoutKind::mean : ReadoutKind::sum;
  if (index % 5 == 0) check.model.head_hidden_dims = {4};
  check.model.output_dim = num_classes;

  check.plan.config.num_views = index % 3;
  check.plan.config.node_drop_rate = index % 2 == 0 ? 0.3 : 0.0;
  check.plan.config.edge_drop_rate = index % 3 == 0 ? 0.0 : 0.4;
  check.plan.config.mask_cross_edges = index % 4 == 1;
  check.plan.config.readout_excludes_dropped = index % 6 != 5;
  check.plan.mode = BatchMode::multi_view;
  if (index == 20) {
    check.plan.mode = BatchMode::inplace_whole_graph;
    check.plan.config.num_views = 0;
  } else if (index == 21) {
    check.plan.mode = BatchMode::inplace_subgraph;
    check.plan.config.num_views = 0;
    check.plan.config.node_drop_rate = 0.0;
    check.plan.config.edge_drop_rate = 0.4;
  }

  std::ostringstream desc;
  desc << "case " << (index < 10 ? "0" : "") << index
       << " task=" << (task == TaskKind::multiclass ? "multiclass" : "multilabel")
       << " L=" << check.model.num_layers << " pool=" << to_string(check.model.view_pool)
       << " readout=" << to_string(check.model.node_readout)
       << " k=" << check.plan.config.num_views;
  check.description = desc.str();
  return check;
}

}  // namespace

int cmd_gradcheck(const std::optional<std::string>& corrupt_param,
                  const std::optional<std::string>& out_dir) {
  constexpr int kNumCases = 24;
  constexpr double kStep = 1e-5;
  constexpr double kTolerance = 1e-4;

  std::ostringstream report;
  double worst_err = 0.0;
  std::string worst_param;
  std::string failure;
  bool corrupt_matched = false;

  for (int index = 0; index < kNumCases; ++index) {
    GradcheckCase check = build_gradcheck_case(index);
    const AugmentedBatch batch = assemble_batch(check.dataset.graph, check.dataset.subgraphs,
                                                check.plan, BatchKey{check.seed, 0, 0});
    Parameters<double> params = init_parameters<double>(check.model, check.seed);
    LossGrads<double> analytic = loss_and_gradients<double>(
        batch, check.dataset.labels, params, check.model, check.dataset.label_spec);

    auto grad_views = parameter_views(analytic.grads);
    if (corrupt_param) {
      for (auto& view : grad_views) {
        if (view.name == *corrupt_param && view.size > 0) {
          view.data[0] += 1.0;
          corrupt_matched = true;
        }
      }
    }

    auto param_views = parameter_views(params);
    double case_err = 0.0;
    std::string case_param;
    for (std::size_t a = 0; a < param_views.size(); ++a) {
      for (std::size_t i = 0; i < param_views[a].size; ++i) {
        double& p = param_views[a].data[i];
        const double saved = p;
        p = saved + kStep;
        const double loss_hi =
            loss_value(forward_logits(batch, params, check.model), check.dataset.labels,
                       check.dataset.label_spec);
        p = saved - kStep;
        const double loss_lo =
            loss_value(forward_logits(batch, params, check.model), check.dataset.labels,
                       check.dataset.label_spec);
        p = saved;
        const double fd = (loss_hi - loss_lo) / (2.0 * kStep);
        const double an = grad_views[a].data[i];
        const double err = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
        if (err > case_err) {
          case_err = err;
          case_param = param_views[a].name + "[" + std::to_string(i) + "]";
        }
      }
    }
    if (case_err > worst_err) {
      worst_err = case_err;
      worst_param = case_param;
    }
    const bool ok = case_err <= kTolerance;
    report << check.description << " arrays=" << param_views.size()
           << " max_rel_err=" << case_err << (ok ? " ok" : " FAIL at " + case_param) << "\n";
    if (!ok && failure.empty()) failure = case_param;
  }

  if (corrupt_param && !corrupt_matched) {
    throw ValidationError("gradcheck: no parameter named '" + *corrupt_param + "'");
  }
  if (failure.empty()) {
    report << "gradcheck PASS cases=" << kNumCases << " max_rel_err=" << worst_err << "\n";
  } else {
    report << "gradcheck FAIL offending_param=" << failure << " max_rel_err=" << worst_err
           << "\n";
  }
  std::cout << report.str();
  if (out_dir) {
    ensure_dir(*out_dir);
    write_text_file(*out_dir + "/gradcheck.txt", report.str());
  }
  return failure.empty() ? 0 : 1;
}

int cmd_augment(const RunConfig& config, const std::optional<std::string>& data_dir,
                const std::string& out_dir) {
  validate(config);
  SubgraphDataset dataset = resolve_dataset(config, data_dir);
  const AugmentPlan plan = resolve_plan(config);
  AugmentedBatch batch =
      assemble_batch(dataset.graph, dataset.subgraphs, plan, BatchKey{config.seed, 0, 0});

  ensure_dir(out_dir);
  save_edge_list(out_dir + "/augmented.edgelist", batch.edge_list());
  save_features(out_dir + "/augmented_features.txt", batch.features);
  save_clone_map(out_dir + "/clone_map.jsonl", batch);
  {
    std::ostringstream lines;
    for (std::size_t s = 0; s < batch.view_readout_sets.size(); ++s) {
      for (std::size_t v = 0; v < batch.view_readout_sets[s].size(); ++v) {
        nlohmann::json object;
        object["subgraph"] = s;
        object["view"] = v;
        object["nodes"] = batch.view_readout_sets[s][v];
        lines << object.dump() << "\n";
      }
    }
    write_text_file(out_dir + "/readout_sets.jsonl", lines.str());
  }
  {
    std::ostringstream lines;
    for (int u = 0; u < batch.total_nodes; ++u) {
      lines << static_cast<int>(batch.labeling[u]) << "\n";
    }
    write_text_file(out_dir + "/labeling.txt", lines.str());
  }
  write_config_echo(out_dir, config);
  std::cout << "base_nodes=" << batch.base_nodes << " total_nodes=" << batch.total_nodes
            << " clones=" << batch.clone_map.size()
            << " edges=" << batch.edge_list().size() << "\n";
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Subgraph representation learning with multi-view augmentation"};
  app.require_subcommand(1);
  app.footer("Config file keys and defaults (every key, overridable by flags):\n\n" +
             serialize_config(RunConfig{}));

  struct Options {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> seeds;
    std::optional<int> epochs;
    std::optional<int> views;
    std::optional<double> node_drop;
    std::optional<double> edge_drop;
    std::optional<std::string> strategy;
    std::optional<std::string> strategies;
    std::optional<std::string> data_dir;
    std::string out_dir;
    std::string checkpoint_path;
    std::string split = "test";
    std::optional<std::string> corrupt;
    std::optional<std::string> out_opt;
  } opt;

  auto add_config = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "Config file (sectioned key = value)");
  };
  auto add_augment_flags = [&opt](CLI::App* cmd) {
    cmd->add_option("--views", opt.views, "Augmented views per subgraph");
    cmd->add_option("--node-drop", opt.node_drop, "Node drop probability");
    cmd->add_option("--edge-drop", opt.edge_drop, "Edge drop probability");
    cmd->add_option("--strategy", opt.strategy,
                    "plain | drop_node | drop_edge | drop_edge_sub | multi_view");
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_config(synth);
  synth->add_option("--seed", opt.seed, "Generator seed");
  synth->add_option("--out", opt.out_dir, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train a model");
  add_config(train);
  train->add_option("--data", opt.data_dir, "Dataset directory (omit to synthesize)");
  train->add_option("--seed", opt.seed, "Master seed");
  train->add_option("--seeds", opt.seeds, "Seed list: N | a,b,c | lo..hi");
  train->add_option("--epochs", opt.epochs, "Training epochs");
  add_augment_flags(train);
  train->add_option("--out", opt.out_dir, "Output directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_config(eval);
  eval->add_option("--checkpoint", opt.checkpoint_path, "Checkpoint file")->required();
  eval->add_option("--data", opt.data_dir, "Dataset directory (omit to synthesize)");
  eval->add_option("--split", opt.split, "train | val | test");
  eval->add_option("--out", opt.out_opt, "Output directory (optional)");

  CLI::App* ablate = app.add_subcommand("ablate", "Run the strategy ablation");
  add_config(ablate);
  ablate->add_option("--data", opt.data_dir, "Dataset directory (omit to synthesize)");
  ablate->add_option("--seeds", opt.seeds, "Seed list: N | a,b,c | lo..hi");
  ablate->add_option("--epochs", opt.epochs, "Training epochs");
  ablate->add_option("--strategies", opt.strategies, "Comma-separated strategy list");
  add_augment_flags(ablate);
  ablate->add_option("--out", opt.out_dir, "Output directory")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("--corrupt", opt.corrupt,
                        "Test hook: corrupt this parameter's gradient");
  gradcheck->add_option("--out", opt.out_opt, "Output directory (optional)");

  CLI::App* augment = app.add_subcommand("augment", "Dump one augmented batch");
  add_config(augment);
  augment->add_option("--data", opt.data_dir, "Dataset directory (omit to synthesize)");
  augment->add_option("--seed", opt.seed, "Master seed");
  add_augment_flags(augment);
  augment->add_option("--out", opt.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig config;
    if (opt.config_path) config = load_config_file(*opt.config_path);
    if (opt.epochs) config.epochs = *opt.epochs;
    if (opt.views) config.num_views = *opt.views;
    if (opt.node_drop) config.node_drop_rate = *opt.node_drop;
    if (opt.edge_drop) config.edge_drop_rate = *opt.edge_drop;
    if (opt.strategy) config.strategy = *opt.strategy;
    if (opt.strategies) config.ablate_strategies = split_commas(*opt.strategies);

    if (synth->parsed()) {
      if (opt.seed) config.synth.seed = *opt.seed;
      return cmd_synth(config, opt.out_dir);
    }
    if (opt.seed) config.seed = *opt.seed;
    if (train->parsed()) {
      std::vector<std::uint64_t> seeds{config.seed};
      if (opt.seeds) seeds = parse_seed_list(*opt.seeds);
      return cmd_train(config, opt.data_dir, seeds, opt.out_dir);
    }
    if (eval->parsed()) {
      return cmd_eval(config, opt.checkpoint_path, opt.data_dir, opt.split, opt.out_opt);
    }
    if (ablate->parsed()) {
      if (opt.seeds) config.ablate_seeds = parse_seed_list(*opt.seeds);
      return cmd_ablate(config, opt.data_dir, opt.out_dir);
    }
    if (gradcheck->parsed()) {
      return cmd_gradcheck(opt.corrupt, opt.out_opt);
    }
    return cmd_augment(config, opt.data_dir, opt.out_dir);
  } catch (const DivergenceError& e) {
    std::cerr << "error (divergence): " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace subaug
