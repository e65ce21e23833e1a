#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/checkpoint.hpp"
#include "subaug/cli.hpp"
#include "subaug/data.hpp"
#include "subaug/graph.hpp"
#include "subaug/io.hpp"
#include "subaug/metrics.hpp"
#include "subaug/model.hpp"
#include "subaug/rng.hpp"
#include "subaug/train.hpp"

namespace py = pybind11;
using namespace subaug;

namespace {

py::array_t<double> matrix_to_numpy(const MatrixD& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), out.mutable_data());
  return out;
}

MatrixD numpy_to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw ValidationError("expected a 2-d array");
  MatrixD m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data.begin());
  return m;
}

std::vector<Subgraph> to_subgraphs(const std::vector<std::vector<int>>& node_lists) {
  std::vector<Subgraph> subgraphs;
  subgraphs.reserve(node_lists.size());
  for (const auto& nodes : node_lists) subgraphs.push_back(make_subgraph(nodes));
  return subgraphs;
}

py::dict record_to_dict(const MetricsRecord& record) {
  py::dict out;
  out["seed"] = record.seed;
  out["epoch"] = record.epoch;
  out["split"] = record.split;
  out["loss"] = record.loss;
  out["micro_f1"] = record.micro_f1;
  return out;
}

/// Trained model handle: double-precision parameters plus their config.
struct TrainedModel {
  ModelConfig config;
  Parameters<double> params;
  std::uint64_t seed = 0;
  int epoch = 0;
};

BatchMode parse_mode(const std::string& name) {
  if (name == "multi_view") return BatchMode::multi_view;
  if (name == "inplace_whole_graph") return BatchMode::inplace_whole_graph;
  if (name == "inplace_subgraph") return BatchMode::inplace_subgraph;
  throw ValidationError("unknown batch mode '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Subgraph representation learning with multi-view augmentation";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Graph>(m, "Graph")
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def("neighbors",
           [](const Graph& g, int u) {
             auto span = g.neighbors(u);
             return std::vector<int>(span.begin(), span.end());
           })
      .def("degree", &Graph::degree)
      .def("has_edge", &Graph::has_edge)
      .def("edge_list", &Graph::edge_list)
      .def_property_readonly("features",
                             [](const Graph& g) { return matrix_to_numpy(g.features()); });

  m.def(
      "build_graph",
      [](int num_nodes, const std::vector<std::pair<int, int>>& edges,
         const std::optional<py::array_t<double, py::array::c_style | py::array::forcecast>>&
             features) {
        std::optional<MatrixD> matrix;
        if (features) matrix = numpy_to_matrix(*features);
        return build_graph(num_nodes, edges, matrix);
      },
      py::arg("num_nodes"), py::arg("edges"), py::arg("features") = py::none());

  m.def("induced_adjacency", [](const Graph& g, const std::vector<int>& nodes) {
    return matrix_to_numpy(induced_adjacency(g, make_subgraph(nodes)));
  });
  m.def("subgraph_features", [](const Graph& g, const std::vector<int>& nodes) {
    return matrix_to_numpy(subgraph_features(g, make_subgraph(nodes)));
  });

  py::class_<AugmentConfig>(m, "AugmentConfig")
      .def(py::init<>())
      .def_readwrite("num_views", &AugmentConfig::num_views)
      .def_readwrite("node_drop_rate", &AugmentConfig::node_drop_rate)
      .def_readwrite("edge_drop_rate", &AugmentConfig::edge_drop_rate)
      .def_readwrite("mask_cross_edges", &AugmentConfig::mask_cross_edges)
      .def_readwrite("readout_excludes_dropped", &AugmentConfig::readout_excludes_dropped);

  py::class_<AugmentedBatch>(m, "AugmentedBatch")
      .def_readonly("base_nodes", &AugmentedBatch::base_nodes)
      .def_readonly("total_nodes", &AugmentedBatch::total_nodes)
      .def_property_readonly("features",
                             [](const AugmentedBatch& b) { return matrix_to_numpy(b.features); })
      .def_property_readonly("labeling",
                             [](const AugmentedBatch& b) {
                               return std::vector<int>(b.labeling.begin(), b.labeling.end());
                             })
      .def("edge_list", &AugmentedBatch::edge_list)
      .def("neighbors",
           [](const AugmentedBatch& b, int u) {
             auto span = b.node_neighbors(u);
             return std::vector<int>(span.begin(), span.end());
           })
      .def_property_readonly("view_readout_sets",
                             [](const AugmentedBatch& b) { return b.view_readout_sets; })
      .def_property_readonly("clone_map", [](const AugmentedBatch& b) {
        std::vector<std::tuple<int, int, int, int>> out;
        for (std::size_t i = 0; i < b.clone_map.size(); ++i) {
          out.emplace_back(b.base_nodes + static_cast<int>(i), b.clone_map[i].subgraph,
                           b.clone_map[i].view, b.clone_map[i].original);
        }
        return out;
      });

  m.def(
      "assemble_batch",
      [](const Graph& graph, const std::vector<std::vector<int>>& subgraphs,
         const AugmentConfig& config, const std::string& mode, std::uint64_t master_seed,
         std::uint64_t epoch, std::uint64_t batch_index) {
        const AugmentPlan plan{config, parse_mode(mode)};
        return assemble_batch(graph, to_subgraphs(subgraphs), plan,
                              BatchKey{master_seed, epoch, batch_index});
      },
      py::arg("graph"), py::arg("subgraphs"), py::arg("config"), py::arg("mode") = "multi_view",
      py::arg("master_seed") = 0, py::arg("epoch") = 0, py::arg("batch_index") = 0);

  m.def(
      "apply_masks",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& adjacency,
         const std::vector<bool>& node_dropped, const std::vector<bool>& edge_dropped) {
        ViewMasks masks;
        masks.node_dropped.assign(node_dropped.begin(), node_dropped.end());
        masks.edge_dropped.assign(edge_dropped.begin(), edge_dropped.end());
        return matrix_to_numpy(apply_masks(numpy_to_matrix(adjacency), masks));
      },
      py::arg("adjacency"), py::arg("node_dropped"), py::arg("edge_dropped"));

  m.def("mix64", &rng::mix64);
  m.def("fold", &rng::fold);
  m.def("mask_stream_key",
        [](std::uint64_t master_seed, std::uint64_t epoch, std::uint64_t batch,
           std::uint64_t subgraph, std::uint64_t view) {
          return rng::mask_stream(master_seed, epoch, batch, subgraph, view).key();
        });

  py::class_<LabelSpec>(m, "LabelSpec")
      .def(py::init([](const std::string& task, int num_classes) {
             const TaskKind kind =
                 task == "multiclass" ? TaskKind::multiclass : TaskKind::multilabel;
             if (task != "multiclass" && task != "multilabel") {
               throw ValidationError("task must be multiclass or multilabel");
             }
             return LabelSpec{kind, num_classes};
           }),
           py::arg("task"), py::arg("num_classes"))
      .def_property_readonly(
          "task",
          [](const LabelSpec& spec) {
            return spec.task_kind == TaskKind::multiclass ? "multiclass" : "multilabel";
          })
      .def_readonly("num_classes", &LabelSpec::num_classes);

  py::class_<SubgraphDataset>(m, "SubgraphDataset")
      .def_property_readonly("graph", [](const SubgraphDataset& d) { return d.graph; })
      .def_property_readonly("size", &SubgraphDataset::size)
      .def_property_readonly("subgraphs",
                             [](const SubgraphDataset& d) {
                               std::vector<std::vector<int>> out;
                               for (const auto& s : d.subgraphs) out.push_back(s.node_ids);
                               return out;
                             })
      .def_property_readonly("labels", [](const SubgraphDataset& d) { return d.labels; })
      .def_property_readonly("label_spec",
                             [](const SubgraphDataset& d) { return d.label_spec; })
      .def_property_readonly("splits", [](const SubgraphDataset& d) {
        std::vector<std::string> out;
        for (Split s : d.split) out.push_back(split_name(s));
        return out;
      });

  m.def(
      "make_dataset",
      [](const Graph& graph, const std::vector<std::vector<int>>& subgraphs,
         const std::vector<Label>& labels, const LabelSpec& spec,
         const std::vector<std::string>& splits) {
        std::vector<Split> parsed;
        for (const auto& name : splits) parsed.push_back(parse_split(name));
        return make_dataset(graph, to_subgraphs(subgraphs), labels, spec, std::move(parsed));
      },
      py::arg("graph"), py::arg("subgraphs"), py::arg("labels"), py::arg("label_spec"),
      py::arg("splits") = std::vector<std::string>{});

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("num_blocks", &SynthConfig::num_blocks)
      .def_readwrite("nodes_per_block", &SynthConfig::nodes_per_block)
      .def_readwrite("intra_block_edge_prob", &SynthConfig::intra_block_edge_prob)
      .def_readwrite("inter_block_edge_prob", &SynthConfig::inter_block_edge_prob)
      .def_readwrite("num_subgraphs", &SynthConfig::num_subgraphs)
      .def_readwrite("subgraph_size", &SynthConfig::subgraph_size)
      .def_readwrite("seed", &SynthConfig::seed);

  m.def("synth_dataset", &synth_dataset);
  m.def("split_dataset", &split_dataset, py::arg("dataset"), py::arg("train_fraction"),
        py::arg("val_fraction"), py::arg("test_fraction"), py::arg("seed"));
  m.def("load_dataset", &load_dataset, py::arg("graph_path"), py::arg("feature_path"),
        py::arg("subgraph_path"), py::arg("label_spec"));
  m.def("save_dataset", &save_dataset, py::arg("dir"), py::arg("dataset"));

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("num_layers", &ModelConfig::num_layers)
      .def_readwrite("input_dim", &ModelConfig::input_dim)
      .def_readwrite("hidden_dim", &ModelConfig::hidden_dim)
      .def_readwrite("head_hidden_dims", &ModelConfig::head_hidden_dims)
      .def_readwrite("output_dim", &ModelConfig::output_dim)
      .def_property(
          "activation",
          [](const ModelConfig& c) { return to_string(c.activation); },
          [](ModelConfig& c, const std::string& v) { c.activation = parse_activation(v); })
      .def_property(
          "view_pool", [](const ModelConfig& c) { return to_string(c.view_pool); },
          [](ModelConfig& c, const std::string& v) { c.view_pool = parse_pool(v); })
      .def_property(
          "node_readout", [](const ModelConfig& c) { return to_string(c.node_readout); },
          [](ModelConfig& c, const std::string& v) { c.node_readout = parse_readout(v); });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("momentum", &TrainConfig::momentum)
      .def_readwrite("master_seed", &TrainConfig::master_seed)
      .def_readwrite("eval_every", &TrainConfig::eval_every)
      .def_readwrite("early_stop_patience", &TrainConfig::early_stop_patience)
      .def_property(
          "optimizer", [](const TrainConfig& c) { return to_string(c.optimizer); },
          [](TrainConfig& c, const std::string& v) { c.optimizer = parse_optimizer(v); });

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("seed", [](const TrainedModel& t) { return t.seed; })
      .def_property_readonly("epoch", [](const TrainedModel& t) { return t.epoch; })
      .def(
          "evaluate",
          [](const TrainedModel& model, const SubgraphDataset& dataset,
             const std::string& split) {
            const std::vector<int> indices = dataset.split_indices(parse_split(split));
            if (indices.empty()) throw ValidationError("split '" + split + "' is empty");
            return record_to_dict(
                evaluate<double>(dataset, indices, model.params, model.config, model.seed,
                                 split));
          },
          py::arg("dataset"), py::arg("split"))
      .def("save", [](const TrainedModel& model, const std::string& path) {
        save_checkpoint<double>(path, model.params, model.config, model.seed, model.epoch);
      });

  m.def("load_model", [](const std::string& path) {
    TrainedModel model;
    CheckpointInfo info;
    model.params = load_checkpoint<double>(path, &info);
    model.config = info.model;
    model.seed = info.seed;
    model.epoch = info.epoch;
    return model;
  });

  m.def(
      "fit",
      [](const SubgraphDataset& dataset, const ModelConfig& model_config,
         const TrainConfig& train_config, const AugmentConfig& augment_config,
         const std::string& mode) {
        const AugmentPlan plan{augment_config, parse_mode(mode)};
        FitResult<double> result = fit<double>(dataset, model_config, train_config, plan);
        TrainedModel model;
        model.config = model_config;
        model.params = std::move(result.params);
        model.seed = train_config.master_seed;
        model.epoch = train_config.epochs;
        py::list history;
        for (const auto& record : result.history) history.append(record_to_dict(record));
        py::dict out;
        out["model"] = py::cast(std::move(model));
        out["history"] = history;
        out["diverged"] = result.diverged;
        out["note"] = result.note;
        return out;
      },
      py::arg("dataset"), py::arg("model_config"), py::arg("train_config"),
      py::arg("augment_config") = AugmentConfig{}, py::arg("mode") = "multi_view");

  m.def(
      "micro_f1",
      [](const std::vector<Label>& predictions, const std::vector<Label>& truth,
         const LabelSpec& spec) { return micro_f1(predictions, truth, spec); },
      py::arg("predictions"), py::arg("truth"), py::arg("label_spec"));
}
