#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/common.hpp"
#include "subaug/graph.hpp"
#include "subaug/rng.hpp"

namespace subaug {

enum class Activation { relu, tanh };
enum class PoolKind { mean, sum, max };
enum class ReadoutKind { mean, sum };

Activation parse_activation(const std::string& name);
PoolKind parse_pool(const std::string& name);
ReadoutKind parse_readout(const std::string& name);
std::string to_string(Activation a);
std::string to_string(PoolKind p);
std::string to_string(ReadoutKind r);

struct ModelConfig {
  int num_layers = 2;
  int input_dim = 1;
  int hidden_dim = 32;
  Activation activation = Activation::relu;
  PoolKind view_pool = PoolKind::mean;
  ReadoutKind node_readout = ReadoutKind::mean;
  std::vector<int> head_hidden_dims;
  int output_dim = 2;
};

void validate(const ModelConfig& config);

/// Dimension of node/view embeddings: hidden_dim after at least one layer,
/// the raw feature dim otherwise.
inline int embedding_dim(const ModelConfig& config) {
  return config.num_layers > 0 ? config.hidden_dim : config.input_dim;
}

template <typename Real>
struct Dense {
  Matrix<Real> weight;  // out x in
  std::vector<Real> bias;
};

/// One message-passing layer. Index 0/1 selects the weight set by the node's
/// membership label, which is how subgraph membership conditions the encoder.
template <typename Real>
struct LayerParams {
  std::array<Matrix<Real>, 2> self_weight;      // out x in
  std::array<Matrix<Real>, 2> neighbor_weight;  // out x in
  std::array<std::vector<Real>, 2> bias;        // out
};

template <typename Real>
struct Parameters {
  std::vector<LayerParams<Real>> layers;
  std::vector<Dense<Real>> head;  // hidden layers then the final linear map
};

/// Flat named view over every parameter array, in the canonical order
/// layers.{l}.{self_w0,nbr_w0,bias0,self_w1,nbr_w1,bias1} then
/// head.{t}.{weight,bias}. Initialization draws, optimizer state, checkpoints
/// and gradient checks all follow this order.
template <typename Real>
struct ArrayView {
  std::string name;
  Real* data;
  std::size_t size;
};

template <typename Real>
std::vector<ArrayView<Real>> parameter_views(Parameters<Real>& params) {
  std::vector<ArrayView<Real>> views;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    for (int lab = 0; lab < 2; ++lab) {
      const std::string tag = std::to_string(lab);
      views.push_back({prefix + "self_w" + tag, layer.self_weight[lab].data.data(),
                       layer.self_weight[lab].data.size()});
      views.push_back({prefix + "nbr_w" + tag, layer.neighbor_weight[lab].data.data(),
                       layer.neighbor_weight[lab].data.size()});
      views.push_back({prefix + "bias" + tag, layer.bias[lab].data(), layer.bias[lab].size()});
    }
  }
  for (std::size_t t = 0; t < params.head.size(); ++t) {
    const std::string prefix = "head." + std::to_string(t) + ".";
    views.push_back({prefix + "weight", params.head[t].weight.data.data(),
                     params.head[t].weight.data.size()});
    views.push_back({prefix + "bias", params.head[t].bias.data(), params.head[t].bias.size()});
  }
  return views;
}

/// Layer in/out dims for layer l.
inline std::pair<int, int> layer_dims(const ModelConfig& config, int l) {
  return {l == 0 ? config.input_dim : config.hidden_dim, config.hidden_dim};
}

/// Head in/out dims for head layer t (hidden layers then the final map).
std::vector<std::pair<int, int>> head_dims(const ModelConfig& config);

template <typename Real>
Parameters<Real> zero_parameters(const ModelConfig& config) {
  Parameters<Real> params;
  params.layers.resize(config.num_layers);
  for (int l = 0; l < config.num_layers; ++l) {
    auto [in, out] = layer_dims(config, l);
    for (int lab = 0; lab < 2; ++lab) {
      params.layers[l].self_weight[lab] = Matrix<Real>(out, in);
      params.layers[l].neighbor_weight[lab] = Matrix<Real>(out, in);
      params.layers[l].bias[lab].assign(out, Real(0));
    }
  }
  for (auto [in, out] : head_dims(config)) {
    Dense<Real> dense;
    dense.weight = Matrix<Real>(out, in);
    dense.bias.assign(out, Real(0));
    params.head.push_back(std::move(dense));
  }
  return params;
}

/// Uniform init in [-s, s] with s = sqrt(6 / (fan_in + fan_out)) per array
/// (biases use their layer's bound). Draws come from the INIT stream of the
/// master seed, filling arrays in canonical view order, elementwise.
template <typename Real>
Parameters<Real> init_parameters(const ModelConfig& config, std::uint64_t master_seed) {
  validate(config);
  Parameters<Real> params = zero_parameters<Real>(config);
  rng::Stream stream(rng::fold(master_seed, rng::kDomainInit));

  auto fill = [&stream](Real* data, std::size_t size, int fan_in, int fan_out) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < size; ++i) {
      data[i] = static_cast<Real>((stream.next_unit() * 2.0 - 1.0) * s);
    }
  };
  for (int l = 0; l < config.num_layers; ++l) {
    auto [in, out] = layer_dims(config, l);
    auto& layer = params.layers[l];
    for (int lab = 0; lab < 2; ++lab) {
      fill(layer.self_weight[lab].data.data(), layer.self_weight[lab].data.size(), in, out);
      fill(layer.neighbor_weight[lab].data.data(), layer.neighbor_weight[lab].data.size(), in,
           out);
      fill(layer.bias[lab].data(), layer.bias[lab].size(), in, out);
    }
  }
  const auto dims = head_dims(config);
  for (std::size_t t = 0; t < dims.size(); ++t) {
    auto [in, out] = dims[t];
    fill(params.head[t].weight.data.data(), params.head[t].weight.data.size(), in, out);
    fill(params.head[t].bias.data(), params.head[t].bias.size(), in, out);
  }
  return params;
}

/// Throws unless every array has the shape the config implies and all entries
/// are finite.
template <typename Real>
void validate_parameters(const Parameters<Real>& params, const ModelConfig& config) {
  validate(config);
  if (static_cast<int>(params.layers.size()) != config.num_layers) {
    throw ValidationError("parameters: layer count mismatch");
  }
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("parameters: bad shape for " + what);
  };
  for (int l = 0; l < config.num_layers; ++l) {
    auto [in, out] = layer_dims(config, l);
    const auto& layer = params.layers[l];
    for (int lab = 0; lab < 2; ++lab) {
      check(layer.self_weight[lab].rows == out && layer.self_weight[lab].cols == in,
            "layer self weight");
      check(layer.neighbor_weight[lab].rows == out && layer.neighbor_weight[lab].cols == in,
            "layer neighbor weight");
      check(static_cast<int>(layer.bias[lab].size()) == out, "layer bias");
    }
  }
  const auto dims = head_dims(config);
  check(params.head.size() == dims.size(), "head depth");
  for (std::size_t t = 0; t < dims.size(); ++t) {
    check(params.head[t].weight.rows == dims[t].second &&
              params.head[t].weight.cols == dims[t].first,
          "head weight " + std::to_string(t));
    check(static_cast<int>(params.head[t].bias.size()) == dims[t].second,
          "head bias " + std::to_string(t));
  }
  auto& mutable_params = const_cast<Parameters<Real>&>(params);
  for (const auto& view : parameter_views(mutable_params)) {
    for (std::size_t i = 0; i < view.size; ++i) {
      if (!std::isfinite(static_cast<double>(view.data[i]))) {
        throw ValidationError("parameters: non-finite entry in " + view.name);
      }
    }
  }
}

template <typename Real>
Real activate(Real z, Activation act) {
  if (act == Activation::relu) return z > Real(0) ? z : Real(0);
  return std::tanh(z);
}

/// Derivative expressed through the post-activation value.
template <typename Real>
Real activate_grad_from_output(Real h, Activation act) {
  if (act == Activation::relu) return h > Real(0) ? Real(1) : Real(0);
  return Real(1) - h * h;
}

/// Everything the backward pass needs from one forward evaluation.
template <typename Real>
struct ForwardTrace {
  std::vector<Matrix<Real>> node_states;     // H_0 .. H_L
  std::vector<Matrix<Real>> neighbor_means;  // M_0 .. M_{L-1}
  std::vector<std::vector<std::vector<Real>>> view_embeddings;  // [subgraph][view]
  Matrix<Real> pooled;                       // one row per batch subgraph
  std::vector<std::vector<int>> max_winner;  // max pool: winning view per dim
  std::vector<Matrix<Real>> head_inputs;     // input to each head layer
  Matrix<Real> logits;
};

template <typename Real>
std::vector<Real> readout(const Matrix<Real>& node_embeddings, std::span<const int> readout_set,
                          ReadoutKind kind) {
  std::vector<Real> out(node_embeddings.cols, Real(0));
  if (readout_set.empty()) return out;  // fully-dropped view, zero fallback
  for (int id : readout_set) {
    auto row = node_embeddings.row(id);
    for (int d = 0; d < node_embeddings.cols; ++d) out[d] += row[d];
  }
  if (kind == ReadoutKind::mean) {
    const Real inv = Real(1) / static_cast<Real>(readout_set.size());
    for (Real& v : out) v *= inv;
  }
  return out;
}

template <typename Real>
std::vector<Real> pool_views(const std::vector<std::vector<Real>>& views, PoolKind kind,
                             std::vector<int>* winner = nullptr) {
  if (views.empty()) throw ValidationError("pool_views: no views");
  const std::size_t dim = views[0].size();
  std::vector<Real> out = views[0];
  if (winner) winner->assign(dim, 0);
  for (std::size_t v = 1; v < views.size(); ++v) {
    if (views[v].size() != dim) throw ValidationError("pool_views: inconsistent view dims");
    for (std::size_t d = 0; d < dim; ++d) {
      if (kind == PoolKind::max) {
        if (views[v][d] > out[d]) {
          out[d] = views[v][d];
          if (winner) (*winner)[d] = static_cast<int>(v);
        }
      } else {
        out[d] += views[v][d];
      }
    }
  }
  if (kind == PoolKind::mean) {
    const Real inv = Real(1) / static_cast<Real>(views.size());
    for (Real& v : out) v *= inv;
  }
  return out;
}

/// MLP head on a single pooled embedding; returns unnormalized logits.
template <typename Real>
std::vector<Real> predict(std::span<const Real> pooled, const Parameters<Real>& params,
                          const ModelConfig& config) {
  std::vector<Real> act(pooled.begin(), pooled.end());
  for (std::size_t t = 0; t < params.head.size(); ++t) {
    const auto& dense = params.head[t];
    if (static_cast<int>(act.size()) != dense.weight.cols) {
      throw ValidationError("predict: input dim mismatch at head layer " + std::to_string(t));
    }
    std::vector<Real> next(dense.weight.rows);
    for (int o = 0; o < dense.weight.rows; ++o) {
      Real z = dense.bias[o];
      auto w = dense.weight.row(o);
      for (int i = 0; i < dense.weight.cols; ++i) z += w[i] * act[i];
      next[o] = z;
    }
    if (t + 1 < params.head.size()) {
      for (Real& z : next) z = activate(z, config.activation);
    }
    act = std::move(next);
  }
  return act;
}

template <typename Real>
ForwardTrace<Real> forward_trace(const AugmentedBatch& batch, const Parameters<Real>& params,
                                 const ModelConfig& config) {
  if (batch.features.cols != config.input_dim) {
    throw ValidationError("encode: feature dim " + std::to_string(batch.features.cols) +
                          " != config input dim " + std::to_string(config.input_dim));
  }
  const int n = batch.total_nodes;
  ForwardTrace<Real> trace;
  trace.node_states.reserve(config.num_layers + 1);

  Matrix<Real> h(n, config.input_dim);
  for (std::size_t i = 0; i < batch.features.data.size(); ++i) {
    h.data[i] = static_cast<Real>(batch.features.data[i]);
  }
  trace.node_states.push_back(std::move(h));

  for (int l = 0; l < config.num_layers; ++l) {
    const auto& layer = params.layers[l];
    const Matrix<Real>& prev = trace.node_states.back();
    const int in = prev.cols;
    const int out = config.hidden_dim;

    Matrix<Real> means(n, in);
    for (int u = 0; u < n; ++u) {
      auto nbrs = batch.node_neighbors(u);
      if (nbrs.empty()) continue;  // isolated nodes keep a zero aggregate
      auto mrow = means.row(u);
      for (int v : nbrs) {
        auto prow = prev.row(v);
        for (int d = 0; d < in; ++d) mrow[d] += prow[d];
      }
      const Real inv = Real(1) / static_cast<Real>(nbrs.size());
      for (int d = 0; d < in; ++d) mrow[d] *= inv;
    }

    Matrix<Real> next(n, out);
    for (int u = 0; u < n; ++u) {
      const int lab = batch.labeling[u];
      const auto& sw = layer.self_weight[lab];
      const auto& nw = layer.neighbor_weight[lab];
      const auto& b = layer.bias[lab];
      auto xrow = prev.row(u);
      auto mrow = means.row(u);
      auto orow = next.row(u);
      for (int o = 0; o < out; ++o) {
        Real z = b[o];
        auto swr = sw.row(o);
        auto nwr = nw.row(o);
        for (int d = 0; d < in; ++d) z += swr[d] * xrow[d] + nwr[d] * mrow[d];
        orow[o] = activate(z, config.activation);
      }
    }
    trace.neighbor_means.push_back(std::move(means));
    trace.node_states.push_back(std::move(next));
  }

  const Matrix<Real>& final_states = trace.node_states.back();
  const int num_subgraphs = static_cast<int>(batch.view_readout_sets.size());
  const int emb = embedding_dim(config);

  trace.view_embeddings.resize(num_subgraphs);
  trace.pooled = Matrix<Real>(num_subgraphs, emb);
  trace.max_winner.resize(num_subgraphs);
  for (int s = 0; s < num_subgraphs; ++s) {
    const auto& sets = batch.view_readout_sets[s];
    auto& views = trace.view_embeddings[s];
    views.reserve(sets.size());
    for (const auto& set : sets) {
      views.push_back(readout(final_states, set, config.node_readout));
    }
    std::vector<Real> pooled = pool_views(views, config.view_pool, &trace.max_winner[s]);
    std::copy(pooled.begin(), pooled.end(), trace.pooled.row(s).begin());
  }

  // Head, batched over subgraphs.
  Matrix<Real> act = trace.pooled;
  for (std::size_t t = 0; t < params.head.size(); ++t) {
    const auto& dense = params.head[t];
    trace.head_inputs.push_back(act);
    Matrix<Real> next(act.rows, dense.weight.rows);
    for (int s = 0; s < act.rows; ++s) {
      auto arow = act.row(s);
      auto orow = next.row(s);
      for (int o = 0; o < dense.weight.rows; ++o) {
        Real z = dense.bias[o];
        auto w = dense.weight.row(o);
        for (int i = 0; i < dense.weight.cols; ++i) z += w[i] * arow[i];
        orow[o] = z;
      }
    }
    if (t + 1 < params.head.size()) {
      for (Real& z : next.data) z = activate(z, config.activation);
    }
    act = std::move(next);
  }
  trace.logits = std::move(act);

  for (Real v : trace.logits.data) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw DivergenceError("forward: non-finite logit");
    }
  }
  return trace;
}

/// Node embeddings after the message-passing stack (H_L; the features
/// themselves when num_layers == 0).
template <typename Real>
Matrix<Real> encode(const AugmentedBatch& batch, const Parameters<Real>& params,
                    const ModelConfig& config) {
  ForwardTrace<Real> trace = forward_trace(batch, params, config);
  return std::move(trace.node_states.back());
}

/// Logits for every batch subgraph, one row per subgraph in batch order.
template <typename Real>
Matrix<Real> forward_logits(const AugmentedBatch& batch, const Parameters<Real>& params,
                            const ModelConfig& config) {
  ForwardTrace<Real> trace = forward_trace(batch, params, config);
  return std::move(trace.logits);
}

}  // namespace subaug
