#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/common.hpp"
#include "subaug/graph.hpp"
#include "subaug/metrics.hpp"
#include "subaug/model.hpp"
#include "subaug/rng.hpp"

namespace subaug {

enum class OptimizerKind { adam, sgd_momentum };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind k);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 8;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double momentum = 0.9;  // sgd_momentum only
  std::uint64_t master_seed = 0;
  int eval_every = 1;           // validation cadence in epochs; 0 disables
  int early_stop_patience = 0;  // validation evals without improvement; 0 disables
};

void validate(const TrainConfig& config);

struct MetricsRecord {
  std::uint64_t seed = 0;
  int epoch = -1;  // -1 for standalone evaluation
  std::string split;
  double loss = 0.0;
  double micro_f1 = 0.0;
};

/// Mean loss over the batch rows: softmax cross-entropy for multiclass,
/// elementwise binary cross-entropy (averaged over rows and classes) for
/// multilabel. Throws DivergenceError if the result is non-finite.
template <typename Real>
Real loss_value(const Matrix<Real>& logits, std::span<const Label> labels,
                const LabelSpec& spec) {
  if (static_cast<std::size_t>(logits.rows) != labels.size()) {
    throw ValidationError("loss: logits rows != label count");
  }
  if (logits.cols != spec.num_classes) {
    throw ValidationError("loss: logits cols != num_classes");
  }
  if (logits.rows == 0) throw ValidationError("loss: empty batch");
  double total = 0.0;
  for (int s = 0; s < logits.rows; ++s) {
    auto row = logits.row(s);
    if (spec.task_kind == TaskKind::multiclass) {
      double m = -std::numeric_limits<double>::infinity();
      for (Real z : row) m = std::max(m, static_cast<double>(z));
      double sum_exp = 0.0;
      for (Real z : row) sum_exp += std::exp(static_cast<double>(z) - m);
      total += m + std::log(sum_exp) - static_cast<double>(row[labels[s][0]]);
    } else {
      double row_loss = 0.0;
      std::size_t next = 0;
      for (int c = 0; c < logits.cols; ++c) {
        const bool positive = next < labels[s].size() && labels[s][next] == c;
        if (positive) ++next;
        const double z = static_cast<double>(row[c]);
        row_loss += std::max(z, 0.0) - (positive ? z : 0.0) + std::log1p(std::exp(-std::abs(z)));
      }
      total += row_loss / static_cast<double>(logits.cols);
    }
  }
  const double mean = total / static_cast<double>(logits.rows);
  if (!std::isfinite(mean)) throw DivergenceError("loss: non-finite value");
  return static_cast<Real>(mean);
}

/// Gradient of the mean loss with respect to the logits.
template <typename Real>
Matrix<Real> loss_grad_logits(const Matrix<Real>& logits, std::span<const Label> labels,
                              const LabelSpec& spec) {
  Matrix<Real> grad(logits.rows, logits.cols);
  const double inv_rows = 1.0 / static_cast<double>(logits.rows);
  for (int s = 0; s < logits.rows; ++s) {
    auto row = logits.row(s);
    auto grow = grad.row(s);
    if (spec.task_kind == TaskKind::multiclass) {
      double m = -std::numeric_limits<double>::infinity();
      for (Real z : row) m = std::max(m, static_cast<double>(z));
      double sum_exp = 0.0;
      for (Real z : row) sum_exp += std::exp(static_cast<double>(z) - m);
      for (int c = 0; c < logits.cols; ++c) {
        grow[c] = static_cast<Real>(std::exp(static_cast<double>(row[c]) - m) / sum_exp *
                                    inv_rows);
      }
      grow[labels[s][0]] -= static_cast<Real>(inv_rows);
    } else {
      const double scale = inv_rows / static_cast<double>(logits.cols);
      std::size_t next = 0;
      for (int c = 0; c < logits.cols; ++c) {
        const bool positive = next < labels[s].size() && labels[s][next] == c;
        if (positive) ++next;
        const double z = static_cast<double>(row[c]);
        const double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z))
                                  : std::exp(z) / (1.0 + std::exp(z));
        grow[c] = static_cast<Real>((sig - (positive ? 1.0 : 0.0)) * scale);
      }
    }
  }
  return grad;
}

template <typename Real>
struct LossGrads {
  Real loss = Real(0);
  Matrix<Real> logits;
  Parameters<Real> grads;
};

/// Forward pass plus full reverse-mode gradients for every parameter array.
template <typename Real>
LossGrads<Real> loss_and_gradients(const AugmentedBatch& batch, std::span<const Label> labels,
                                   const Parameters<Real>& params, const ModelConfig& config,
                                   const LabelSpec& spec) {
  ForwardTrace<Real> trace = forward_trace(batch, params, config);
  LossGrads<Real> out;
  out.loss = loss_value(trace.logits, labels, spec);
  out.grads = zero_parameters<Real>(config);

  // Head backward.
  Matrix<Real> d_out = loss_grad_logits(trace.logits, labels, spec);
  for (int t = static_cast<int>(params.head.size()) - 1; t >= 0; --t) {
    const auto& dense = params.head[t];
    auto& g_dense = out.grads.head[t];
    const Matrix<Real>& input = trace.head_inputs[t];
    Matrix<Real> d_in(input.rows, input.cols);
    for (int s = 0; s < input.rows; ++s) {
      auto irow = input.row(s);
      auto drow = d_out.row(s);
      auto dirow = d_in.row(s);
      for (int o = 0; o < dense.weight.rows; ++o) {
        const Real dz = drow[o];
        if (dz == Real(0)) continue;
        g_dense.bias[o] += dz;
        auto w = dense.weight.row(o);
        auto gw = g_dense.weight.row(o);
        for (int i = 0; i < dense.weight.cols; ++i) {
          gw[i] += dz * irow[i];
          dirow[i] += dz * w[i];
        }
      }
    }
    if (t > 0) {  // undo the activation applied to this layer's input
      for (std::size_t i = 0; i < d_in.data.size(); ++i) {
        d_in.data[i] *= activate_grad_from_output(input.data[i], config.activation);
      }
    }
    d_out = std::move(d_in);
  }
  // d_out is now the gradient w.r.t. the pooled embeddings.

  const Matrix<Real>& final_states = trace.node_states.back();
  Matrix<Real> d_nodes(final_states.rows, final_states.cols);
  const int num_subgraphs = static_cast<int>(batch.view_readout_sets.size());
  for (int s = 0; s < num_subgraphs; ++s) {
    const auto& sets = batch.view_readout_sets[s];
    const int num_views = static_cast<int>(sets.size());
    auto drow = d_out.row(s);
    for (int v = 0; v < num_views; ++v) {
      const auto& set = sets[v];
      if (set.empty()) continue;
      for (int d = 0; d < d_out.cols; ++d) {
        Real dv;
        switch (config.view_pool) {
          case PoolKind::mean: dv = drow[d] / static_cast<Real>(num_views); break;
          case PoolKind::sum: dv = drow[d]; break;
          default: dv = trace.max_winner[s][d] == v ? drow[d] : Real(0); break;
        }
        if (dv == Real(0)) continue;
        if (config.node_readout == ReadoutKind::mean) {
          dv /= static_cast<Real>(set.size());
        }
        for (int u : set) d_nodes(u, d) += dv;
      }
    }
  }

  // Message-passing layers backward.
  for (int l = config.num_layers - 1; l >= 0; --l) {
    const auto& layer = params.layers[l];
    auto& g_layer = out.grads.layers[l];
    const Matrix<Real>& prev = trace.node_states[l];
    const Matrix<Real>& next = trace.node_states[l + 1];
    const Matrix<Real>& means = trace.neighbor_means[l];
    const int in = prev.cols;
    const int out_dim = next.cols;
    Matrix<Real> d_prev(prev.rows, prev.cols);
    std::vector<Real> dp(out_dim);
    std::vector<Real> scatter(in);
    for (int u = 0; u < batch.total_nodes; ++u) {
      bool any = false;
      auto dnrow = d_nodes.row(u);
      auto hrow = next.row(u);
      for (int o = 0; o < out_dim; ++o) {
        dp[o] = dnrow[o] * activate_grad_from_output(hrow[o], config.activation);
        any = any || dp[o] != Real(0);
      }
      if (!any) continue;
      const int lab = batch.labeling[u];
      const auto& sw = layer.self_weight[lab];
      const auto& nw = layer.neighbor_weight[lab];
      auto xrow = prev.row(u);
      auto mrow = means.row(u);
      auto dxrow = d_prev.row(u);
      std::fill(scatter.begin(), scatter.end(), Real(0));
      for (int o = 0; o < out_dim; ++o) {
        const Real dz = dp[o];
        if (dz == Real(0)) continue;
        g_layer.bias[lab][o] += dz;
        auto swr = sw.row(o);
        auto nwr = nw.row(o);
        auto gsw = g_layer.self_weight[lab].row(o);
        auto gnw = g_layer.neighbor_weight[lab].row(o);
        for (int i = 0; i < in; ++i) {
          gsw[i] += dz * xrow[i];
          gnw[i] += dz * mrow[i];
          dxrow[i] += dz * swr[i];
          scatter[i] += dz * nwr[i];
        }
      }
      auto nbrs = batch.node_neighbors(u);
      if (!nbrs.empty()) {
        const Real inv_deg = Real(1) / static_cast<Real>(nbrs.size());
        for (int i = 0; i < in; ++i) scatter[i] *= inv_deg;
        for (int j : nbrs) {
          auto djrow = d_prev.row(j);
          for (int i = 0; i < in; ++i) djrow[i] += scatter[i];
        }
      }
    }
    d_nodes = std::move(d_prev);
  }

  out.logits = std::move(trace.logits);
  return out;
}

/// Adam or SGD-with-momentum over the canonical parameter arrays. Moment
/// state is kept in double regardless of the parameter precision. Classic
/// coupled weight decay: the decay term is added to the gradient before the
/// moment updates.
template <typename Real>
class Optimizer {
 public:
  Optimizer(const TrainConfig& config, Parameters<Real>& params) : config_(config) {
    for (const auto& view : parameter_views(params)) {
      m_.emplace_back(view.size, 0.0);
      if (config.optimizer == OptimizerKind::adam) v_.emplace_back(view.size, 0.0);
    }
  }

  void step(Parameters<Real>& params, Parameters<Real>& grads) {
    ++steps_;
    auto pviews = parameter_views(params);
    auto gviews = parameter_views(grads);
    const double lr = config_.learning_rate;
    const double wd = config_.weight_decay;
    for (std::size_t a = 0; a < pviews.size(); ++a) {
      Real* p = pviews[a].data;
      const Real* g = gviews[a].data;
      for (std::size_t i = 0; i < pviews[a].size; ++i) {
        double grad = static_cast<double>(g[i]) + wd * static_cast<double>(p[i]);
        double delta;
        if (config_.optimizer == OptimizerKind::adam) {
          double& m = m_[a][i];
          double& v = v_[a][i];
          m = kBeta1 * m + (1.0 - kBeta1) * grad;
          v = kBeta2 * v + (1.0 - kBeta2) * grad * grad;
          const double m_hat = m / (1.0 - std::pow(kBeta1, steps_));
          const double v_hat = v / (1.0 - std::pow(kBeta2, steps_));
          delta = lr * m_hat / (std::sqrt(v_hat) + kEps);
        } else {
          double& buf = m_[a][i];
          buf = config_.momentum * buf + grad;
          delta = lr * buf;
        }
        if (lr != 0.0) p[i] = static_cast<Real>(static_cast<double>(p[i]) - delta);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  TrainConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long steps_ = 0;
};

template <typename Real>
struct FitResult {
  Parameters<Real> params;
  std::vector<MetricsRecord> history;
  bool diverged = false;
  std::string note;
};

/// Deterministic evaluation: no augmentation, one subgraph per batch so each
/// prediction is independent of which other subgraphs happen to share its
/// batch. Returns the mean loss and micro-F1 over `indices`; epoch is -1.
template <typename Real>
MetricsRecord evaluate(const SubgraphDataset& dataset, std::span<const int> indices,
                       const Parameters<Real>& params, const ModelConfig& model_config,
                       std::uint64_t seed, const std::string& split_name) {
  if (indices.empty()) throw ValidationError("evaluate: empty index set");
  const AugmentPlan plain{AugmentConfig{}, BatchMode::multi_view};
  double total_loss = 0.0;
  std::vector<Label> preds;
  std::vector<Label> truth;
  preds.reserve(indices.size());
  truth.reserve(indices.size());
  for (int idx : indices) {
    const std::vector<Subgraph> solo{dataset.subgraphs[idx]};
    AugmentedBatch batch = assemble_batch(dataset.graph, solo, plain, BatchKey{seed, 0, 0});
    ForwardTrace<Real> trace = forward_trace(batch, params, model_config);
    const std::vector<Label> label{dataset.labels[idx]};
    total_loss += static_cast<double>(loss_value(trace.logits, label, dataset.label_spec));
    preds.push_back(
        decide(trace.logits.row(0).data(), trace.logits.cols, dataset.label_spec));
    truth.push_back(dataset.labels[idx]);
  }
  MetricsRecord record;
  record.seed = seed;
  record.epoch = -1;
  record.split = split_name;
  record.loss = total_loss / static_cast<double>(indices.size());
  record.micro_f1 = micro_f1(preds, truth, dataset.label_spec);
  return record;
}

/// Full training loop. Each epoch shuffles the train indices with the epoch's
/// SHUFFLE stream, walks them in batch_size chunks, assembles the batch for
/// (seed, epoch, batch index) per the augmentation plan, and takes one
/// optimizer step. The train record of an epoch scores the predictions the
/// model made during those training forward passes. Divergence (non-finite
/// loss or logits) appends a diagnostic record and stops early with the
/// `diverged` flag set instead of throwing. `on_record` fires as each history
/// record is appended, letting callers stream metrics to disk per epoch.
template <typename Real>
FitResult<Real> fit(const SubgraphDataset& dataset, const ModelConfig& model_config,
                    const TrainConfig& train_config, const AugmentPlan& plan,
                    const std::function<void(const MetricsRecord&)>& on_record = {}) {
  validate(model_config);
  validate(train_config);
  validate(plan.config);
  if (model_config.input_dim != dataset.graph.features().cols) {
    throw ValidationError("fit: model input_dim != feature dim");
  }
  if (model_config.output_dim != dataset.label_spec.num_classes) {
    throw ValidationError("fit: model output_dim != num_classes");
  }
  const std::vector<int> train_idx = dataset.split_indices(Split::train);
  const std::vector<int> val_idx = dataset.split_indices(Split::val);
  if (train_idx.empty()) throw ValidationError("fit: no training subgraphs");

  FitResult<Real> result;
  result.params = init_parameters<Real>(model_config, train_config.master_seed);
  Optimizer<Real> optimizer(train_config, result.params);

  double best_val = -1.0;
  int since_best = 0;
  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    std::vector<int> order = train_idx;
    rng::Stream shuffle_stream(
        rng::fold(rng::fold(train_config.master_seed, rng::kDomainShuffle),
                  static_cast<std::uint64_t>(epoch)));
    rng::shuffle(order, shuffle_stream);

    double epoch_loss = 0.0;
    std::vector<Label> preds;
    std::vector<Label> truth;
    preds.reserve(order.size());
    truth.reserve(order.size());
    try {
      const int num_batches =
          (static_cast<int>(order.size()) + train_config.batch_size - 1) / train_config.batch_size;
      for (int b = 0; b < num_batches; ++b) {
        const int begin = b * train_config.batch_size;
        const int end = std::min<int>(begin + train_config.batch_size,
                                      static_cast<int>(order.size()));
        std::vector<Subgraph> batch_subgraphs;
        std::vector<Label> batch_labels;
        batch_subgraphs.reserve(end - begin);
        for (int i = begin; i < end; ++i) {
          batch_subgraphs.push_back(dataset.subgraphs[order[i]]);
          batch_labels.push_back(dataset.labels[order[i]]);
        }
        const BatchKey key{train_config.master_seed, static_cast<std::uint64_t>(epoch),
                           static_cast<std::uint64_t>(b)};
        AugmentedBatch batch = assemble_batch(dataset.graph, batch_subgraphs, plan, key);
        LossGrads<Real> lg =
            loss_and_gradients(batch, batch_labels, result.params, model_config,
                               dataset.label_spec);
        optimizer.step(result.params, lg.grads);
        epoch_loss += static_cast<double>(lg.loss) * static_cast<double>(end - begin);
        for (int i = begin; i < end; ++i) {
          preds.push_back(
              decide(lg.logits.row(i - begin).data(), lg.logits.cols, dataset.label_spec));
          truth.push_back(dataset.labels[order[i]]);
        }
      }
    } catch (const DivergenceError& e) {
      MetricsRecord diag;
      diag.seed = train_config.master_seed;
      diag.epoch = epoch;
      diag.split = "train";
      diag.loss = std::numeric_limits<double>::quiet_NaN();
      diag.micro_f1 = 0.0;
      result.history.push_back(diag);
      if (on_record) on_record(result.history.back());
      result.diverged = true;
      result.note = e.what();
      return result;
    }

    MetricsRecord train_record;
    train_record.seed = train_config.master_seed;
    train_record.epoch = epoch;
    train_record.split = "train";
    train_record.loss = epoch_loss / static_cast<double>(order.size());
    train_record.micro_f1 = micro_f1(preds, truth, dataset.label_spec);
    result.history.push_back(train_record);
    if (on_record) on_record(result.history.back());

    const bool eval_now = !val_idx.empty() && train_config.eval_every > 0 &&
                          (epoch + 1) % train_config.eval_every == 0;
    if (eval_now) {
      MetricsRecord val_record = evaluate(dataset, val_idx, result.params, model_config,
                                          train_config.master_seed, "val");
      val_record.epoch = epoch;
      result.history.push_back(val_record);
      if (on_record) on_record(result.history.back());
      if (train_config.early_stop_patience > 0) {
        if (val_record.micro_f1 > best_val) {
          best_val = val_record.micro_f1;
          since_best = 0;
        } else if (++since_best >= train_config.early_stop_patience) {
          result.note = "early stop at epoch " + std::to_string(epoch);
          break;
        }
      }
    }
  }

  auto views = parameter_views(result.params);
  for (const auto& view : views) {
    for (std::size_t i = 0; i < view.size; ++i) {
      if (!std::isfinite(static_cast<double>(view.data[i]))) {
        result.diverged = true;
        result.note = "non-finite parameter in " + view.name;
        return result;
      }
    }
  }
  return result;
}

}  // namespace subaug
