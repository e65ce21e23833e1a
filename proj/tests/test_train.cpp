#include "subaug/train.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "subaug/augment.hpp"
#include "subaug/graph.hpp"
#include "support.hpp"

namespace subaug {
namespace {

/// Two disjoint triangles with one-hot cluster features; subgraphs are the
/// triangles themselves, labeled by cluster. Linearly separable.
SubgraphDataset separable_dataset(int copies_per_cluster, Split split_value = Split::train) {
  MatrixD feats(6, 2);
  for (int u = 0; u < 6; ++u) feats(u, u < 3 ? 0 : 1) = 1.0;
  Graph g = build_graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}, feats);
  std::vector<Subgraph> subs;
  std::vector<Label> labels;
  std::vector<Split> split;
  for (int c = 0; c < copies_per_cluster; ++c) {
    subs.push_back(make_subgraph({0, 1, 2}));
    labels.push_back({0});
    split.push_back(split_value);
    subs.push_back(make_subgraph({3, 4, 5}));
    labels.push_back({1});
    split.push_back(split_value);
  }
  return make_dataset(std::move(g), std::move(subs), std::move(labels),
                      LabelSpec{TaskKind::multiclass, 2}, std::move(split));
}

ModelConfig small_model() {
  ModelConfig config;
  config.num_layers = 1;
  config.input_dim = 2;
  config.hidden_dim = 4;
  config.output_dim = 2;
  return config;
}

TEST(Train, OptimizerNamesParse) {
  EXPECT_EQ(parse_optimizer("adam"), OptimizerKind::adam);
  EXPECT_EQ(parse_optimizer("sgd_momentum"), OptimizerKind::sgd_momentum);
  EXPECT_EQ(to_string(OptimizerKind::adam), "adam");
  EXPECT_EQ(to_string(OptimizerKind::sgd_momentum), "sgd_momentum");
  EXPECT_THROW(parse_optimizer("rmsprop"), ValidationError);
}

TEST(Train, ConfigValidation) {
  TrainConfig config;
  validate(config);
  config.epochs = -1;
  EXPECT_THROW(validate(config), ValidationError);
  config.epochs = 1;
  config.batch_size = 0;
  EXPECT_THROW(validate(config), ValidationError);
  config.batch_size = 2;
  config.learning_rate = -0.5;
  EXPECT_THROW(validate(config), ValidationError);
  config.learning_rate = 0.1;
  config.weight_decay = -1.0;
  EXPECT_THROW(validate(config), ValidationError);
  config.weight_decay = 0.0;
  config.momentum = 1.0;
  EXPECT_THROW(validate(config), ValidationError);
  config.momentum = 0.9;
  config.eval_every = -1;
  EXPECT_THROW(validate(config), ValidationError);
}

TEST(Train, MulticlassLossHandValues) {
  Matrix<double> logits(2, 2);  // all zeros: loss = ln 2 per row
  const std::vector<Label> labels{{0}, {1}};
  const LabelSpec spec{TaskKind::multiclass, 2};
  EXPECT_NEAR(loss_value(logits, labels, spec), std::log(2.0), 1e-12);

  // Shift invariance: adding a constant to one row changes nothing.
  Matrix<double> shifted = logits;
  shifted(0, 0) += 7.0;
  shifted(0, 1) += 7.0;
  EXPECT_NEAR(loss_value(shifted, labels, spec), std::log(2.0), 1e-12);
}

TEST(Train, MultilabelLossHandValues) {
  Matrix<double> logits(1, 2);  // zeros: ln 2 per class, averaged
  const std::vector<Label> empty{{}};
  const LabelSpec spec{TaskKind::multilabel, 2};
  EXPECT_NEAR(loss_value(logits, empty, spec), std::log(2.0), 1e-12);

  Matrix<double> one(1, 1);
  one(0, 0) = 3.0;
  const std::vector<Label> positive{{0}};
  const LabelSpec single{TaskKind::multilabel, 1};
  // BCE with z = 3, y = 1: log(1 + exp(-3)).
  EXPECT_NEAR(loss_value(one, positive, single), std::log1p(std::exp(-3.0)), 1e-12);
}

TEST(Train, LossShapeMismatchesRejected) {
  Matrix<double> logits(2, 3);
  const std::vector<Label> labels{{0}};
  EXPECT_THROW(loss_value(logits, labels, LabelSpec{TaskKind::multiclass, 3}), ValidationError);
  const std::vector<Label> two{{0}, {1}};
  EXPECT_THROW(loss_value(logits, two, LabelSpec{TaskKind::multiclass, 2}), ValidationError);
  Matrix<double> empty(0, 2);
  EXPECT_THROW(loss_value(empty, {}, LabelSpec{TaskKind::multiclass, 2}), ValidationError);
}

TEST(Train, NonFiniteLossThrowsDivergence) {
  Matrix<double> logits(1, 2);
  logits(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const std::vector<Label> labels{{0}};
  EXPECT_THROW(loss_value(logits, labels, LabelSpec{TaskKind::multiclass, 2}), DivergenceError);
}

TEST(Train, LossGradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(71);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const bool multiclass = trial % 2 == 0;
    const int classes = 2 + static_cast<int>(gen() % 3);
    const int rows = 1 + static_cast<int>(gen() % 4);
    const LabelSpec spec{multiclass ? TaskKind::multiclass : TaskKind::multilabel, classes};
    Matrix<double> logits(rows, classes);
    for (double& v : logits.data) v = value(gen);
    std::vector<Label> labels(rows);
    for (int s = 0; s < rows; ++s) {
      if (multiclass) {
        labels[s] = {static_cast<int>(gen() % classes)};
      } else {
        for (int c = 0; c < classes; ++c) {
          if (gen() % 2 == 0) labels[s].push_back(c);
        }
      }
    }

    const Matrix<double> grad = loss_grad_logits(logits, labels, spec);
    const double h = 1e-6;
    for (int s = 0; s < rows; ++s) {
      for (int c = 0; c < classes; ++c) {
        Matrix<double> hi = logits;
        Matrix<double> lo = logits;
        hi(s, c) += h;
        lo(s, c) -= h;
        const double fd = (loss_value(hi, labels, spec) - loss_value(lo, labels, spec)) / (2 * h);
        EXPECT_NEAR(grad(s, c), fd, 1e-6) << "trial " << trial;
      }
    }
  }
}

TEST(Train, FullGradientsMatchFiniteDifferences) {
  // One small multiclass and one multilabel case end to end through the
  // encoder, pooling and head. The broad configuration sweep lives in the
  // gradcheck command.
  std::mt19937_64 gen(72);
  for (int trial = 0; trial < 2; ++trial) {
    const bool multiclass = trial == 0;
    Graph g = build_graph(6, testref::random_edges(gen, 6, 0.5));
    std::vector<Subgraph> subs{make_subgraph({0, 1, 2}), make_subgraph({3, 4})};
    const LabelSpec spec{multiclass ? TaskKind::multiclass : TaskKind::multilabel, 2};
    std::vector<Label> labels;
    labels.push_back(multiclass ? Label{0} : Label{0, 1});
    labels.push_back(multiclass ? Label{1} : Label{});

    ModelConfig config;
    config.num_layers = 2;
    config.input_dim = 1;
    config.hidden_dim = 3;
    config.activation = Activation::tanh;
    config.view_pool = PoolKind::mean;
    config.output_dim = 2;

    AugmentConfig aug;
    aug.num_views = 1;
    aug.node_drop_rate = 0.3;
    aug.edge_drop_rate = 0.3;
    const AugmentedBatch batch = build_augmented_batch(g, subs, aug, BatchKey{5, 0, 0});

    Parameters<double> params = init_parameters<double>(config, 3);
    LossGrads<double> analytic = loss_and_gradients(batch, labels, params, config, spec);

    auto pviews = parameter_views(params);
    auto gviews = parameter_views(analytic.grads);
    const double h = 1e-5;
    for (std::size_t a = 0; a < pviews.size(); ++a) {
      for (std::size_t i = 0; i < pviews[a].size; ++i) {
        const double saved = pviews[a].data[i];
        pviews[a].data[i] = saved + h;
        const double hi = loss_value(forward_logits(batch, params, config), labels, spec);
        pviews[a].data[i] = saved - h;
        const double lo = loss_value(forward_logits(batch, params, config), labels, spec);
        pviews[a].data[i] = saved;
        const double fd = (hi - lo) / (2 * h);
        const double an = gviews[a].data[i];
        const double err = std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)});
        EXPECT_LE(err, 1e-4) << pviews[a].name << "[" << i << "]";
      }
    }
  }
}

TEST(Train, AdamStepIsAnalyticForConstantGradient) {
  // With a constant gradient g, bias-corrected Adam moves by exactly
  // lr * g/|g| / (1 + eps/|g|) ~ lr each step.
  ModelConfig config;
  config.num_layers = 0;
  config.input_dim = 1;
  config.output_dim = 1;
  auto params = zero_parameters<double>(config);
  params.head[0].weight(0, 0) = 1.0;
  params.head[0].bias[0] = 0.0;

  TrainConfig train;
  train.learning_rate = 0.1;
  train.optimizer = OptimizerKind::adam;
  Optimizer<double> opt(train, params);

  auto grads = zero_parameters<double>(config);
  grads.head[0].weight(0, 0) = 2.0;  // constant gradient, bias grad stays 0
  opt.step(params, grads);
  const double expected_step = 0.1 * 1.0 / (1.0 + 1e-8 / 2.0);
  EXPECT_NEAR(params.head[0].weight(0, 0), 1.0 - expected_step, 1e-12);
  EXPECT_DOUBLE_EQ(params.head[0].bias[0], 0.0);

  grads.head[0].weight(0, 0) = 2.0;
  opt.step(params, grads);
  EXPECT_NEAR(params.head[0].weight(0, 0), 1.0 - 2 * expected_step, 1e-9);
}

TEST(Train, SgdMomentumAccumulatesVelocity) {
  ModelConfig config;
  config.num_layers = 0;
  config.input_dim = 1;
  config.output_dim = 1;
  auto params = zero_parameters<double>(config);
  params.head[0].weight(0, 0) = 1.0;

  TrainConfig train;
  train.learning_rate = 0.1;
  train.optimizer = OptimizerKind::sgd_momentum;
  train.momentum = 0.5;
  Optimizer<double> opt(train, params);

  auto grads = zero_parameters<double>(config);
  grads.head[0].weight(0, 0) = 1.0;
  opt.step(params, grads);  // velocity 1, step 0.1
  EXPECT_NEAR(params.head[0].weight(0, 0), 0.9, 1e-12);
  grads.head[0].weight(0, 0) = 1.0;
  opt.step(params, grads);  // velocity 1.5, step 0.15
  EXPECT_NEAR(params.head[0].weight(0, 0), 0.75, 1e-12);
}

TEST(Train, WeightDecayIsCoupled) {
  ModelConfig config;
  config.num_layers = 0;
  config.input_dim = 1;
  config.output_dim = 1;
  auto params = zero_parameters<double>(config);
  params.head[0].weight(0, 0) = 2.0;

  TrainConfig train;
  train.learning_rate = 1.0;
  train.optimizer = OptimizerKind::sgd_momentum;
  train.momentum = 0.0;
  train.weight_decay = 0.1;
  Optimizer<double> opt(train, params);

  auto grads = zero_parameters<double>(config);  // zero gradient: pure decay
  opt.step(params, grads);
  EXPECT_NEAR(params.head[0].weight(0, 0), 2.0 - 1.0 * 0.1 * 2.0, 1e-12);
}

TEST(Train, ZeroLearningRateKeepsParametersBitIdentical) {
  SubgraphDataset ds = separable_dataset(2);
  TrainConfig train;
  train.epochs = 3;
  train.batch_size = 2;
  train.learning_rate = 0.0;
  train.master_seed = 4;
  const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};

  FitResult<double> result = fit<double>(ds, small_model(), train, plan);
  EXPECT_FALSE(result.diverged);
  EXPECT_EQ(result.history.size(), 3u);  // no val split, so train records only

  auto expected = init_parameters<double>(small_model(), 4);
  auto ve = parameter_views(expected);
  auto vr = parameter_views(result.params);
  for (std::size_t a = 0; a < ve.size(); ++a) {
    for (std::size_t i = 0; i < ve[a].size; ++i) {
      ASSERT_EQ(vr[a].data[i], ve[a].data[i]) << ve[a].name;
    }
  }
}

TEST(Train, FitIsDeterministicPerSeed) {
  SubgraphDataset ds = separable_dataset(3);
  TrainConfig train;
  train.epochs = 5;
  train.batch_size = 2;
  train.master_seed = 11;
  AugmentPlan plan;
  plan.config.num_views = 2;
  plan.config.node_drop_rate = 0.3;
  plan.config.edge_drop_rate = 0.3;

  const ModelConfig model = small_model();
  FitResult<float> a = fit<float>(ds, model, train, plan);
  FitResult<float> b = fit<float>(ds, model, train, plan);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
    EXPECT_EQ(a.history[i].micro_f1, b.history[i].micro_f1);
    EXPECT_EQ(a.history[i].epoch, b.history[i].epoch);
  }
  auto va = parameter_views(a.params);
  auto vb = parameter_views(b.params);
  for (std::size_t i = 0; i < va.size(); ++i) {
    for (std::size_t j = 0; j < va[i].size; ++j) ASSERT_EQ(va[i].data[j], vb[i].data[j]);
  }

  train.master_seed = 12;
  FitResult<float> c = fit<float>(ds, model, train, plan);
  bool differs = false;
  for (std::size_t i = 0; i < a.history.size() && i < c.history.size(); ++i) {
    if (a.history[i].loss != c.history[i].loss) differs = true;
  }
  EXPECT_TRUE(differs);
}

TEST(Train, ZeroEpochsReturnsInitialParameters) {
  SubgraphDataset ds = separable_dataset(2);
  TrainConfig train;
  train.epochs = 0;
  train.master_seed = 9;
  const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};
  FitResult<double> result = fit<double>(ds, small_model(), train, plan);
  EXPECT_TRUE(result.history.empty());
  EXPECT_FALSE(result.diverged);

  auto expected = init_parameters<double>(small_model(), 9);
  auto ve = parameter_views(expected);
  auto vg = parameter_views(result.params);
  for (std::size_t a = 0; a < ve.size(); ++a) {
    for (std::size_t i = 0; i < ve[a].size; ++i) ASSERT_EQ(vg[a].data[i], ve[a].data[i]);
  }
}

TEST(Train, SeparableTaskReachesPerfectTrainF1) {
  SubgraphDataset ds = separable_dataset(2);
  TrainConfig train;
  train.epochs = 50;
  train.batch_size = 2;
  train.learning_rate = 0.05;
  train.master_seed = 0;
  const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};
  const FitResult<double> result = fit<double>(ds, small_model(), train, plan);
  EXPECT_FALSE(result.diverged);
  double best = 0.0;
  for (const auto& record : result.history) best = std::max(best, record.micro_f1);
  EXPECT_DOUBLE_EQ(best, 1.0);
}

TEST(Train, LossDecreasesOnSeparableTask) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SubgraphDataset ds = separable_dataset(2);
    TrainConfig train;
    train.epochs = 40;
    train.batch_size = 2;
    train.learning_rate = 0.02;
    train.master_seed = seed;
    const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};
    const FitResult<double> result = fit<double>(ds, small_model(), train, plan);
    ASSERT_FALSE(result.diverged);
    EXPECT_LT(result.history.back().loss, result.history.front().loss) << "seed " << seed;
  }
}

TEST(Train, DivergenceSetsFlagAndDiagnosticRecord) {
  SubgraphDataset ds = separable_dataset(3);
  TrainConfig train;
  train.epochs = 10;
  train.batch_size = 2;
  train.learning_rate = 1e30;
  train.optimizer = OptimizerKind::sgd_momentum;
  train.master_seed = 1;
  const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};
  const FitResult<float> result = fit<float>(ds, small_model(), train, plan);
  EXPECT_TRUE(result.diverged);
  EXPECT_FALSE(result.note.empty());
  ASSERT_FALSE(result.history.empty());
  EXPECT_TRUE(std::isnan(result.history.back().loss));
}

TEST(Train, EarlyStoppingHaltsWithoutImprovement) {
  SubgraphDataset ds = separable_dataset(3, Split::train);
  // Reassign two subgraphs to validation.
  ds.split[4] = Split::val;
  ds.split[5] = Split::val;

  TrainConfig train;
  train.epochs = 50;
  train.batch_size = 2;
  train.learning_rate = 0.0;  // nothing improves
  train.eval_every = 1;
  train.early_stop_patience = 1;
  const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};
  const FitResult<double> result = fit<double>(ds, small_model(), train, plan);
  // Epoch 0 sets the best; epoch 1 fails to improve and stops.
  ASSERT_EQ(result.history.size(), 4u);
  EXPECT_EQ(result.history.back().epoch, 1);
  EXPECT_NE(result.note.find("early stop"), std::string::npos);
}

TEST(Train, EvaluateIsOrderInvariant) {
  SubgraphDataset ds = separable_dataset(3);
  const ModelConfig model = small_model();
  const auto params = init_parameters<double>(model, 2);
  const std::vector<int> forward{0, 1, 2, 3};
  const std::vector<int> backward{3, 2, 1, 0};
  const MetricsRecord a = evaluate(ds, forward, params, model, 0, "train");
  const MetricsRecord b = evaluate(ds, backward, params, model, 0, "train");
  EXPECT_EQ(a.micro_f1, b.micro_f1);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  EXPECT_EQ(a.epoch, -1);
  EXPECT_EQ(a.split, "train");
}

TEST(Train, EvaluateMatchesManualSoloForward) {
  SubgraphDataset ds = separable_dataset(1);
  const ModelConfig model = small_model();
  const auto params = init_parameters<double>(model, 8);

  const std::vector<int> single{1};
  const MetricsRecord record = evaluate(ds, single, params, model, 3, "test");

  const AugmentPlan plain{AugmentConfig{}, BatchMode::multi_view};
  const AugmentedBatch batch =
      assemble_batch(ds.graph, {ds.subgraphs[1]}, plain, BatchKey{3, 0, 0});
  const auto logits = forward_logits(batch, params, model);
  const std::vector<Label> label{ds.labels[1]};
  EXPECT_DOUBLE_EQ(record.loss, loss_value(logits, label, ds.label_spec));
  const Label pred = decide(logits.row(0).data(), logits.cols, ds.label_spec);
  EXPECT_EQ(record.micro_f1, pred == ds.labels[1] ? 1.0 : 0.0);
}

TEST(Train, EvaluateRejectsEmptyIndices) {
  SubgraphDataset ds = separable_dataset(1);
  const ModelConfig model = small_model();
  const auto params = init_parameters<double>(model, 0);
  EXPECT_THROW(evaluate(ds, std::vector<int>{}, params, model, 0, "val"), ValidationError);
}

TEST(Train, FitValidatesDimensions) {
  SubgraphDataset ds = separable_dataset(2);
  TrainConfig train;
  train.epochs = 1;
  const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};

  ModelConfig wrong_input = small_model();
  wrong_input.input_dim = 7;
  EXPECT_THROW(fit<double>(ds, wrong_input, train, plan), ValidationError);

  ModelConfig wrong_output = small_model();
  wrong_output.output_dim = 5;
  EXPECT_THROW(fit<double>(ds, wrong_output, train, plan), ValidationError);

  SubgraphDataset no_train = separable_dataset(2, Split::test);
  EXPECT_THROW(fit<double>(no_train, small_model(), train, plan), ValidationError);
}

TEST(Train, OnRecordStreamsTheHistory) {
  SubgraphDataset ds = separable_dataset(2);
  TrainConfig train;
  train.epochs = 4;
  train.batch_size = 2;
  std::vector<MetricsRecord> streamed;
  const AugmentPlan plan{AugmentConfig{}, BatchMode::multi_view};
  const FitResult<double> result = fit<double>(
      ds, small_model(), train, plan,
      [&streamed](const MetricsRecord& r) { streamed.push_back(r); });
  ASSERT_EQ(streamed.size(), result.history.size());
  for (std::size_t i = 0; i < streamed.size(); ++i) {
    EXPECT_EQ(streamed[i].epoch, result.history[i].epoch);
    EXPECT_EQ(streamed[i].split, result.history[i].split);
    EXPECT_EQ(streamed[i].loss, result.history[i].loss);
  }
}

}  // namespace
}  // namespace subaug
