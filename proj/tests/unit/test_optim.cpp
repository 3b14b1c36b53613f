#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/model/cnn.hpp"
#include "gazefuse/model/fusion.hpp"
#include "gazefuse/ops.hpp"
#include "gazefuse/optim/loss.hpp"
#include "gazefuse/optim/train.hpp"
#include "gradcheck.hpp"
#include "planted.hpp"
#include "tiny_models.hpp"

using namespace gazefuse;
using gazefuse::testing::planted_examples;
using gazefuse::testing::tiny_fusion_config;

namespace {

double bce_value(float logit, float target) {
  const float t[] = {target};
  return bce_with_logits(Tensor({1}, {logit}), std::span<const float>(t)).item();
}

FusionModelConfig no_dropout() {
  auto c = tiny_fusion_config();
  c.dropout = 0.0;
  return c;
}

TrainConfig quick_config(std::size_t epochs) {
  TrainConfig c;
  c.learning_rate = 1e-3;
  c.max_epochs = epochs;
  c.seed = 7;
  return c;
}

}  // namespace

TEST(Bce, AnalyticValues) {
  EXPECT_NEAR(bce_value(0.f, 1.f), std::log(2.0), 1e-6);
  EXPECT_NEAR(bce_value(50.f, 1.f), 0.0, 1e-12);
  EXPECT_NEAR(bce_value(-50.f, 1.f), 50.0, 1e-5);
  EXPECT_NEAR(bce_value(50.f, 0.f), 50.0, 1e-5);
}

TEST(Bce, MatchesNaiveFormInDouble) {
  Rng rng(1, "bce");
  std::vector<float> logits(64), targets(64);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    logits[i] = static_cast<float>(rng.uniform(-8, 8));
    targets[i] = rng.uniform() < 0.5 ? 0.f : 1.f;
  }
  double naive = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-static_cast<double>(logits[i])));
    naive -= targets[i] * std::log(s) + (1.0 - targets[i]) * std::log(1.0 - s);
  }
  naive /= static_cast<double>(logits.size());
  const auto loss = bce_with_logits(Tensor({64}, logits), std::span<const float>(targets));
  EXPECT_NEAR(loss.item(), naive, 1e-5);
}

TEST(Bce, RejectsNonBinaryTargets) {
  const float t[] = {0.5f};
  EXPECT_THROW(bce_with_logits(Tensor({1}, {0.f}), std::span<const float>(t)), ContractError);
  const float two[] = {0.f, 1.f};
  EXPECT_THROW(bce_with_logits(Tensor({1}, {0.f}), std::span<const float>(two)), ContractError);
}

TEST(Bce, GradientMatchesFiniteDifferences) {
  Rng rng(2, "bce");
  const std::vector<float> tf{1.f, 0.f, 1.f, 0.f, 1.f};
  const std::vector<double> td(tf.begin(), tf.end());
  auto report = gazefuse::testing::gradient_check_fn(
      {gazefuse::testing::random_tensor({5}, rng, -4, 4)}, [&]<typename T>(const std::vector<BasicTensor<T>>& x) {
        if constexpr (std::is_same_v<T, float>) return bce_with_logits(x[0], std::span<const float>(tf));
        else return bce_with_logits(x[0], std::span<const double>(td));
      });
  EXPECT_LE(report.max_rel_error, 1e-3) << report.worst;
}

TEST(Adam, FirstStepMovesByLearningRate) {
  for (const float g : {0.3f, -2.f, 0.05f}) {
    ParameterStore<float> params;
    auto x = params.add("x", Tensor({1}, {0.f}));
    grad_sink(x)[0] = g;
    AdamState state;
    const AdamHyper hyper{0.01, 0.9, 0.999, 1e-8};
    adam_step(params, state, hyper);
    const double delta = x.data()[0];
    EXPECT_NEAR(std::abs(delta), hyper.learning_rate, hyper.learning_rate * 1e-6) << "g=" << g;
    EXPECT_EQ(delta < 0, g > 0);
    EXPECT_EQ(state.step, 1u);
  }
}

TEST(Adam, ZeroGradientLeavesParameterUnchanged) {
  ParameterStore<float> params;
  auto x = params.add("x", Tensor({2}, {1.5f, -0.25f}));
  AdamState state;
  adam_step(params, state, {});
  EXPECT_EQ(x.data()[0], 1.5f);
  EXPECT_EQ(x.data()[1], -0.25f);
}

TEST(Adam, DescendsQuadratic) {
  ParameterStore<float> params;
  auto x = params.add("x", Tensor({1}, {0.f}));
  AdamState state;
  double previous = 4.0;
  for (int step = 0; step < 10; ++step) {
    params.zero_grad();
    auto d = ops::add(x, Tensor({1}, {-2.f}));
    ops::sum(ops::mul(d, d)).backward();
    adam_step(params, state, {0.1, 0.9, 0.999, 1e-8});
    const double f = std::pow(x.data()[0] - 2.0, 2);
    EXPECT_LT(f, previous) << "step " << step;
    previous = f;
  }
}

TEST(Adam, StateShapeMismatchIsDimensionError) {
  ParameterStore<float> params;
  params.add("x", Tensor({3}, {1.f, 2.f, 3.f}));
  AdamState state;
  state.m = {{0.0}};
  state.v = {{0.0}};
  state.step = 1;
  EXPECT_THROW(adam_step(params, state, {}), DimensionError);
}

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(c.learning_rate, 6.1e-6);
  EXPECT_EQ(c.batch_size, 8u);
  EXPECT_EQ(c.max_epochs, 80u);
  EXPECT_DOUBLE_EQ(c.adam_beta1, 0.9);
  EXPECT_DOUBLE_EQ(c.adam_beta2, 0.999);
  EXPECT_DOUBLE_EQ(c.adam_eps, 1e-8);
  EXPECT_DOUBLE_EQ(c.threshold_for_val_f1, 0.5);
  EXPECT_TRUE(c.shuffle_each_epoch);
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.adam_beta1 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, ZeroLearningRateLeavesWeightsBitIdentical) {
  FusionModel model(tiny_fusion_config(), 1);
  const auto before = snapshot(model, {}).weights;
  auto data = planted_examples({}, 10, 1);
  auto config = quick_config(3);
  config.learning_rate = 0.0;
  train(model, data, data, config, Task::MutualGaze);
  EXPECT_EQ(snapshot(model, {}).weights, before);
}

TEST(Train, FirstStepLossIsUntrainedForwardLoss) {
  FusionModel model(tiny_fusion_config(), 2);
  auto data = planted_examples({}, 12, 2);
  const auto config = quick_config(1);

  // Replay the first minibatch independently: same shuffle and dropout streams.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle(config.seed, "shuffle");
  shuffle.shuffle(order);
  Rng dropout(config.seed, "dropout");
  std::vector<Tensor> logits;
  std::vector<float> targets;
  for (std::size_t i = 0; i < config.batch_size; ++i) {
    logits.push_back(model.forward(data[order[i]].view_a, data[order[i]].view_b, {true, &dropout}));
    targets.push_back(data[order[i]].label);
  }
  const double expected = bce_with_logits(ops::concat(logits, 0), std::span<const float>(targets)).item();

  const auto result = train(model, data, {}, config, Task::MutualGaze);
  ASSERT_EQ(result.step_losses.size(), 2u);  // 12 samples, batch 8, short batch kept
  EXPECT_EQ(result.step_losses[0], expected);
}

TEST(Train, SingleSampleLossIsMonotone) {
  FusionModel model(no_dropout(), 3);
  auto data = planted_examples({}, 1, 3);
  auto config = quick_config(20);
  config.learning_rate = 1e-4;
  const auto result = train(model, data, {}, config, Task::MutualGaze);
  ASSERT_EQ(result.history.size(), 20u);
  for (std::size_t e = 1; e < result.history.size(); ++e) {
    EXPECT_LE(result.history[e].train_loss, result.history[e - 1].train_loss) << "epoch " << e + 1;
  }
}

TEST(Train, SameSeedSameDataIsBitIdentical) {
  auto data = planted_examples({}, 20, 4);
  auto val = planted_examples({}, 8, 5);
  FusionModel m1(tiny_fusion_config(), 4), m2(tiny_fusion_config(), 4);
  const auto r1 = train(m1, data, val, quick_config(5), Task::JointAttention);
  const auto r2 = train(m2, data, val, quick_config(5), Task::JointAttention);
  EXPECT_EQ(r1.best, r2.best);
  EXPECT_EQ(r1.step_losses, r2.step_losses);
  std::ostringstream h1, h2;
  write_history_csv(h1, r1.history);
  write_history_csv(h2, r2.history);
  EXPECT_EQ(h1.str(), h2.str());
}

TEST(Train, SelectsEarliestBestValidationF1) {
  auto data = planted_examples({}, 24, 6);
  auto val = planted_examples({}, 12, 7);
  FusionModel model(no_dropout(), 6);
  const auto result = train(model, data, val, quick_config(12), Task::MutualGaze);
  double best = -1;
  std::size_t best_epoch = 0;
  for (const auto& r : result.history) {
    if (r.val->f1 > best) {
      best = r.val->f1;
      best_epoch = r.epoch;
    }
  }
  EXPECT_EQ(result.best.meta.val_f1, best);
  EXPECT_EQ(result.best.meta.epoch, best_epoch);
  EXPECT_EQ(result.best.meta.task, Task::MutualGaze);
  EXPECT_TRUE(result.warnings.empty());
  // The model is left holding the selected weights.
  EXPECT_EQ(snapshot(model, result.best.meta), result.best);
}

TEST(Train, EmptyValidationKeepsLastEpochWithWarning) {
  auto data = planted_examples({}, 8, 8);
  FusionModel model(tiny_fusion_config(), 8);
  const auto result = train(model, data, {}, quick_config(3), Task::MutualGaze);
  EXPECT_EQ(result.best.meta.epoch, 3u);
  ASSERT_EQ(result.warnings.size(), 1u);
  EXPECT_FALSE(result.history.back().val.has_value());
}

TEST(Train, DivergenceNamesEpochAndStep) {
  auto data = planted_examples({}, 4, 9);
  data[2].view_a.mutable_data()[5] = std::numeric_limits<float>::quiet_NaN();
  FusionModel model(tiny_fusion_config(), 9);
  auto config = quick_config(2);
  config.shuffle_each_epoch = false;
  config.batch_size = 2;
  try {
    train(model, data, {}, config, Task::MutualGaze);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, step 2"), std::string::npos) << e.what();
  }
}

TEST(Train, EmptyTrainingSetIsContractError) {
  FusionModel model(tiny_fusion_config(), 1);
  EXPECT_THROW(train(model, {}, {}, quick_config(1), Task::MutualGaze), ContractError);
}

TEST(Train, HistoryCsvLayout) {
  std::vector<EpochRecord> history(2);
  history[0].epoch = 1;
  history[0].train_loss = 0.5;
  MetricReport m;
  m.accuracy = 0.75;
  m.precision = 1;
  m.recall = 0.5;
  m.f1 = 2.0 / 3.0;
  history[0].val = m;
  history[1].epoch = 2;
  history[1].train_loss = 0.25;
  std::ostringstream out;
  write_history_csv(out, history);
  EXPECT_EQ(out.str(),
            "epoch,train_loss,val_accuracy,val_precision,val_recall,val_f1\n"
            "1,0.5,0.75,1,0.5,0.6666666666666666\n"
            "2,0.25,,,,\n");
}

TEST(Train, PlantedTaskReachesTrainF1) {
  auto data = planted_examples({}, 32, 1);
  FusionModel model(no_dropout(), 3);
  auto config = quick_config(200);
  config.seed = 3;
  std::size_t reached = 0;
  try {
    train(model, data, {}, config, Task::MutualGaze, [&](const EpochRecord& r) {
      if (evaluate(model, data, 0.5, Task::MutualGaze, 3).f1 >= 0.99) {
        reached = r.epoch;
        throw std::runtime_error("done");
      }
    });
  } catch (const std::runtime_error&) {
  }
  EXPECT_GT(reached, 0u);
  EXPECT_LE(reached, 200u);
}

TEST(Train, PlantedTaskGeneralizes) {
  auto data = planted_examples({}, 256, 1);
  auto held_out = planted_examples({}, 256, 2);
  auto c = tiny_fusion_config();
  c.dropout = 0.1;
  FusionModel model(c, 5);
  auto config = quick_config(100);
  config.seed = 5;
  train(model, data, {}, config, Task::MutualGaze);
  const auto report = evaluate(model, held_out, 0.5, Task::MutualGaze, 5);
  ASSERT_TRUE(report.roc_auc.has_value());
  EXPECT_GE(*report.roc_auc, 0.95);
}

TEST(Train, CnnBaselineTrainsOnRasters) {
  Rng rng(3, "raster");
  std::vector<TrainingExample> data;
  for (int i = 0; i < 12; ++i) {
    auto a = gazefuse::testing::random_tensor({3, 12, 12}, rng, 0, 1);
    auto b = gazefuse::testing::random_tensor({3, 12, 12}, rng, 0, 1);
    data.push_back({a, b, static_cast<float>(i % 2)});
  }
  CnnBaseline model(gazefuse::testing::tiny_cnn_config(), 3);
  const auto before = snapshot(model, {}).weights;
  const auto result = train(model, data, data, quick_config(3), Task::JointAttention);
  EXPECT_EQ(result.history.size(), 3u);
  EXPECT_NE(snapshot(model, {}).weights, before);
}

TEST(MultiSeed, IndependentRunsOnOneTestSet) {
  auto data = planted_examples({}, 16, 10);
  auto val = planted_examples({}, 8, 11);
  auto test = planted_examples({}, 10, 12);
  const ModelFactory factory = [](std::uint64_t seed) {
    return std::make_unique<FusionModel>(tiny_fusion_config(), seed);
  };
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const auto runs = run_multiseed(factory, data, val, test, quick_config(2), Task::MutualGaze, seeds);
  ASSERT_EQ(runs.size(), 5u);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    EXPECT_EQ(runs[i].seed, seeds[i]);
    EXPECT_EQ(runs[i].test_report.sample_count, test.size());
    EXPECT_EQ(runs[i].training.best.meta.seed, seeds[i]);
  }

  const std::vector<std::uint64_t> permuted{4, 2, 5, 1, 3};
  const auto again = run_multiseed(factory, data, val, test, quick_config(2), Task::MutualGaze, permuted);
  for (const auto& run : again) {
    const auto match = std::find_if(runs.begin(), runs.end(), [&](const SeedRun& r) { return r.seed == run.seed; });
    EXPECT_EQ(match->training.best, run.training.best);
    EXPECT_EQ(match->test_report.f1, run.test_report.f1);
    EXPECT_EQ(match->test_report.roc_auc, run.test_report.roc_auc);
  }

  const std::vector<std::uint64_t> one{3};
  const auto single = run_multiseed(factory, data, val, test, quick_config(2), Task::MutualGaze, one);
  std::vector<MetricReport> reports{single[0].test_report};
  const auto agg = aggregate_runs(reports);
  for (const auto& [m, s] : agg.metrics) {
    EXPECT_EQ(s.min, s.mean);
    EXPECT_EQ(s.max, s.mean);
  }
}

TEST(MultiSeed, FailureNamesSeedAndNestsCause) {
  auto data = planted_examples({}, 4, 10);
  const ModelFactory factory = [](std::uint64_t seed) -> std::unique_ptr<Classifier> {
    if (seed == 2) throw ConfigError("bad architecture");
    return std::make_unique<FusionModel>(tiny_fusion_config(), seed);
  };
  const std::vector<std::uint64_t> seeds{1, 2};
  try {
    run_multiseed(factory, data, {}, data, quick_config(1), Task::MutualGaze, seeds);
    FAIL();
  } catch (const SeedRunError& e) {
    EXPECT_EQ(e.seed(), 2u);
    EXPECT_THROW(std::rethrow_if_nested(e), ConfigError);
  }
}
