#include "gazefuse/optim/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "gazefuse/error.hpp"
#include "gazefuse/ops.hpp"
#include "gazefuse/optim/loss.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse {

void TrainConfig::validate(bool allow_zero_learning_rate) const {
  const bool lr_ok = learning_rate > 0.0 || (allow_zero_learning_rate && learning_rate == 0.0);
  if (!lr_ok || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(threshold_for_val_f1 >= 0.0 && threshold_for_val_f1 <= 1.0)) {
    throw ConfigError("threshold_for_val_f1 must lie in [0, 1]");
  }
  adam().validate();
}

namespace {

double stable_sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

std::vector<int> labels_of(std::span<const TrainingExample> examples) {
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const auto& e : examples) labels.push_back(e.label >= 0.5f ? 1 : 0);
  return labels;
}

}  // namespace

std::vector<double> predict_probabilities(const Classifier& model, std::span<const TrainingExample> examples) {
  NoGradGuard no_grad;
  std::vector<double> probs;
  probs.reserve(examples.size());
  for (const auto& e : examples) probs.push_back(stable_sigmoid(model.forward(e.view_a, e.view_b, {}).item()));
  return probs;
}

MetricReport evaluate(const Classifier& model, std::span<const TrainingExample> examples, double threshold, Task task,
                      std::uint64_t seed) {
  const auto probs = predict_probabilities(model, examples);
  const auto labels = labels_of(examples);
  auto report = threshold_metrics(probs, labels, threshold);
  report.task = task;
  report.seed = seed;
  return report;
}

TrainResult train(Classifier& model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> val_set, const TrainConfig& config, Task task,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate(true);
  if (train_set.empty()) throw ContractError("train: the training set is empty");
  const AdamHyper hyper = config.adam();

  Rng shuffle_rng(config.seed, "shuffle");
  Rng dropout_rng(config.seed, "dropout");
  AdamState adam;
  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  double best_f1 = -1.0;
  auto& params = model.parameters();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.shuffle_each_epoch) shuffle_rng.shuffle(order);
    double weighted_loss = 0.0;
    for (std::size_t start = 0, step = 1; start < order.size(); start += config.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      try {
        params.zero_grad();
        std::vector<Tensor> logits;
        std::vector<float> targets;
        for (std::size_t i = start; i < end; ++i) {
          const auto& ex = train_set[order[i]];
          logits.push_back(model.forward(ex.view_a, ex.view_b, {true, &dropout_rng}));
          targets.push_back(ex.label);
        }
        auto loss = bce_with_logits(ops::concat(logits, 0), std::span<const float>(targets));
        const double value = loss.item();
        if (!std::isfinite(value)) throw NumericError("loss is " + text::format_double(value));
        loss.backward();
        adam_step(params, adam, hyper);
        result.step_losses.push_back(value);
        weighted_loss += value * static_cast<double>(end - start);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", step " + std::to_string(step) +
                           ": " + e.what());
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = weighted_loss / static_cast<double>(order.size());
    if (!val_set.empty()) record.val = evaluate(model, val_set, config.threshold_for_val_f1, task, config.seed);
    const double f1 = record.val ? record.val->f1 : 0.0;
    if (val_set.empty() ? epoch == config.max_epochs : f1 > best_f1) {
      best_f1 = f1;
      result.best = snapshot(model, {static_cast<std::uint32_t>(epoch), config.seed, f1, task});
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  if (config.max_epochs == 0) result.best = snapshot(model, {0, config.seed, 0.0, task});
  if (val_set.empty()) {
    result.warnings.push_back("no validation samples: keeping the last epoch instead of the best validation F1");
  }
  load_weights(model, result.best);
  return result;
}

void write_history_csv(std::ostream& out, std::span<const EpochRecord> history) {
  out << "epoch,train_loss,val_accuracy,val_precision,val_recall,val_f1\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << text::format_double(r.train_loss);
    if (r.val) {
      out << ',' << text::format_double(r.val->accuracy) << ',' << text::format_double(r.val->precision) << ','
          << text::format_double(r.val->recall) << ',' << text::format_double(r.val->f1);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

std::vector<SeedRun> run_multiseed(const ModelFactory& factory, std::span<const TrainingExample> train_set,
                                   std::span<const TrainingExample> val_set,
                                   std::span<const TrainingExample> test_set, const TrainConfig& config, Task task,
                                   std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ContractError("run_multiseed needs at least one seed");
  std::vector<SeedRun> runs;
  for (const auto seed : seeds) {
    try {
      auto run_config = config;
      run_config.seed = seed;
      auto model = factory(seed);
      SeedRun run;
      run.seed = seed;
      run.training = train(*model, train_set, val_set, run_config, task);
      run.test_report = evaluate(*model, test_set, config.threshold_for_val_f1, task, seed);
      runs.push_back(std::move(run));
    } catch (const std::exception& e) {
      std::throw_with_nested(SeedRunError(seed, "run with seed " + std::to_string(seed) + " failed: " + e.what()));
    }
  }
  return runs;
}

}  // namespace gazefuse
