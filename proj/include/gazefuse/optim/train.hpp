#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazefuse/eval/metrics.hpp"
#include "gazefuse/model/checkpoint.hpp"
#include "gazefuse/model/classifier.hpp"
#include "gazefuse/optim/adam.hpp"
#include "gazefuse/task.hpp"

namespace gazefuse {

/// One model input: the two per-view tensors and a binary target.
struct TrainingExample {
  Tensor view_a;
  Tensor view_b;
  float label = 0.f;
};

struct TrainConfig {
  double learning_rate = 6.1e-6;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 80;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  double threshold_for_val_f1 = 0.5;
  bool shuffle_each_epoch = true;

  /// learning_rate must be > 0 in user configs; train() also accepts 0,
  /// which leaves the weights untouched.
  void validate(bool allow_zero_learning_rate = false) const;
  AdamHyper adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_eps}; }
  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<MetricReport> val;  // empty when there is no validation set
};

struct TrainResult {
  ModelCheckpoint best;
  std::vector<EpochRecord> history;
  std::vector<double> step_losses;
  std::vector<std::string> warnings;
};

/// Minibatch Adam on mean BCE. Each epoch reshuffles the training order from
/// the run's "shuffle" stream; dropout draws from its "dropout" stream. The
/// last short batch is kept. After every epoch the validation set is scored
/// at the configured threshold and the checkpoint with the highest F1 is
/// kept (ties go to the earliest epoch). With no validation set the last
/// epoch wins and a warning is recorded.
///
/// On return the model holds the selected checkpoint's weights.
/// Throws NumericError naming the epoch and step if the loss goes non-finite.
TrainResult train(Classifier& model, std::span<const TrainingExample> train_set,
                  std::span<const TrainingExample> val_set, const TrainConfig& config, Task task,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Eval-mode sigmoid probabilities, one per example.
std::vector<double> predict_probabilities(const Classifier& model, std::span<const TrainingExample> examples);

MetricReport evaluate(const Classifier& model, std::span<const TrainingExample> examples, double threshold, Task task,
                      std::uint64_t seed);

/// Columns: epoch,train_loss,val_accuracy,val_precision,val_recall,val_f1.
/// Validation columns are empty for runs without a validation set.
void write_history_csv(std::ostream& out, std::span<const EpochRecord> history);

using ModelFactory = std::function<std::unique_ptr<Classifier>(std::uint64_t seed)>;

struct SeedRun {
  std::uint64_t seed = 0;
  TrainResult training;
  MetricReport test_report;
};

/// Raised when one run of a multi-seed sweep fails; the original error is
/// nested inside (std::rethrow_if_nested).
class SeedRunError : public Error {
 public:
  SeedRunError(std::uint64_t seed, const std::string& message) : Error(message), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Trains one independent model per seed (the seed drives both weight init
/// and the training streams) and scores each on the same test set.
std::vector<SeedRun> run_multiseed(const ModelFactory& factory, std::span<const TrainingExample> train_set,
                                   std::span<const TrainingExample> val_set,
                                   std::span<const TrainingExample> test_set, const TrainConfig& config, Task task,
                                   std::span<const std::uint64_t> seeds);

}  // namespace gazefuse
