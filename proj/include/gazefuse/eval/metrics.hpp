#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazefuse/task.hpp"

namespace gazefuse {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Metrics of one run on one labeled set.
struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> roc_auc;  // absent when the set has a single class
  double threshold = 0.5;
  std::size_t sample_count = 0;
  Task task = Task::MutualGaze;
  std::uint64_t seed = 0;
  ConfusionCounts counts;
};

/// Scores >= threshold are predicted positive. Empty denominators give 0:
/// precision with no positive predictions, recall with no positive labels,
/// F1 when precision + recall is 0. roc_auc is filled when both classes occur.
/// Throws ContractError on length mismatch, empty input or non-binary labels.
MetricReport threshold_metrics(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

/// Mann-Whitney rank statistic with midranks for ties, equal to
/// P(s+ > s-) + P(s+ = s-) / 2. Throws UndefinedMetricError unless both
/// classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct Spread {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

enum class Metric { Accuracy, Precision, Recall, F1, Auc };
inline constexpr std::array<Metric, 5> kAllMetrics{Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1,
                                                   Metric::Auc};
std::string to_string(Metric m);

/// Mean and observed extremes of each metric across repeated runs.
struct AggregateReport {
  Task task = Task::MutualGaze;
  std::size_t runs = 0;
  std::vector<std::pair<Metric, Spread>> metrics;  // AUC omitted when no run has it

  const Spread& at(Metric m) const;
};

/// Per-metric mean/min/max. Means are summed in sorted order, so the result
/// does not depend on report order. Throws ContractError on an empty list,
/// mixed tasks, or AUC present in some runs only.
AggregateReport aggregate_runs(std::span<const MetricReport> reports);

/// "metric,mean,eminus,eplus" table with eminus = mean - min and
/// eplus = max - mean, fixed to `decimals` digits.
std::string render_aggregate_csv(const AggregateReport& report, int decimals = 3);

}  // namespace gazefuse
