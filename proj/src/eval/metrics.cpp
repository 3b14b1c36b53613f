#include "gazefuse/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gazefuse/error.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* op) {
  if (scores.size() != labels.size()) {
    throw ContractError(std::string(op) + ": " + std::to_string(scores.size()) + " scores but " +
                        std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw ContractError(std::string(op) + ": no samples");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw ContractError(std::string(op) + ": label " + std::to_string(labels[i]) + " at index " +
                          std::to_string(i) + " is not 0 or 1");
    }
    if (!std::isfinite(scores[i])) throw ContractError(std::string(op) + ": non-finite score at index " +
                                                       std::to_string(i));
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

MetricReport threshold_metrics(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels, "threshold_metrics");
  MetricReport r;
  auto& c = r.counts;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  r.sample_count = scores.size();
  r.threshold = threshold;
  r.accuracy = ratio(c.tp + c.tn, r.sample_count);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  const std::size_t positives = c.tp + c.fn;
  if (positives > 0 && positives < r.sample_count) r.roc_auc = roc_auc(scores, labels);
  return r;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "roc_auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of positive-sample midranks. Midranks are halves of integers, so
  // this sum and the U statistic below are exact in double.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw UndefinedMetricError("roc_auc needs both classes, got " + std::to_string(positives) + " positive and " +
                               std::to_string(negatives) + " negative samples");
  }
  const double p = static_cast<double>(positives);
  const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::Accuracy: return "Accuracy";
    case Metric::Precision: return "Precision";
    case Metric::Recall: return "Recall";
    case Metric::F1: return "F1";
    case Metric::Auc: return "AUC";
  }
  return "?";
}

const Spread& AggregateReport::at(Metric m) const {
  for (const auto& [metric, spread] : metrics)
    if (metric == m) return spread;
  throw LookupError("aggregate report has no " + to_string(m));
}

AggregateReport aggregate_runs(std::span<const MetricReport> reports) {
  if (reports.empty()) throw ContractError("aggregate_runs needs at least one report");
  const Task task = reports.front().task;
  const bool has_auc = reports.front().roc_auc.has_value();
  for (const auto& r : reports) {
    if (r.task != task) throw ContractError("aggregate_runs: reports mix tasks " + to_string(task) + " and " +
                                            to_string(r.task));
    if (r.roc_auc.has_value() != has_auc) throw ContractError("aggregate_runs: AUC present in some runs only");
  }
  AggregateReport out;
  out.task = task;
  out.runs = reports.size();
  for (Metric m : kAllMetrics) {
    if (m == Metric::Auc && !has_auc) continue;
    std::vector<double> values;
    for (const auto& r : reports) {
      switch (m) {
        case Metric::Accuracy: values.push_back(r.accuracy); break;
        case Metric::Precision: values.push_back(r.precision); break;
        case Metric::Recall: values.push_back(r.recall); break;
        case Metric::F1: values.push_back(r.f1); break;
        case Metric::Auc: values.push_back(*r.roc_auc); break;
      }
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    Spread s{0.0, *lo, *hi};
    s.mean = std::clamp(sorted_mean(values), s.min, s.max);
    out.metrics.emplace_back(m, s);
  }
  return out;
}

std::string render_aggregate_csv(const AggregateReport& report, int decimals) {
  std::string out = "metric,mean,eminus,eplus\n";
  for (const auto& [m, s] : report.metrics) {
    out += to_string(m) + "," + text::format_fixed(s.mean, decimals) + "," +
           text::format_fixed(s.mean - s.min, decimals) + "," + text::format_fixed(s.max - s.mean, decimals) + "\n";
  }
  return out;
}

}  // namespace gazefuse
