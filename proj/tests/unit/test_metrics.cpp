#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "auc_oracle.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/eval/metrics.hpp"
#include "gazefuse/rng.hpp"

using namespace gazefuse;
using gazefuse::testing::pairwise_auc;
using gazefuse::testing::random_auc_instance;

namespace {

MetricReport report_with(double acc, double p, double r, double f1, std::optional<double> auc) {
  MetricReport m;
  m.accuracy = acc;
  m.precision = p;
  m.recall = r;
  m.f1 = f1;
  m.roc_auc = auc;
  return m;
}

}  // namespace

TEST(ThresholdMetrics, PerfectPredictions) {
  const std::vector<double> s{0.9, 0.1, 0.8, 0.2};
  const std::vector<int> y{1, 0, 1, 0};
  const auto r = threshold_metrics(s, y);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
  EXPECT_EQ(*r.roc_auc, 1.0);
}

TEST(ThresholdMetrics, HandConfusionMatrix) {
  // TP=2, FP=1, FN=1, TN=2
  const std::vector<double> s{0.9, 0.7, 0.6, 0.4, 0.2, 0.1};
  const std::vector<int> y{1, 1, 0, 1, 0, 0};
  const auto r = threshold_metrics(s, y);
  EXPECT_EQ(r.counts.tp, 2u);
  EXPECT_EQ(r.counts.fp, 1u);
  EXPECT_EQ(r.counts.fn, 1u);
  EXPECT_EQ(r.counts.tn, 2u);
  EXPECT_NEAR(r.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.accuracy, 2.0 / 3.0, 1e-15);
}

TEST(ThresholdMetrics, EmptyDenominatorsGiveZero) {
  const std::vector<double> s{0.1, 0.2, 0.3};
  const std::vector<int> y{1, 0, 1};
  const auto r = threshold_metrics(s, y);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(ThresholdMetrics, ThresholdZeroPredictsAllPositive) {
  const std::vector<double> s{0.0, 0.2, 0.0};
  const std::vector<int> y{1, 0, 1};
  EXPECT_EQ(threshold_metrics(s, y, 0.0).recall, 1.0);
}

TEST(ThresholdMetrics, F1IsHarmonicMeanOfStoredValues) {
  Rng rng(1, "metrics");
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(30);
    std::vector<int> y(30);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = rng.uniform();
      y[i] = rng.uniform() < 0.5;
    }
    const auto r = threshold_metrics(s, y);
    const double expect = r.precision + r.recall == 0 ? 0 : 2 * r.precision * r.recall / (r.precision + r.recall);
    EXPECT_NEAR(r.f1, expect, 1e-9);
    for (double v : {r.accuracy, r.precision, r.recall, r.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ThresholdMetrics, RejectsBadInput) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> short_labels{1};
  EXPECT_THROW(threshold_metrics(s, short_labels), ContractError);
  const std::vector<int> bad{1, 2};
  EXPECT_THROW(threshold_metrics(s, bad), ContractError);
  EXPECT_THROW(threshold_metrics({}, {}), ContractError);
}

TEST(ThresholdMetrics, SingleClassLeavesAucEmpty) {
  const std::vector<double> s{0.1, 0.9};
  const std::vector<int> y{1, 1};
  EXPECT_FALSE(threshold_metrics(s, y).roc_auc.has_value());
}

TEST(RocAuc, SeparatedAndTiedCases) {
  const std::vector<double> sep{0.1, 0.2, 0.8, 0.9};
  const std::vector<int> y{0, 0, 1, 1};
  EXPECT_EQ(roc_auc(sep, y), 1.0);
  const std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(roc_auc(tied, y), 0.5);
}

TEST(RocAuc, SingleClassIsUndefined) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> y{0, 0};
  EXPECT_THROW(roc_auc(s, y), UndefinedMetricError);
}

TEST(RocAuc, EqualsPairwiseOracleExactly) {
  Rng rng(2, "auc");
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_auc_instance(rng);
    EXPECT_EQ(roc_auc(inst.scores, inst.labels), pairwise_auc(inst.scores, inst.labels)) << "trial " << trial;
  }
}

TEST(RocAuc, InvariantUnderMonotoneTransforms) {
  Rng rng(3, "auc");
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_auc_instance(rng);
    const double base = roc_auc(inst.scores, inst.labels);
    std::vector<double> t1, t2;
    for (double s : inst.scores) {
      t1.push_back(std::exp(3.0 * s));
      t2.push_back(-1.0 / (s + 1.0));
    }
    EXPECT_EQ(roc_auc(t1, inst.labels), base);
    EXPECT_EQ(roc_auc(t2, inst.labels), base);
  }
}

TEST(RocAuc, ComplementMapsToOneMinus) {
  Rng rng(4, "auc");
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = random_auc_instance(rng);
    const double base = roc_auc(inst.scores, inst.labels);
    std::vector<double> flipped_scores;
    std::vector<int> flipped_labels;
    for (std::size_t i = 0; i < inst.scores.size(); ++i) {
      flipped_scores.push_back(1.0 - inst.scores[i]);
      flipped_labels.push_back(1 - inst.labels[i]);
    }
    EXPECT_NEAR(roc_auc(flipped_scores, inst.labels), 1.0 - base, 1e-12);
    EXPECT_NEAR(roc_auc(inst.scores, flipped_labels), 1.0 - base, 1e-12);
  }
}

TEST(Aggregate, RendersErrorBarRow) {
  std::vector<MetricReport> runs;
  for (double acc : {0.785, 0.800, 0.808, 0.821, 0.826}) runs.push_back(report_with(acc, 0.5, 0.5, 0.5, 0.5));
  const auto agg = aggregate_runs(runs);
  EXPECT_EQ(agg.runs, 5u);
  EXPECT_NEAR(agg.at(Metric::Accuracy).mean, 0.808, 1e-12);
  const auto csv = render_aggregate_csv(agg);
  EXPECT_EQ(csv.substr(0, csv.find('\n', csv.find('\n') + 1) + 1),
            "metric,mean,eminus,eplus\nAccuracy,0.808,0.023,0.018\n");
  EXPECT_NE(csv.find("\nAUC,0.500,0.000,0.000\n"), std::string::npos);
}

TEST(Aggregate, SingleReportHasZeroSpread) {
  const std::vector<MetricReport> one{report_with(0.7, 0.6, 0.5, 0.545, 0.8)};
  const auto agg = aggregate_runs(one);
  for (const auto& [m, s] : agg.metrics) {
    EXPECT_EQ(s.min, s.mean);
    EXPECT_EQ(s.max, s.mean);
  }
}

TEST(Aggregate, MatchesBruteForceAndIsPermutationInvariant) {
  Rng rng(5, "agg");
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<MetricReport> runs;
    const std::size_t n = 1 + rng.below(8);
    for (std::size_t i = 0; i < n; ++i) {
      runs.push_back(report_with(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()));
    }
    const auto agg = aggregate_runs(runs);
    double total = 0, lo = 1, hi = 0;
    for (const auto& r : runs) {
      total += r.recall;
      lo = std::min(lo, r.recall);
      hi = std::max(hi, r.recall);
    }
    const auto& s = agg.at(Metric::Recall);
    EXPECT_NEAR(s.mean, total / static_cast<double>(n), 1e-12);
    EXPECT_EQ(s.min, lo);
    EXPECT_EQ(s.max, hi);
    for (const auto& [m, spread] : agg.metrics) {
      EXPECT_LE(spread.min, spread.mean);
      EXPECT_LE(spread.mean, spread.max);
    }
    auto shuffled = runs;
    rng.shuffle(shuffled);
    const auto again = aggregate_runs(shuffled);
    for (std::size_t k = 0; k < agg.metrics.size(); ++k) {
      EXPECT_EQ(agg.metrics[k].second.mean, again.metrics[k].second.mean);
    }
  }
}

TEST(Aggregate, RejectsMixedTasksAndEmpty) {
  std::vector<MetricReport> runs{report_with(1, 1, 1, 1, 1), report_with(1, 1, 1, 1, 1)};
  runs[1].task = Task::JointAttention;
  EXPECT_THROW(aggregate_runs(runs), ContractError);
  EXPECT_THROW(aggregate_runs({}), ContractError);
}
