#pragma once

#include <cstddef>
#include <span>

#include "gazefuse/model/classifier.hpp"
#include "gazefuse/optim/train.hpp"

namespace gazefuse {

struct ThroughputReport {
  std::size_t samples = 0;  // timed samples, warmup excluded
  std::size_t batches = 0;
  double elapsed_s = 0.0;
  double samples_per_s = 0.0;
  double batch_latency_mean_ms = 0.0;
  double batch_latency_p50_ms = 0.0;
  double batch_latency_p95_ms = 0.0;
};

struct BenchOptions {
  std::size_t batch_size = 8;
  std::size_t min_samples = 100;  // the dataset is cycled until this many are timed
  std::size_t warmup_batches = 2;
};

/// Eval-mode inference throughput over wall-clock time. Hardware-dependent:
/// reported, never asserted against a fixed number.
ThroughputReport bench_throughput(const Classifier& model, std::span<const TrainingExample> examples,
                                  const BenchOptions& options = {});

}  // namespace gazefuse
