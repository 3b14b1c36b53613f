#include "gazefuse/eval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gazefuse/error.hpp"

namespace gazefuse {

namespace {

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

}  // namespace

ThroughputReport bench_throughput(const Classifier& model, std::span<const TrainingExample> examples,
                                  const BenchOptions& options) {
  if (examples.empty()) throw ContractError("bench_throughput: no examples");
  if (options.batch_size == 0) throw ConfigError("bench batch_size must be > 0");
  NoGradGuard no_grad;
  std::size_t cursor = 0;
  double sink = 0.0;
  auto run_batch = [&] {
    for (std::size_t i = 0; i < options.batch_size; ++i) {
      const auto& e = examples[cursor];
      cursor = (cursor + 1) % examples.size();
      sink += model.forward(e.view_a, e.view_b, {}).item();
    }
  };
  for (std::size_t b = 0; b < options.warmup_batches; ++b) run_batch();

  using Clock = std::chrono::steady_clock;
  const std::size_t batches = (std::max(options.min_samples, examples.size()) + options.batch_size - 1) /
                              options.batch_size;
  std::vector<double> latencies_ms;
  latencies_ms.reserve(batches);
  const auto start = Clock::now();
  for (std::size_t b = 0; b < batches; ++b) {
    const auto t0 = Clock::now();
    run_batch();
    latencies_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  if (!std::isfinite(sink)) throw NumericError("bench_throughput: non-finite model output");

  ThroughputReport report;
  report.samples = batches * options.batch_size;
  report.batches = batches;
  report.elapsed_s = elapsed;
  report.samples_per_s = elapsed > 0.0 ? static_cast<double>(report.samples) / elapsed : 0.0;
  double total = 0.0;
  for (double l : latencies_ms) total += l;
  report.batch_latency_mean_ms = total / static_cast<double>(batches);
  report.batch_latency_p50_ms = percentile(latencies_ms, 0.5);
  report.batch_latency_p95_ms = percentile(latencies_ms, 0.95);
  return report;
}

}  // namespace gazefuse
