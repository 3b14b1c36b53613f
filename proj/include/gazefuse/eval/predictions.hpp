#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazefuse/eval/metrics.hpp"
#include "gazefuse/task.hpp"

namespace gazefuse {

struct PredictionRecord {
  std::string session;
  double timestamp_s = 0.0;
  Task task = Task::MutualGaze;
  double probability = 0.0;
  std::optional<int> label;

  /// Throws InputError unless probability lies in [0, 1] and label is 0 or 1.
  void validate() const;
  bool operator==(const PredictionRecord&) const = default;
};

/// Header: session,timestamp_s,task,probability,label. The label field may
/// be empty; a file whose header omits the label column is also accepted.
/// Row problems are raised with the 1-based line number of the offending row.
std::vector<PredictionRecord> read_predictions(std::istream& in, const std::string& source = "<predictions>");
std::vector<PredictionRecord> import_external_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& out, std::span<const PredictionRecord> records);

/// Scores labeled predictions of one task. Throws ContractError when a row
/// has no label or the rows mix tasks.
MetricReport score_predictions(std::span<const PredictionRecord> records, double threshold = 0.5,
                               std::uint64_t seed = 0);

}  // namespace gazefuse
