#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazefuse/eval/predictions.hpp"
#include "gazefuse/pipeline/annotations.hpp"

namespace gazefuse {

inline constexpr int kTimelineVersion = 1;

struct TimelineTrack {
  Task task = Task::MutualGaze;
  std::vector<EventAnnotation> intervals;  // ground truth, in input order
  std::vector<std::optional<double>> probabilities;  // one per 1 Hz slot; empty where nothing was predicted

  bool operator==(const TimelineTrack&) const = default;
};

/// Review document for one session: ground-truth intervals and per-second
/// probabilities per task. The text layout is described in docs/timeline-format.md.
struct TimelineDocument {
  int version = kTimelineVersion;
  std::string session;
  double window_s = 15.0;
  double threshold = 0.5;
  std::size_t slots = 0;
  std::vector<TimelineTrack> tracks;  // MG before JA; only tasks that occur

  bool operator==(const TimelineDocument&) const = default;
};

struct TimelineOptions {
  double window_s = 15.0;
  double threshold = 0.5;
};

/// Prediction at time t fills slot round(t). The slot count is one past the
/// last filled slot, so predictions at 0..60 s give 61 slots. Predictions
/// must belong to `session` and be sorted by time within each task; two
/// predictions landing in one slot raise ContractError.
TimelineDocument export_timeline(const std::string& session, std::span<const PredictionRecord> predictions,
                                 std::span<const EventAnnotation> annotations, const TimelineOptions& options = {});

std::string render_timeline(const TimelineDocument& doc);
/// Throws FormatError citing the line for anything that is not a
/// well-formed version-1 document.
TimelineDocument parse_timeline(std::string_view text, const std::string& source = "<timeline>");

}  // namespace gazefuse
