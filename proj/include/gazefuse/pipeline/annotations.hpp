#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gazefuse/task.hpp"

namespace gazefuse {

enum class AnnotationQuality : unsigned char { Confident, Ambiguous };

std::string to_string(AnnotationQuality q);
AnnotationQuality parse_quality(std::string_view text);

/// A labeled behavioral interval, in seconds on the reference clock.
struct EventAnnotation {
  Task event_type = Task::MutualGaze;
  double start_s = 0.0;
  double end_s = 0.0;
  double duration_s = 0.0;
  AnnotationQuality quality = AnnotationQuality::Confident;

  /// Throws InputError unless start < end and duration matches end - start within 1 ms.
  void validate() const;
  bool operator==(const EventAnnotation&) const = default;
};

EventAnnotation make_event(Task type, double start_s, double end_s,
                           AnnotationQuality quality = AnnotationQuality::Confident);

/// Header: event_type,start_s,end_s,duration_s,quality. Row problems are
/// reported with their line number (FormatError for unparsable fields,
/// InputError for invalid intervals).
std::vector<EventAnnotation> read_annotations(std::istream& in, const std::string& source = "<annotations>");
std::vector<EventAnnotation> read_annotations(const std::filesystem::path& path);
/// Seconds are written in shortest round-trip form, so write -> read -> write is byte-stable.
void write_annotations(std::ostream& out, std::span<const EventAnnotation> events);

}  // namespace gazefuse
