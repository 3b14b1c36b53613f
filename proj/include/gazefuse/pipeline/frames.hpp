#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gazefuse/features/toy_backbone.hpp"
#include "gazefuse/task.hpp"

namespace gazefuse {

/// One frame file under the <root>/<session>/<view>/<timestamp_ms>.<ext> convention.
struct FrameFile {
  std::int64_t timestamp_ms = 0;
  std::filesystem::path path;
};

/// Frames of one session/view sorted by timestamp. Files whose stem is not
/// a non-negative integer are ignored. Throws LookupError when the
/// directory is missing and InputError when two files share a timestamp.
std::vector<FrameFile> list_frames(const std::filesystem::path& root, const std::string& session, View view);

/// A tick on the reference clock with the frame chosen from each view.
struct FramePair {
  double tick_s = 0.0;
  double time_a = 0.0;  // reference-view frame timestamp
  double time_b = 0.0;  // other-view frame timestamp, on its own clock

  bool operator==(const FramePair&) const = default;
};

struct FrameIndex {
  std::string session;
  View reference = View::Infant;
  double offset_s = 0.0;
  double rate_hz = 1.0;
  std::vector<FramePair> pairs;

  View other() const { return reference == View::Infant ? View::Parent : View::Infant; }
};

/// Samples ticks t = k / rate_hz (k = 0, 1, ...) up to the last reference
/// frame. For each tick the nearest reference frame to t and the nearest
/// other-view frame to t + offset_s are chosen (earlier frame on a tie);
/// ticks where either lies more than 0.5 / rate_hz away are dropped.
/// Throws InputError for empty or non-increasing timestamp lists.
FrameIndex sample_frames(const std::string& session, std::span<const double> reference_times,
                         std::span<const double> other_times, double offset_s, double rate_hz = 1.0,
                         View reference = View::Infant);

struct HeadBoxRecord {
  std::string session;
  View view = View::Infant;
  double timestamp_s = 0.0;
  HeadBox box;
  double confidence = 0.0;

  bool operator==(const HeadBoxRecord&) const = default;
};

/// Header: session,view,timestamp_s,x0,y0,x1,y1,confidence
std::vector<HeadBoxRecord> read_head_manifest(std::istream& in, const std::string& source = "<manifest>");
std::vector<HeadBoxRecord> read_head_manifest(const std::filesystem::path& path);
void write_head_manifest(std::ostream& out, std::span<const HeadBoxRecord> records);

struct HeadPair {
  FramePair frames;
  HeadBox box_a;
  HeadBox box_b;
};

struct HeadFilterResult {
  std::vector<HeadPair> kept;
  std::size_t missing = 0;         // a view had no manifest record at that frame
  std::size_t low_confidence = 0;  // records present but below the threshold
};

/// Keeps a pair only when both views have a manifest record (matched on
/// session, view and millisecond timestamp) with confidence >= min_confidence.
HeadFilterResult filter_by_heads(const FrameIndex& index, std::span<const HeadBoxRecord> manifest,
                                 double min_confidence = 0.8);

}  // namespace gazefuse
