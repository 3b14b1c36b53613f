#include "gazefuse/pipeline/frames.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include "gazefuse/error.hpp"
#include "gazefuse/features/token_sequence.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse {

namespace fs = std::filesystem;

std::vector<FrameFile> list_frames(const fs::path& root, const std::string& session, View view) {
  const auto dir = root / session / to_string(view);
  if (!fs::is_directory(dir)) throw LookupError("no frame directory " + dir.string());
  std::vector<FrameFile> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto stem = entry.path().stem().string();
    if (stem.empty() || stem.size() > 18 || !std::all_of(stem.begin(), stem.end(), ::isdigit)) continue;
    frames.push_back({std::stoll(stem), entry.path()});
  }
  std::sort(frames.begin(), frames.end(), [](const FrameFile& a, const FrameFile& b) {
    return std::tie(a.timestamp_ms, a.path) < std::tie(b.timestamp_ms, b.path);
  });
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].timestamp_ms == frames[i - 1].timestamp_ms) {
      throw InputError("two frames share timestamp " + std::to_string(frames[i].timestamp_ms) + " ms in " +
                       dir.string());
    }
  }
  return frames;
}

namespace {

void check_times(std::span<const double> times, const char* which) {
  if (times.empty()) throw InputError(std::string("sample_frames: ") + which + " view has no frames");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InputError(std::string("sample_frames: ") + which + " timestamps are not strictly increasing at index " +
                       std::to_string(i));
    }
  }
}

// Index of the frame nearest to t; the earlier one wins a tie.
std::size_t nearest(std::span<const double> times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  const auto hi = static_cast<std::size_t>(it - times.begin());
  return (t - times[hi - 1]) <= (times[hi] - t) ? hi - 1 : hi;
}

}  // namespace

FrameIndex sample_frames(const std::string& session, std::span<const double> reference_times,
                         std::span<const double> other_times, double offset_s, double rate_hz, View reference) {
  if (!(rate_hz > 0.0)) throw ConfigError("rate_hz must be > 0");
  check_times(reference_times, "reference");
  check_times(other_times, "other");
  FrameIndex index{session, reference, offset_s, rate_hz, {}};
  const double tolerance = 0.5 / rate_hz;
  // Small slack so a final frame at exactly k / rate is not lost to rounding.
  const auto last_tick = static_cast<std::size_t>(std::floor(reference_times.back() * rate_hz + 1e-9));
  for (std::size_t k = 0; k <= last_tick; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    const double a = reference_times[nearest(reference_times, t)];
    const double b = other_times[nearest(other_times, t + offset_s)];
    if (std::abs(a - t) > tolerance || std::abs(b - (t + offset_s)) > tolerance) continue;
    index.pairs.push_back({t, a, b});
  }
  return index;
}

namespace {

constexpr std::string_view kManifestHeader = "session,view,timestamp_s,x0,y0,x1,y1,confidence";

}  // namespace

std::vector<HeadBoxRecord> read_head_manifest(std::istream& in, const std::string& source) {
  std::vector<HeadBoxRecord> records;
  for (const auto& row : text::read_csv(in, kManifestHeader, source)) {
    const auto& f = row.fields;
    try {
      HeadBoxRecord r;
      r.session = f[0];
      r.view = parse_view(f[1]);
      r.timestamp_s = text::parse_double(f[2], "timestamp_s");
      r.box = {text::parse_double(f[3], "x0"), text::parse_double(f[4], "y0"), text::parse_double(f[5], "x1"),
               text::parse_double(f[6], "y1")};
      r.confidence = text::parse_double(f[7], "confidence");
      r.box.validate();
      if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) throw InputError("confidence must lie in [0, 1]");
      records.push_back(std::move(r));
    } catch (const FormatError& e) {
      throw FormatError(text::at_line(source, row.line, e.what()));
    } catch (const InputError& e) {
      throw InputError(text::at_line(source, row.line, e.what()));
    }
  }
  return records;
}

std::vector<HeadBoxRecord> read_head_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open head manifest " + path.string());
  return read_head_manifest(in, path.string());
}

void write_head_manifest(std::ostream& out, std::span<const HeadBoxRecord> records) {
  out << kManifestHeader << '\n';
  for (const auto& r : records) {
    out << text::csv_escape(r.session) << ',' << to_string(r.view) << ',' << text::format_double(r.timestamp_s) << ','
        << text::format_double(r.box.x0) << ',' << text::format_double(r.box.y0) << ','
        << text::format_double(r.box.x1) << ',' << text::format_double(r.box.y1) << ','
        << text::format_double(r.confidence) << '\n';
  }
}

HeadFilterResult filter_by_heads(const FrameIndex& index, std::span<const HeadBoxRecord> manifest,
                                 double min_confidence) {
  std::map<std::pair<View, std::int64_t>, const HeadBoxRecord*> lookup;
  for (const auto& r : manifest) {
    if (r.session != index.session) continue;
    const auto key = std::make_pair(r.view, timestamp_ms(r.timestamp_s));
    // Several detections for one frame: keep the most confident.
    auto [it, inserted] = lookup.emplace(key, &r);
    if (!inserted && r.confidence > it->second->confidence) it->second = &r;
  }
  HeadFilterResult result;
  for (const auto& pair : index.pairs) {
    const auto a = lookup.find({index.reference, timestamp_ms(pair.time_a)});
    const auto b = lookup.find({index.other(), timestamp_ms(pair.time_b)});
    if (a == lookup.end() || b == lookup.end()) {
      ++result.missing;
    } else if (a->second->confidence < min_confidence || b->second->confidence < min_confidence) {
      ++result.low_confidence;
    } else {
      result.kept.push_back({pair, a->second->box, b->second->box});
    }
  }
  return result;
}

}  // namespace gazefuse
