#include "gazefuse/eval/timeline.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "gazefuse/error.hpp"
#include "gazefuse/features/feature_store.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse {

namespace {

constexpr std::string_view kMagic = "GAZEFUSE-TIMELINE";

}  // namespace

TimelineDocument export_timeline(const std::string& session, std::span<const PredictionRecord> predictions,
                                 std::span<const EventAnnotation> annotations, const TimelineOptions& options) {
  validate_session_id(session);
  if (!(options.window_s > 0.0)) throw ConfigError("timeline window must be > 0 s");
  TimelineDocument doc;
  doc.session = session;
  doc.window_s = options.window_s;
  doc.threshold = options.threshold;

  std::map<Task, std::map<std::size_t, double>> filled;
  std::map<Task, double> last_time;
  for (const auto& p : predictions) {
    p.validate();
    if (p.session != session) {
      throw ContractError("export_timeline: prediction for session '" + p.session + "' in the timeline of '" +
                          session + "'");
    }
    if (auto it = last_time.find(p.task); it != last_time.end() && p.timestamp_s < it->second) {
      throw ContractError("export_timeline: predictions are not sorted by time");
    }
    last_time[p.task] = p.timestamp_s;
    const auto slot = static_cast<std::size_t>(std::llround(p.timestamp_s));
    if (!filled[p.task].emplace(slot, p.probability).second) {
      throw ContractError("export_timeline: two " + to_string(p.task) + " predictions fall in the slot at " +
                          std::to_string(slot) + " s");
    }
    doc.slots = std::max(doc.slots, slot + 1);
  }

  for (Task task : {Task::MutualGaze, Task::JointAttention}) {
    TimelineTrack track{task, {}, {}};
    for (const auto& a : annotations) {
      if (a.event_type == task) track.intervals.push_back(a);
    }
    const auto f = filled.find(task);
    if (track.intervals.empty() && f == filled.end()) continue;
    track.probabilities.assign(doc.slots, std::nullopt);
    if (f != filled.end()) {
      for (const auto& [slot, prob] : f->second) track.probabilities[slot] = prob;
    }
    doc.tracks.push_back(std::move(track));
  }
  return doc;
}

std::string render_timeline(const TimelineDocument& doc) {
  using text::format_double;
  std::ostringstream out;
  out << kMagic << ' ' << doc.version << '\n'
      << "session " << doc.session << '\n'
      << "window_s " << format_double(doc.window_s) << '\n'
      << "threshold " << format_double(doc.threshold) << '\n'
      << "slots " << doc.slots << '\n';
  for (const auto& track : doc.tracks) {
    out << "task " << to_string(track.task) << '\n';
    for (const auto& e : track.intervals) {
      out << "interval " << format_double(e.start_s) << ' ' << format_double(e.end_s) << ' '
          << format_double(e.duration_s) << ' ' << to_string(e.quality) << '\n';
    }
    for (std::size_t k = 0; k < track.probabilities.size(); ++k) {
      out << "p " << k << ' ';
      if (track.probabilities[k]) out << format_double(*track.probabilities[k]);
      else out << '-';
      out << '\n';
    }
    out << "end_task\n";
  }
  out << "end\n";
  return out.str();
}

namespace {

class LineReader {
 public:
  LineReader(std::string_view text, const std::string& source) : text_(text), source_(source) {}

  // Next line split into its keyword and the rest.
  std::pair<std::string, std::string> next() {
    if (pos_ >= text_.size()) fail("unexpected end of document");
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) fail("missing final newline");
    std::string line(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    ++line_;
    const auto space = line.find(' ');
    if (space == std::string::npos) return {line, ""};
    return {line.substr(0, space), line.substr(space + 1)};
  }

  std::string expect(std::string_view keyword) {
    auto [key, rest] = next();
    if (key != keyword) fail("expected '" + std::string(keyword) + "', found '" + key + "'");
    return rest;
  }

  bool at_end() const { return pos_ == text_.size(); }

  [[noreturn]] void fail(const std::string& message) const {
    throw FormatError(text::at_line(source_, line_, message));
  }

  template <typename Fn>
  auto guarded(Fn fn) const {
    try {
      return fn();
    } catch (const Error& e) {
      fail(e.what());
    }
  }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string part; in >> part;) out.push_back(part);
  return out;
}

}  // namespace

TimelineDocument parse_timeline(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  TimelineDocument doc;
  const auto version = r.expect(kMagic);
  if (version != std::to_string(kTimelineVersion)) r.fail("unsupported timeline version '" + version + "'");
  doc.session = r.expect("session");
  r.guarded([&] { validate_session_id(doc.session); });
  const auto window = r.expect("window_s");
  doc.window_s = r.guarded([&] { return text::parse_double(window, "window_s"); });
  const auto threshold = r.expect("threshold");
  doc.threshold = r.guarded([&] { return text::parse_double(threshold, "threshold"); });
  const auto slot_text = r.expect("slots");
  const auto slots = r.guarded([&] { return text::parse_int(slot_text, "slots"); });
  if (slots < 0) r.fail("slots must be >= 0");
  doc.slots = static_cast<std::size_t>(slots);

  for (;;) {
    auto [key, rest] = r.next();
    if (key == "end") break;
    if (key != "task") r.fail("expected 'task' or 'end', found '" + key + "'");
    TimelineTrack track;
    track.task = r.guarded([&] { return parse_task(rest); });
    if (!doc.tracks.empty() && doc.tracks.back().task >= track.task) r.fail("tracks out of order or repeated");
    for (;;) {
      auto [k, v] = r.next();
      if (k == "end_task") break;
      const auto parts = split_spaces(v);
      if (k == "interval") {
        if (!track.probabilities.empty()) r.fail("interval after probability slots");
        if (parts.size() != 4) r.fail("interval needs start, end, duration and quality");
        track.intervals.push_back(r.guarded([&] {
          EventAnnotation e{track.task, text::parse_double(parts[0], "start_s"), text::parse_double(parts[1], "end_s"),
                            text::parse_double(parts[2], "duration_s"), parse_quality(parts[3])};
          e.validate();
          return e;
        }));
      } else if (k == "p") {
        if (parts.size() != 2) r.fail("slot line needs an index and a value");
        const auto index = r.guarded([&] { return text::parse_int(parts[0], "slot"); });
        if (index != static_cast<std::int64_t>(track.probabilities.size())) r.fail("slot index out of sequence");
        if (parts[1] == "-") {
          track.probabilities.emplace_back();
        } else {
          const double p = r.guarded([&] { return text::parse_double(parts[1], "probability"); });
          if (!(p >= 0.0 && p <= 1.0)) r.fail("probability outside [0, 1]");
          track.probabilities.emplace_back(p);
        }
      } else {
        r.fail("unexpected '" + k + "' inside a task block");
      }
    }
    if (track.probabilities.size() != doc.slots) r.fail("task block has the wrong number of slots");
    doc.tracks.push_back(std::move(track));
  }
  if (!r.at_end()) r.fail("content after 'end'");
  return doc;
}

}  // namespace gazefuse
