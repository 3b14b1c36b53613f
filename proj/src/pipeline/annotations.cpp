#include "gazefuse/pipeline/annotations.hpp"

#include <cmath>
#include <fstream>

#include "gazefuse/error.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse {

namespace {
constexpr std::string_view kHeader = "event_type,start_s,end_s,duration_s,quality";
}

std::string to_string(AnnotationQuality q) { return q == AnnotationQuality::Confident ? "confident" : "ambiguous"; }

AnnotationQuality parse_quality(std::string_view text) {
  if (text == "confident") return AnnotationQuality::Confident;
  if (text == "ambiguous") return AnnotationQuality::Ambiguous;
  throw InputError("unknown annotation quality '" + std::string(text) + "' (expected confident or ambiguous)");
}

void EventAnnotation::validate() const {
  if (!std::isfinite(start_s) || !std::isfinite(end_s) || !(start_s < end_s)) {
    throw InputError("event " + to_string(event_type) + " [" + text::format_double(start_s) + ", " +
                     text::format_double(end_s) + "] needs start < end");
  }
  if (!(std::abs(duration_s - (end_s - start_s)) <= 1e-3)) {
    throw InputError("event " + to_string(event_type) + " duration " + text::format_double(duration_s) +
                     " does not match end - start = " + text::format_double(end_s - start_s));
  }
}

EventAnnotation make_event(Task type, double start_s, double end_s, AnnotationQuality quality) {
  EventAnnotation e{type, start_s, end_s, end_s - start_s, quality};
  e.validate();
  return e;
}

std::vector<EventAnnotation> read_annotations(std::istream& in, const std::string& source) {
  std::vector<EventAnnotation> events;
  for (const auto& row : text::read_csv(in, kHeader, source)) {
    const auto& f = row.fields;
    try {
      EventAnnotation e;
      e.event_type = parse_task(f[0]);
      e.start_s = text::parse_double(f[1], "start_s");
      e.end_s = text::parse_double(f[2], "end_s");
      e.duration_s = text::parse_double(f[3], "duration_s");
      e.quality = parse_quality(f[4]);
      e.validate();
      events.push_back(e);
    } catch (const FormatError& e) {
      throw FormatError(text::at_line(source, row.line, e.what()));
    } catch (const InputError& e) {
      throw InputError(text::at_line(source, row.line, e.what()));
    }
  }
  return events;
}

std::vector<EventAnnotation> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open annotation file " + path.string());
  return read_annotations(in, path.string());
}

void write_annotations(std::ostream& out, std::span<const EventAnnotation> events) {
  out << kHeader << '\n';
  for (const auto& e : events) {
    out << to_string(e.event_type) << ',' << text::format_double(e.start_s) << ',' << text::format_double(e.end_s)
        << ',' << text::format_double(e.duration_s) << ',' << to_string(e.quality) << '\n';
  }
}

}  // namespace gazefuse
