#include "gazefuse/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "gazefuse/error.hpp"
#include "gazefuse/rng.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse {

namespace {

struct Interval {
  double start, end;
};

// Sorted, overlap-free union of the given intervals.
std::vector<Interval> merge(std::vector<Interval> spans, std::vector<std::string>* warnings, Task task) {
  std::sort(spans.begin(), spans.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> out;
  for (const auto& s : spans) {
    if (!out.empty() && s.start <= out.back().end) {
      if (warnings) {
        warnings->push_back("overlapping confident " + to_string(task) + " events [" +
                            text::format_double(out.back().start) + ", " + text::format_double(out.back().end) +
                            "] and [" + text::format_double(s.start) + ", " + text::format_double(s.end) +
                            "] merged");
      }
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

bool covered(const std::vector<Interval>& spans, double t) {
  return std::any_of(spans.begin(), spans.end(), [t](const Interval& s) { return t >= s.start && t <= s.end; });
}

}  // namespace

LabelingResult label_frames(const std::string& session, std::span<const HeadPair> pairs,
                            std::span<const EventAnnotation> annotations, Task task) {
  LabelingResult result;
  std::vector<Interval> confident, ambiguous;
  for (const auto& e : annotations) {
    e.validate();
    if (e.event_type != task) continue;
    (e.quality == AnnotationQuality::Confident ? confident : ambiguous).push_back({e.start_s, e.end_s});
  }
  confident = merge(std::move(confident), &result.warnings, task);
  ambiguous = merge(std::move(ambiguous), nullptr, task);

  for (const auto& p : pairs) {
    DualFrameSample s;
    s.session = session;
    s.frames = p.frames;
    s.box_a = p.box_a;
    s.box_b = p.box_b;
    const double t = p.frames.tick_s;
    s.label = covered(confident, t) ? 1 : 0;
    if (covered(ambiguous, t)) {
      s.train_eligible = false;
      s.test_eligible = s.label == 1;
    }
    result.samples.push_back(std::move(s));
  }
  return result;
}

DatasetSplit temporal_split(std::span<const DualFrameSample> samples, std::span<const std::string> held_out_sessions,
                            Task task, double val_fraction) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in [0, 1)");
  if (samples.empty()) throw ConfigError("temporal_split: no samples (empty session list)");
  if (held_out_sessions.empty()) throw ConfigError("temporal_split: no held-out test sessions given");
  std::set<std::string> sessions;
  for (const auto& s : samples) sessions.insert(s.session);
  const std::set<std::string> held(held_out_sessions.begin(), held_out_sessions.end());
  for (const auto& h : held) {
    if (!sessions.count(h)) throw ConfigError("held-out session '" + h + "' does not occur in the data");
  }

  DatasetSplit split;
  split.task = task;
  auto by_time = [](const DualFrameSample& a, const DualFrameSample& b) { return a.frames.tick_s < b.frames.tick_s; };
  for (const auto& session : sessions) {
    std::vector<DualFrameSample> pool;
    const bool is_test = held.count(session) > 0;
    for (const auto& s : samples) {
      if (s.session == session && (is_test ? s.test_eligible : s.train_eligible)) pool.push_back(s);
    }
    std::stable_sort(pool.begin(), pool.end(), by_time);
    if (is_test) {
      split.test.insert(split.test.end(), pool.begin(), pool.end());
      continue;
    }
    // The epsilon keeps exact products such as 0.1 * 100 from rounding up to 11.
    const auto n_val = static_cast<std::size_t>(std::ceil(val_fraction * static_cast<double>(pool.size()) - 1e-9));
    split.validation.insert(split.validation.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.insert(split.train.end(), pool.begin() + static_cast<std::ptrdiff_t>(n_val), pool.end());
  }
  return split;
}

std::vector<DualFrameSample> balance_test(std::span<const DualFrameSample> test, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < test.size(); ++i) (test[i].label == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    throw BalancingError("cannot balance the test set: " + std::to_string(pos.size()) + " positive and " +
                         std::to_string(neg.size()) + " negative samples");
  }
  auto& majority = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  Rng rng(seed, "balance");
  rng.shuffle(majority);
  majority.resize(keep);
  std::vector<std::size_t> chosen(pos);
  chosen.insert(chosen.end(), neg.begin(), neg.end());
  std::sort(chosen.begin(), chosen.end());
  std::vector<DualFrameSample> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back(test[i]);
  return out;
}

namespace {

constexpr std::string_view kSampleHeader =
    "session,tick_s,time_a_s,time_b_s,label,train_eligible,test_eligible,a_x0,a_y0,a_x1,a_y1,b_x0,b_y0,b_x1,b_y1";

void write_sample_fields(std::ostream& out, const DualFrameSample& s) {
  using text::format_double;
  out << text::csv_escape(s.session) << ',' << format_double(s.frames.tick_s) << ',' << format_double(s.frames.time_a)
      << ',' << format_double(s.frames.time_b) << ',' << s.label << ',' << int(s.train_eligible) << ','
      << int(s.test_eligible);
  for (const auto* b : {&s.box_a, &s.box_b}) {
    out << ',' << format_double(b->x0) << ',' << format_double(b->y0) << ',' << format_double(b->x1) << ','
        << format_double(b->y1);
  }
}

bool parse_flag(const std::string& f, const char* what) {
  if (f == "0" || f == "1") return f == "1";
  throw FormatError(std::string(what) + ": expected 0 or 1, got '" + f + "'");
}

DualFrameSample parse_sample_fields(const std::vector<std::string>& f, std::size_t first) {
  DualFrameSample s;
  s.session = f[first];
  s.frames.tick_s = text::parse_double(f[first + 1], "tick_s");
  s.frames.time_a = text::parse_double(f[first + 2], "time_a_s");
  s.frames.time_b = text::parse_double(f[first + 3], "time_b_s");
  s.label = parse_flag(f[first + 4], "label") ? 1 : 0;
  s.train_eligible = parse_flag(f[first + 5], "train_eligible");
  s.test_eligible = parse_flag(f[first + 6], "test_eligible");
  auto box = [&](std::size_t at) {
    HeadBox b{text::parse_double(f[at], "x0"), text::parse_double(f[at + 1], "y0"),
              text::parse_double(f[at + 2], "x1"), text::parse_double(f[at + 3], "y1")};
    b.validate();
    return b;
  };
  s.box_a = box(first + 7);
  s.box_b = box(first + 11);
  return s;
}

template <typename Fn>
void with_line(const std::string& source, std::size_t line, Fn fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    throw FormatError(text::at_line(source, line, e.what()));
  } catch (const InputError& e) {
    throw InputError(text::at_line(source, line, e.what()));
  }
}

}  // namespace

void write_samples_csv(std::ostream& out, std::span<const DualFrameSample> samples) {
  out << kSampleHeader << '\n';
  for (const auto& s : samples) {
    write_sample_fields(out, s);
    out << '\n';
  }
}

std::vector<DualFrameSample> read_samples_csv(std::istream& in, const std::string& source) {
  std::vector<DualFrameSample> out;
  for (const auto& row : text::read_csv(in, kSampleHeader, source)) {
    with_line(source, row.line, [&] { out.push_back(parse_sample_fields(row.fields, 0)); });
  }
  return out;
}

void write_split_csv(std::ostream& out, const DatasetSplit& split) {
  out << "# task=" << to_string(split.task) << '\n' << "split," << kSampleHeader << '\n';
  const std::pair<const char*, const std::vector<DualFrameSample>*> parts[] = {
      {"train", &split.train}, {"validation", &split.validation}, {"test", &split.test}};
  for (const auto& [name, part] : parts) {
    for (const auto& s : *part) {
      out << name << ',';
      write_sample_fields(out, s);
      out << '\n';
    }
  }
}

DatasetSplit read_split_csv(std::istream& in, const std::string& source) {
  std::string first;
  if (!std::getline(in, first) || !first.starts_with("# task=")) {
    throw FormatError(text::at_line(source, 1, "expected '# task=MG' or '# task=JA'"));
  }
  DatasetSplit split;
  with_line(source, 1, [&] { split.task = parse_task(first.substr(7)); });
  const std::string header = "split," + std::string(kSampleHeader);
  for (const auto& row : text::read_csv(in, header, source)) {
    const std::size_t line = row.line + 1;
    with_line(source, line, [&] {
      auto s = parse_sample_fields(row.fields, 1);
      const auto& name = row.fields[0];
      if (name == "train") split.train.push_back(std::move(s));
      else if (name == "validation") split.validation.push_back(std::move(s));
      else if (name == "test") split.test.push_back(std::move(s));
      else throw FormatError("unknown split '" + name + "'");
    });
  }
  return split;
}

std::vector<TrainingExample> load_examples(const FeatureStore& store, std::span<const DualFrameSample> samples,
                                           View reference) {
  const View other = reference == View::Infant ? View::Parent : View::Infant;
  std::vector<TrainingExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto a = store.read(s.session, reference, s.frames.time_a);
    const auto b = store.read(s.session, other, s.frames.time_b);
    out.push_back({a.as_tensor(), b.as_tensor(), static_cast<float>(s.label)});
  }
  return out;
}

}  // namespace gazefuse
