#include "gazefuse/eval/predictions.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "gazefuse/error.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse {

namespace {

constexpr std::string_view kHeader = "session,timestamp_s,task,probability,label";
constexpr std::string_view kHeaderNoLabel = "session,timestamp_s,task,probability";

}  // namespace

void PredictionRecord::validate() const {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw InputError("probability " + text::format_double(probability) + " is outside [0, 1]");
  }
  if (label && *label != 0 && *label != 1) throw InputError("label must be 0 or 1");
  if (!(timestamp_s >= 0.0)) throw InputError("timestamp_s must be >= 0");
}

std::vector<PredictionRecord> read_predictions(std::istream& in, const std::string& source) {
  // Peek the header to decide between the two accepted layouts.
  const auto start = in.tellg();
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(start);
  if (first.starts_with("\xEF\xBB\xBF")) first.erase(0, 3);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  const bool has_label = first != kHeaderNoLabel;

  std::vector<PredictionRecord> out;
  for (const auto& row : text::read_csv(in, has_label ? kHeader : kHeaderNoLabel, source)) {
    const auto& f = row.fields;
    try {
      PredictionRecord r;
      r.session = f[0];
      r.timestamp_s = text::parse_double(f[1], "timestamp_s");
      r.task = parse_task(f[2]);
      r.probability = text::parse_double(f[3], "probability");
      if (has_label && !f[4].empty()) {
        if (f[4] != "0" && f[4] != "1") throw InputError("label must be 0, 1 or empty, got '" + f[4] + "'");
        r.label = f[4] == "1" ? 1 : 0;
      }
      r.validate();
      out.push_back(std::move(r));
    } catch (const FormatError& e) {
      throw FormatError(text::at_line(source, row.line, e.what()));
    } catch (const InputError& e) {
      throw InputError(text::at_line(source, row.line, e.what()));
    }
  }
  return out;
}

std::vector<PredictionRecord> import_external_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open prediction file " + path.string());
  return read_predictions(in, path.string());
}

void write_predictions(std::ostream& out, std::span<const PredictionRecord> records) {
  out << kHeader << '\n';
  for (const auto& r : records) {
    out << text::csv_escape(r.session) << ',' << text::format_double(r.timestamp_s) << ',' << to_string(r.task) << ','
        << text::format_double(r.probability) << ',';
    if (r.label) out << *r.label;
    out << '\n';
  }
}

MetricReport score_predictions(std::span<const PredictionRecord> records, double threshold, std::uint64_t seed) {
  if (records.empty()) throw ContractError("score_predictions: no predictions");
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& r : records) {
    if (r.task != records.front().task) throw ContractError("score_predictions: predictions mix MG and JA rows");
    if (!r.label) {
      throw ContractError("score_predictions: row for " + r.session + " at " + text::format_double(r.timestamp_s) +
                          " s has no label");
    }
    scores.push_back(r.probability);
    labels.push_back(*r.label);
  }
  auto report = threshold_metrics(scores, labels, threshold);
  report.task = records.front().task;
  report.seed = seed;
  return report;
}

}  // namespace gazefuse
