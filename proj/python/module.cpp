#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gazefuse/cli/commands.hpp"
#include "gazefuse/cli/config.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/eval/metrics.hpp"
#include "gazefuse/eval/predictions.hpp"
#include "gazefuse/eval/timeline.hpp"
#include "gazefuse/features/toy_backbone.hpp"
#include "gazefuse/model/fusion.hpp"
#include "gazefuse/optim/loss.hpp"
#include "gazefuse/pipeline/audio.hpp"
#include "gazefuse/pipeline/dataset.hpp"
#include "gazefuse/version.hpp"

namespace py = pybind11;
using namespace gazefuse;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor tensor_from(const FloatArray& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D (tokens x features) array");
  const auto* p = a.data();
  return Tensor({static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))},
                std::vector<float>(p, p + a.size()));
}

nlohmann::json to_nlohmann(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return nlohmann::json::parse(text);
}

FusionModelConfig fusion_config_from(const py::object& overrides) {
  if (overrides.is_none()) return {};
  nlohmann::json j{{"model", {{"fusion", to_nlohmann(overrides)}}}};
  auto config = cli::config_from_json(j).fusion;
  config.validate();
  return config;
}

py::dict fusion_config_dict(const FusionModelConfig& c) {
  cli::ProjectConfig p;
  p.fusion = c;
  const auto j = cli::to_json(p)["model"]["fusion"].dump();
  return py::module_::import("json").attr("loads")(j);
}

PredictionRecord prediction_from(const py::dict& d) {
  PredictionRecord r;
  r.session = d["session"].cast<std::string>();
  r.timestamp_s = d["timestamp_s"].cast<double>();
  r.task = parse_task(d["task"].cast<std::string>());
  r.probability = d["probability"].cast<double>();
  if (d.contains("label") && !d["label"].is_none()) r.label = d["label"].cast<int>();
  r.validate();
  return r;
}

py::dict prediction_dict(const PredictionRecord& r) {
  py::dict d;
  d["session"] = r.session;
  d["timestamp_s"] = r.timestamp_s;
  d["task"] = to_string(r.task);
  d["probability"] = r.probability;
  d["label"] = r.label ? py::object(py::int_(*r.label)) : py::object(py::none());
  return d;
}

}  // namespace

PYBIND11_MODULE(_gazefuse, m) {
  m.doc() = "Core operations of the gazefuse pipeline";
  m.attr("__version__") = kVersion;

  static py::exception<Error> base(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<ContractError>(m, "ContractError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<LowConfidenceError>(m, "LowConfidenceError", base.ptr());
  py::register_exception<BalancingError>(m, "BalancingError", base.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("accuracy", &MetricReport::accuracy)
      .def_readonly("precision", &MetricReport::precision)
      .def_readonly("recall", &MetricReport::recall)
      .def_readonly("f1", &MetricReport::f1)
      .def_readonly("roc_auc", &MetricReport::roc_auc)
      .def_readonly("threshold", &MetricReport::threshold)
      .def_readonly("sample_count", &MetricReport::sample_count)
      .def_property_readonly("task", [](const MetricReport& r) { return to_string(r.task); })
      .def("__repr__", [](const MetricReport& r) {
        std::ostringstream s;
        s << "MetricReport(accuracy=" << r.accuracy << ", precision=" << r.precision << ", recall=" << r.recall
          << ", f1=" << r.f1 << ")";
        return s.str();
      });

  m.def(
      "threshold_metrics",
      [](const std::vector<double>& scores, const std::vector<int>& labels, double threshold, const std::string& task) {
        auto r = threshold_metrics(scores, labels, threshold);
        r.task = parse_task(task);
        return r;
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5, py::arg("task") = "MG",
      "Accuracy, precision, recall and F1 with scores >= threshold predicted positive.");

  m.def(
      "roc_auc", [](const std::vector<double>& s, const std::vector<int>& l) { return roc_auc(s, l); },
      py::arg("scores"), py::arg("labels"), "Rank-statistic ROC AUC with midranks for ties.");

  m.def(
      "aggregate_runs",
      [](const std::vector<MetricReport>& reports) {
        const auto agg = aggregate_runs(reports);
        py::dict out;
        for (const auto& [metric, s] : agg.metrics) out[py::str(to_string(metric))] = py::make_tuple(s.mean, s.min, s.max);
        return py::make_tuple(out, render_aggregate_csv(agg));
      },
      py::arg("reports"), "Per-metric (mean, min, max) plus the rendered error-bar CSV.");

  m.def(
      "bce_with_logits",
      [](const std::vector<float>& logits, const std::vector<float>& targets) {
        NoGradGuard guard;
        return bce_with_logits(Tensor({logits.size()}, logits), std::span<const float>(targets)).item();
      },
      py::arg("logits"), py::arg("targets"), "Mean binary cross-entropy on raw logits.");

  m.def(
      "estimate_audio_offset",
      [](const FloatArray& a, const FloatArray& b, std::uint32_t rate, double max_lag_s, double min_confidence) {
        SyncConfig config;
        config.max_lag_s = max_lag_s;
        config.min_confidence = min_confidence;
        PcmAudio pa{{a.data(), a.data() + a.size()}, rate}, pb{{b.data(), b.data() + b.size()}, rate};
        py::gil_scoped_release release;
        const auto est = estimate_audio_offset(pa, pb, config);
        py::gil_scoped_acquire acquire;
        py::dict out;
        out["offset_s"] = est.offset_s;
        out["confidence"] = est.confidence;
        out["low_confidence"] = est.low_confidence;
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("sample_rate"), py::arg("max_lag_s") = 5.0,
      py::arg("min_confidence") = 0.5,
      "Offset of stream b relative to stream a in seconds (event time in b minus time in a).");

  m.def(
      "toy_backbone_extract",
      [](const FloatArray& image, std::tuple<double, double, double, double> box, std::size_t grid,
         std::size_t out_dim, std::uint64_t seed) {
        if (image.ndim() != 3 || image.shape(2) != 3) throw DimensionError("image must be H x W x 3");
        RgbImage img;
        img.height = static_cast<std::size_t>(image.shape(0));
        img.width = static_cast<std::size_t>(image.shape(1));
        img.pixels.assign(image.data(), image.data() + image.size());
        const auto [x0, y0, x1, y1] = box;
        const auto seq = toy_backbone_extract(img, {x0, y0, x1, y1}, {grid, out_dim, seed});
        py::array_t<float> out({seq.n_tokens, seq.dim});
        std::copy(seq.values.begin(), seq.values.end(), out.mutable_data());
        return out;
      },
      py::arg("image"), py::arg("box"), py::arg("grid") = 8, py::arg("out_dim") = 64, py::arg("seed") = 0,
      "Deterministic stand-in backbone over an H x W x 3 image in [0, 1]; box is normalized (x0, y0, x1, y1).");

  py::class_<FusionModel>(m, "FusionModel")
      .def(py::init([](const py::object& config, std::uint64_t seed) {
             return std::make_unique<FusionModel>(fusion_config_from(config), seed);
           }),
           py::arg("config") = py::none(), py::arg("seed") = 0)
      .def(
          "predict",
          [](const FusionModel& model, const FloatArray& a, const FloatArray& b) {
            NoGradGuard guard;
            const double z = model.forward(tensor_from(a), tensor_from(b), {}).item();
            return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
          },
          py::arg("view_a"), py::arg("view_b"), "Eval-mode probability for one pair of token matrices.")
      .def_property_readonly("parameter_count", [](const FusionModel& m) { return m.parameters().scalar_count(); })
      .def_property_readonly("config", [](const FusionModel& m) { return fusion_config_dict(m.fusion_config()); });

  m.def(
      "balance_labels",
      [](const std::vector<int>& labels, std::uint64_t seed) {
        std::vector<DualFrameSample> samples(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
          samples[i].session = "s";
          samples[i].frames.tick_s = static_cast<double>(i);
          samples[i].label = labels[i];
        }
        std::vector<std::size_t> kept;
        for (const auto& s : balance_test(samples, seed)) kept.push_back(static_cast<std::size_t>(s.frames.tick_s));
        return kept;
      },
      py::arg("labels"), py::arg("seed"), "Indices kept when the majority class is downsampled to the minority.");

  m.def(
      "read_predictions",
      [](const std::string& text) {
        std::istringstream in(text);
        py::list out;
        for (const auto& r : read_predictions(in)) out.append(prediction_dict(r));
        return out;
      },
      py::arg("text"), "Parse prediction CSV text into a list of dicts.");

  m.def(
      "write_predictions",
      [](const std::vector<py::dict>& rows) {
        std::vector<PredictionRecord> records;
        for (const auto& d : rows) records.push_back(prediction_from(d));
        std::ostringstream out;
        write_predictions(out, records);
        return out.str();
      },
      py::arg("rows"), "Render prediction dicts as CSV text.");

  m.def(
      "export_timeline",
      [](const std::string& session, const std::vector<py::dict>& predictions, const std::string& annotations_csv,
         double window_s, double threshold) {
        std::vector<PredictionRecord> records;
        for (const auto& d : predictions) records.push_back(prediction_from(d));
        std::istringstream in(annotations_csv);
        const auto events = annotations_csv.empty() ? std::vector<EventAnnotation>{} : read_annotations(in);
        return render_timeline(export_timeline(session, records, events, {window_s, threshold}));
      },
      py::arg("session"), py::arg("predictions"), py::arg("annotations_csv") = "", py::arg("window_s") = 15.0,
      py::arg("threshold") = 0.5, "Timeline document text for one session.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a gazefuse command; returns (exit_code, stdout, stderr).");
}
