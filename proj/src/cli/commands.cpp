#include "gazefuse/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/cli/provenance.hpp"
#include "gazefuse/eval/predictions.hpp"
#include "gazefuse/eval/timeline.hpp"
#include "gazefuse/features/feature_store.hpp"
#include "gazefuse/features/image.hpp"
#include "gazefuse/model/checkpoint.hpp"
#include "gazefuse/pipeline/dataset.hpp"
#include "gazefuse/text.hpp"

namespace gazefuse::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

MissingArtifactError::MissingArtifactError(const fs::path& path, const std::string& producer)
    : LookupError("missing " + path.string() + "; run `gazefuse " + producer + "` first") {}

namespace {

std::string join_failures(const std::string& stage, const std::vector<std::string>& failures) {
  std::string msg = stage + " failed for " + std::to_string(failures.size()) + " item(s):";
  for (const auto& f : failures) msg += "\n  " + f;
  return msg;
}

std::string slug(Task task) { return task == Task::MutualGaze ? "mg" : "ja"; }

}  // namespace

PartialFailure::PartialFailure(const std::string& stage, const std::vector<std::string>& failures)
    : Error(join_failures(stage, failures)), failures_(failures) {}

Workspace::Workspace(ProjectConfig c) : config(std::move(c)) {}

fs::path Workspace::offsets() const { return config.work_dir / "offsets.csv"; }
fs::path Workspace::frame_index() const { return config.work_dir / "frame_index.csv"; }
fs::path Workspace::feature_root() const { return config.work_dir / "features"; }
fs::path Workspace::feature_index() const { return config.work_dir / "features" / "index.csv"; }
fs::path Workspace::task_dir(Task task) const { return config.work_dir / slug(task); }
fs::path Workspace::samples(Task task) const { return task_dir(task) / "samples.csv"; }
fs::path Workspace::split(Task task) const { return task_dir(task) / "split.csv"; }
fs::path Workspace::balanced_split(Task task) const { return task_dir(task) / "split_balanced.csv"; }
fs::path Workspace::checkpoint(Task task, std::uint64_t seed) const {
  return task_dir(task) / "runs" / ("seed_" + std::to_string(seed)) / "checkpoint.gfck";
}
fs::path Workspace::history(Task task, std::uint64_t seed) const {
  return task_dir(task) / "runs" / ("seed_" + std::to_string(seed)) / "history.csv";
}
fs::path Workspace::eval_dir(Task task) const { return task_dir(task) / "eval"; }
fs::path Workspace::predictions(Task task) const { return task_dir(task) / "predictions.csv"; }
fs::path Workspace::timeline(const std::string& session) const {
  return config.work_dir / "timelines" / (session + ".timeline");
}
fs::path Workspace::external_dir() const { return config.work_dir / "external"; }
fs::path Workspace::bench(Task task) const { return task_dir(task) / "bench.json"; }

namespace {

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) throw MissingArtifactError(path, producer);
}

void require_input(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw LookupError("missing " + what + " " + path.string());
}

std::string read_text(const fs::path& path) { return io::read_file(path); }

ordered_json section(const ProjectConfig& c, std::initializer_list<const char*> keys) {
  const auto all = to_json(c);
  ordered_json out;
  for (const char* k : keys) out[k] = all.at(k);
  return out;
}

void emit(const Workspace& ws, const fs::path& path, const std::string& bytes, const std::string& command,
          std::vector<fs::path> inputs, ordered_json settings) {
  write_artifact(path, bytes, {command, std::move(inputs), std::move(settings)}, ws.config.work_dir);
}

// Runs fn over sessions with up to `workers` threads. Results come back in
// session order, so logs do not depend on scheduling.
template <typename R, typename Fn>
std::vector<std::pair<std::optional<R>, std::string>> for_sessions(const std::vector<std::string>& sessions,
                                                                    std::size_t workers, Fn fn) {
  std::vector<std::pair<std::optional<R>, std::string>> results(sessions.size());
  auto one = [&](std::size_t i) {
    try {
      results[i].first = fn(sessions[i]);
    } catch (const std::exception& e) {
      results[i].second = e.what();
    }
  };
  for (std::size_t start = 0; start < sessions.size(); start += workers) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = start; i < std::min(sessions.size(), start + workers); ++i) {
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, one, i));
    }
    for (auto& f : batch) f.get();
  }
  return results;
}

// --- offsets ---------------------------------------------------------------

struct OffsetRow {
  double offset_s = 0.0;
  double confidence = 0.0;
  bool low_confidence = false;
  std::string source;
};

constexpr std::string_view kOffsetsHeader = "session,offset_s,confidence,low_confidence,source";

std::map<std::string, OffsetRow> read_offsets(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::map<std::string, OffsetRow> rows;
  for (const auto& row : text::read_csv(in, kOffsetsHeader, path.string())) {
    const auto& f = row.fields;
    try {
      rows[f[0]] = {text::parse_double(f[1], "offset_s"), text::parse_double(f[2], "confidence"), f[3] == "1", f[4]};
    } catch (const FormatError& e) {
      throw FormatError(text::at_line(path.string(), row.line, e.what()));
    }
  }
  return rows;
}

// --- frame index -------------------------------------------------------------

constexpr std::string_view kIndexHeader = "session,tick_s,time_a_s,time_b_s";

std::map<std::string, FrameIndex> read_frame_index(const Workspace& ws) {
  require(ws.frame_index(), "sample");
  const auto offsets = read_offsets(ws.offsets());
  std::istringstream in(read_text(ws.frame_index()));
  std::map<std::string, FrameIndex> out;
  for (const auto& row : text::read_csv(in, kIndexHeader, ws.frame_index().string())) {
    const auto& f = row.fields;
    auto& idx = out[f[0]];
    if (idx.session.empty()) {
      idx.session = f[0];
      idx.reference = ws.config.reference_view;
      idx.rate_hz = ws.config.sample_rate_hz;
      if (auto it = offsets.find(f[0]); it != offsets.end()) idx.offset_s = it->second.offset_s;
    }
    try {
      idx.pairs.push_back({text::parse_double(f[1], "tick_s"), text::parse_double(f[2], "time_a_s"),
                           text::parse_double(f[3], "time_b_s")});
    } catch (const FormatError& e) {
      throw FormatError(text::at_line(ws.frame_index().string(), row.line, e.what()));
    }
  }
  return out;
}

std::vector<HeadBoxRecord> load_manifest(const Workspace& ws) {
  require_input(ws.config.head_manifest_path(), "head manifest");
  return read_head_manifest(ws.config.head_manifest_path());
}

std::map<std::int64_t, fs::path> frame_paths(const Workspace& ws, const std::string& session, View view) {
  std::map<std::int64_t, fs::path> out;
  for (auto& f : list_frames(ws.config.media_root, session, view)) out[f.timestamp_ms] = std::move(f.path);
  return out;
}

const fs::path& frame_at(const std::map<std::int64_t, fs::path>& frames, double t, const std::string& session,
                         View view) {
  const auto it = frames.find(timestamp_ms(t));
  if (it == frames.end()) {
    throw LookupError("no " + to_string(view) + " frame at " + std::to_string(timestamp_ms(t)) + " ms in session " +
                      session);
  }
  return it->second;
}

ordered_json metrics_json(const MetricReport& r) {
  ordered_json j;
  j["task"] = to_string(r.task);
  j["seed"] = r.seed;
  j["samples"] = r.sample_count;
  j["threshold"] = r.threshold;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["roc_auc"] = r.roc_auc ? ordered_json(*r.roc_auc) : ordered_json(nullptr);
  j["confusion"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}};
  return j;
}

std::vector<fs::path> annotation_inputs(const Workspace& ws) {
  std::vector<fs::path> out;
  for (const auto& s : ws.config.sessions) out.push_back(ws.config.annotations_path(s));
  return out;
}

// --- examples ----------------------------------------------------------------

Tensor raster(const fs::path& path) {
  const auto img = read_ppm(path);
  std::vector<float> chw(img.pixels.size());
  const std::size_t plane = img.width * img.height;
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) chw[c * plane + i] = img.pixels[i * 3 + c];
  }
  return Tensor({3, img.height, img.width}, std::move(chw));
}

std::vector<TrainingExample> load_set(const Workspace& ws, std::span<const DualFrameSample> samples) {
  if (ws.config.model == ModelChoice::Fusion) {
    require(ws.feature_index(), "featurize --backbone toy");
    return load_examples(FeatureStore(ws.feature_root()), samples, ws.config.reference_view);
  }
  const View ref = ws.config.reference_view;
  const View other = ref == View::Infant ? View::Parent : View::Infant;
  std::map<std::pair<std::string, View>, std::map<std::int64_t, fs::path>> cache;
  auto frames = [&](const std::string& s, View v) -> const auto& {
    auto key = std::make_pair(s, v);
    if (!cache.count(key)) cache[key] = frame_paths(ws, s, v);
    return cache[key];
  };
  std::vector<TrainingExample> out;
  for (const auto& s : samples) {
    out.push_back({raster(frame_at(frames(s.session, ref), s.frames.time_a, s.session, ref)),
                   raster(frame_at(frames(s.session, other), s.frames.time_b, s.session, other)),
                   static_cast<float>(s.label)});
  }
  return out;
}

std::unique_ptr<Classifier> make_model(const Workspace& ws, std::uint64_t seed) {
  if (ws.config.model == ModelChoice::Cnn) return std::make_unique<CnnBaseline>(ws.config.cnn, seed);
  return std::make_unique<FusionModel>(ws.config.fusion, seed);
}

void check_feature_shape(const Workspace& ws, const std::vector<TrainingExample>& examples) {
  if (ws.config.model != ModelChoice::Fusion || examples.empty()) return;
  const auto& shape = examples.front().view_a.shape();
  const auto& f = ws.config.fusion;
  if (shape[0] != f.tokens_per_view || shape[1] != f.feature_dim_in) {
    throw ConfigError("features have " + std::to_string(shape[0]) + " tokens of width " + std::to_string(shape[1]) +
                      " but model.fusion expects tokens_per_view=" + std::to_string(f.tokens_per_view) +
                      " and feature_dim_in=" + std::to_string(f.feature_dim_in));
  }
}

DatasetSplit load_split(const fs::path& path, const std::string& producer) {
  require(path, producer);
  std::istringstream in(read_text(path));
  return read_split_csv(in, path.string());
}

std::unique_ptr<Classifier> load_model(const Workspace& ws, Task task, std::uint64_t seed) {
  const auto path = ws.checkpoint(task, seed);
  require(path, "train --task " + slug(task) + " --seeds " + std::to_string(seed));
  return restore_classifier(load_checkpoint(path));
}

}  // namespace

// --- stages ------------------------------------------------------------------

void run_sync(const Workspace& ws, std::ostream& log) {
  const auto& c = ws.config;
  const View other = c.reference_view == View::Infant ? View::Parent : View::Infant;
  std::vector<fs::path> inputs;
  for (const auto& s : c.sessions) {
    if (c.manual_offsets.count(s)) continue;
    inputs.push_back(c.audio_path(s, c.reference_view));
    inputs.push_back(c.audio_path(s, other));
  }
  const auto results = for_sessions<OffsetRow>(c.sessions, c.workers, [&](const std::string& s) {
    if (auto it = c.manual_offsets.find(s); it != c.manual_offsets.end()) return OffsetRow{it->second, 1.0, false, "manual"};
    require_input(c.audio_path(s, c.reference_view), "audio");
    require_input(c.audio_path(s, other), "audio");
    const auto est = estimate_audio_offset(parse_wav(c.audio_path(s, c.reference_view)),
                                           parse_wav(c.audio_path(s, other)), c.sync);
    return OffsetRow{est.offset_s, est.confidence, est.low_confidence, "audio"};
  });

  std::ostringstream out;
  out << kOffsetsHeader << '\n';
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < c.sessions.size(); ++i) {
    const auto& s = c.sessions[i];
    if (!results[i].first) {
      failures.push_back(s + ": " + results[i].second);
      continue;
    }
    const auto& r = *results[i].first;
    out << s << ',' << text::format_double(r.offset_s) << ',' << text::format_double(r.confidence) << ','
        << int(r.low_confidence) << ',' << r.source << '\n';
    log << "sync " << s << ": offset " << text::format_fixed(r.offset_s, 3) << " s, confidence "
        << text::format_fixed(r.confidence, 3) << (r.low_confidence ? " (LOW: validate manually)" : "") << '\n';
  }
  emit(ws, ws.offsets(), out.str(), "sync", inputs, section(c, {"sessions", "reference_view", "sync"}));
  if (!failures.empty()) throw PartialFailure("sync", failures);
}

void run_sample(const Workspace& ws, std::ostream& log) {
  require(ws.offsets(), "sync");
  const auto& c = ws.config;
  const auto offsets = read_offsets(ws.offsets());
  const View other = c.reference_view == View::Infant ? View::Parent : View::Infant;

  const auto results = for_sessions<FrameIndex>(c.sessions, c.workers, [&](const std::string& s) {
    const auto it = offsets.find(s);
    if (it == offsets.end()) throw MissingArtifactError(ws.offsets(), "sync (no offset for session " + s + ")");
    if (it->second.low_confidence && !c.manual_offsets.count(s)) {
      throw LowConfidenceError("offset confidence " + text::format_fixed(it->second.confidence, 3) +
                               " is below sync.min_confidence; validate it and set sync.manual_offsets." + s);
    }
    auto times = [&](View v) {
      std::vector<double> t;
      for (const auto& f : list_frames(c.media_root, s, v)) t.push_back(static_cast<double>(f.timestamp_ms) / 1000.0);
      return t;
    };
    return sample_frames(s, times(c.reference_view), times(other), it->second.offset_s, c.sample_rate_hz,
                         c.reference_view);
  });

  std::ostringstream out;
  out << kIndexHeader << '\n';
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < c.sessions.size(); ++i) {
    if (!results[i].first) {
      failures.push_back(c.sessions[i] + ": " + results[i].second);
      continue;
    }
    for (const auto& p : results[i].first->pairs) {
      out << c.sessions[i] << ',' << text::format_double(p.tick_s) << ',' << text::format_double(p.time_a) << ','
          << text::format_double(p.time_b) << '\n';
    }
    log << "sample " << c.sessions[i] << ": " << results[i].first->pairs.size() << " synchronized ticks\n";
  }
  emit(ws, ws.frame_index(), out.str(), "sample", {ws.offsets()},
       section(c, {"sessions", "reference_view", "sampling"}));
  if (!failures.empty()) throw PartialFailure("sample", failures);
}

void run_featurize(const Workspace& ws, std::ostream& log) {
  const auto& c = ws.config;
  const auto index = read_frame_index(ws);
  const auto manifest = load_manifest(ws);
  const FeatureStore store(ws.feature_root());

  struct Written {
    std::vector<std::pair<FeatureKey, std::string>> records;  // key, sha256
    HeadFilterResult filter;
  };
  const auto results = for_sessions<Written>(c.sessions, c.workers, [&](const std::string& s) {
    Written w;
    const auto it = index.find(s);
    if (it == index.end()) return w;
    w.filter = filter_by_heads(it->second, manifest, c.min_head_confidence);
    const View ref = it->second.reference, other = it->second.other();
    const auto ref_frames = frame_paths(ws, s, ref), other_frames = frame_paths(ws, s, other);
    std::set<FeatureKey> done;
    for (const auto& pair : w.filter.kept) {
      const std::tuple<View, double, const HeadBox*, const std::map<std::int64_t, fs::path>*> views[] = {
          {ref, pair.frames.time_a, &pair.box_a, &ref_frames}, {other, pair.frames.time_b, &pair.box_b, &other_frames}};
      for (const auto& [view, t, box, frames] : views) {
        const FeatureKey key{s, view, timestamp_ms(t)};
        if (!done.insert(key).second) continue;
        auto seq = toy_backbone_extract(read_ppm(frame_at(*frames, t, s, view)), *box, c.backbone);
        seq.session = s;
        seq.view = view;
        seq.timestamp_s = t;
        store.write(seq);
        w.records.emplace_back(key, sha256_hex(encode_features(seq)));
      }
    }
    return w;
  });

  std::ostringstream out;
  out << "session,view,timestamp_ms,sha256\n";
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < c.sessions.size(); ++i) {
    if (!results[i].first) {
      failures.push_back(c.sessions[i] + ": " + results[i].second);
      continue;
    }
    auto records = results[i].first->records;
    std::sort(records.begin(), records.end());
    for (const auto& [key, hash] : records) {
      out << key.session << ',' << to_string(key.view) << ',' << key.timestamp_ms << ',' << hash << '\n';
    }
    const auto& f = results[i].first->filter;
    log << "featurize " << c.sessions[i] << ": " << f.kept.size() << " pairs kept, " << f.missing
        << " without a head box, " << f.low_confidence << " below head confidence " << c.min_head_confidence << '\n';
  }
  emit(ws, ws.feature_index(), out.str(), "featurize --backbone toy", {ws.frame_index(), c.head_manifest_path()},
       section(c, {"sampling", "backbone"}));
  if (!failures.empty()) throw PartialFailure("featurize", failures);
}

void run_dataset_build(const Workspace& ws, Task task, std::ostream& log) {
  require(ws.feature_index(), "featurize --backbone toy");
  const auto& c = ws.config;
  const auto index = read_frame_index(ws);
  const auto manifest = load_manifest(ws);
  std::vector<DualFrameSample> all;
  for (const auto& s : c.sessions) {
    const auto it = index.find(s);
    if (it == index.end()) continue;
    require_input(c.annotations_path(s), "annotation file");
    const auto events = read_annotations(c.annotations_path(s));
    const auto kept = filter_by_heads(it->second, manifest, c.min_head_confidence).kept;
    const auto labeled = label_frames(s, kept, events, task);
    for (const auto& w : labeled.warnings) log << "warning: " << s << ": " << w << '\n';
    const auto pos = std::count_if(labeled.samples.begin(), labeled.samples.end(),
                                   [](const auto& x) { return x.label == 1; });
    log << "dataset build " << to_string(task) << ' ' << s << ": " << labeled.samples.size() << " samples, " << pos
        << " positive\n";
    all.insert(all.end(), labeled.samples.begin(), labeled.samples.end());
  }
  std::ostringstream out;
  write_samples_csv(out, all);
  auto inputs = annotation_inputs(ws);
  inputs.insert(inputs.begin(), {ws.frame_index(), c.head_manifest_path(), ws.feature_index()});
  emit(ws, ws.samples(task), out.str(), "dataset build --task " + slug(task), inputs,
       section(c, {"sessions", "sampling"}));
}

void run_dataset_split(const Workspace& ws, Task task, std::ostream& log) {
  require(ws.samples(task), "dataset build --task " + slug(task));
  std::istringstream in(read_text(ws.samples(task)));
  const auto samples = read_samples_csv(in, ws.samples(task).string());
  const auto split = temporal_split(samples, ws.config.held_out_sessions, task, ws.config.val_fraction);
  std::ostringstream out;
  write_split_csv(out, split);
  emit(ws, ws.split(task), out.str(), "dataset split --task " + slug(task), {ws.samples(task)},
       section(ws.config, {"held_out_sessions", "split"}));
  log << "dataset split " << to_string(task) << ": " << split.train.size() << " train, " << split.validation.size()
      << " validation, " << split.test.size() << " test\n";
}

void run_dataset_balance(const Workspace& ws, Task task, std::ostream& log) {
  auto split = load_split(ws.split(task), "dataset split --task " + slug(task));
  const auto before = split.test.size();
  split.test = balance_test(split.test, ws.config.balance_seed);
  std::ostringstream out;
  write_split_csv(out, split);
  emit(ws, ws.balanced_split(task), out.str(), "dataset balance --task " + slug(task), {ws.split(task)},
       section(ws.config, {"split"}));
  log << "dataset balance " << to_string(task) << ": test " << before << " -> " << split.test.size() << " samples\n";
}

void run_train(const Workspace& ws, Task task, const std::vector<std::uint64_t>& seeds, std::ostream& log) {
  ws.config.training.validate();
  const auto split = load_split(ws.balanced_split(task), "dataset balance --task " + slug(task));
  const auto train_set = load_set(ws, split.train);
  const auto val_set = load_set(ws, split.validation);
  check_feature_shape(ws, train_set);
  std::vector<fs::path> inputs{ws.balanced_split(task)};
  if (ws.config.model == ModelChoice::Fusion) inputs.push_back(ws.feature_index());

  std::vector<std::string> failures;
  for (const auto seed : seeds) {
    try {
      auto model = make_model(ws, seed);
      auto config = ws.config.training;
      config.seed = seed;
      const auto result = train(*model, train_set, val_set, config, task);
      for (const auto& w : result.warnings) log << "warning: seed " << seed << ": " << w << '\n';
      auto settings = section(ws.config, {"model", "training", "eval"});
      settings["seed"] = seed;
      settings["task"] = to_string(task);
      emit(ws, ws.checkpoint(task, seed), encode_checkpoint(result.best), "train --task " + slug(task), inputs,
           settings);
      std::ostringstream history;
      write_history_csv(history, result.history);
      emit(ws, ws.history(task, seed), history.str(), "train --task " + slug(task), inputs, settings);
      log << "train " << to_string(task) << " seed " << seed << ": best epoch " << result.best.meta.epoch
          << ", validation F1 " << text::format_fixed(result.best.meta.val_f1, 3) << '\n';
    } catch (const std::exception& e) {
      failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  if (!failures.empty()) throw PartialFailure("train", failures);
}

AggregateReport run_eval(const Workspace& ws, Task task, const std::vector<std::uint64_t>& seeds, std::ostream& log) {
  const auto split = load_split(ws.balanced_split(task), "dataset balance --task " + slug(task));
  const auto test_set = load_set(ws, split.test);
  std::vector<MetricReport> reports;
  std::vector<fs::path> inputs{ws.balanced_split(task)};
  for (const auto seed : seeds) {
    const auto model = load_model(ws, task, seed);
    reports.push_back(evaluate(*model, test_set, ws.config.threshold, task, seed));
    inputs.push_back(ws.checkpoint(task, seed));
  }
  const auto aggregate = aggregate_runs(reports);

  std::ostringstream runs;
  runs << "seed,accuracy,precision,recall,f1,roc_auc,threshold,samples,tp,fp,fn,tn\n";
  ordered_json doc;
  doc["task"] = to_string(task);
  doc["runs"] = ordered_json::array();
  for (const auto& r : reports) {
    runs << r.seed << ',' << text::format_double(r.accuracy) << ',' << text::format_double(r.precision) << ','
         << text::format_double(r.recall) << ',' << text::format_double(r.f1) << ','
         << (r.roc_auc ? text::format_double(*r.roc_auc) : "") << ',' << text::format_double(r.threshold) << ','
         << r.sample_count << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn << ',' << r.counts.tn
         << '\n';
    doc["runs"].push_back(metrics_json(r));
  }
  ordered_json agg = ordered_json::object();
  for (const auto& [metric, spread] : aggregate.metrics) {
    agg[to_string(metric)] = {{"mean", spread.mean}, {"min", spread.min}, {"max", spread.max}};
  }
  doc["aggregate"] = agg;
  auto settings = section(ws.config, {"eval"});
  settings["seeds"] = seeds;
  const auto command = "eval --task " + slug(task);
  emit(ws, ws.eval_dir(task) / "runs.csv", runs.str(), command, inputs, settings);
  emit(ws, ws.eval_dir(task) / "aggregate.csv", render_aggregate_csv(aggregate), command, inputs, settings);
  emit(ws, ws.eval_dir(task) / "report.json", doc.dump(2) + "\n", command, inputs, settings);
  log << "eval " << to_string(task) << ": " << reports.size() << " run(s) on " << test_set.size()
      << " test samples\n"
      << render_aggregate_csv(aggregate);
  return aggregate;
}

void run_predict(const Workspace& ws, Task task, std::uint64_t seed, bool all_sessions, std::ostream& log) {
  require(ws.samples(task), "dataset build --task " + slug(task));
  std::istringstream in(read_text(ws.samples(task)));
  auto samples = read_samples_csv(in, ws.samples(task).string());
  const std::set<std::string> held(ws.config.held_out_sessions.begin(), ws.config.held_out_sessions.end());
  if (!all_sessions) std::erase_if(samples, [&](const auto& s) { return !held.count(s.session); });
  std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    return std::tie(a.session, a.frames.tick_s) < std::tie(b.session, b.frames.tick_s);
  });
  const auto model = load_model(ws, task, seed);
  const auto examples = load_set(ws, samples);
  const auto probs = predict_probabilities(*model, examples);
  std::vector<PredictionRecord> records;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    PredictionRecord r{samples[i].session, samples[i].frames.tick_s, task, probs[i], std::nullopt};
    if (samples[i].test_eligible) r.label = samples[i].label;
    records.push_back(std::move(r));
  }
  std::ostringstream out;
  write_predictions(out, records);
  std::vector<fs::path> inputs{ws.samples(task), ws.checkpoint(task, seed)};
  if (ws.config.model == ModelChoice::Fusion) inputs.push_back(ws.feature_index());
  ordered_json settings{{"seed", seed}, {"all_sessions", all_sessions}};
  settings["held_out_sessions"] = ws.config.held_out_sessions;
  emit(ws, ws.predictions(task), out.str(), "predict --task " + slug(task), inputs, settings);
  log << "predict " << to_string(task) << " seed " << seed << ": " << records.size() << " predictions\n";
}

std::vector<MetricReport> run_import_predictions(const Workspace& ws, const fs::path& input, const std::string& name,
                                                 std::ostream& log) {
  const auto records = import_external_predictions(input);
  validate_session_id(name);
  std::ostringstream out;
  write_predictions(out, records);
  const auto dir = ws.external_dir();
  emit(ws, dir / (name + ".csv"), out.str(), "import-predictions", {input}, ordered_json::object());

  std::vector<MetricReport> reports;
  ordered_json doc = ordered_json::object();
  for (Task task : {Task::MutualGaze, Task::JointAttention}) {
    std::vector<PredictionRecord> rows;
    for (const auto& r : records) {
      if (r.task == task && r.label) rows.push_back(r);
    }
    if (rows.empty()) continue;
    reports.push_back(score_predictions(rows, ws.config.threshold));
    doc[to_string(task)] = metrics_json(reports.back());
    log << "import-predictions " << name << ' ' << to_string(task) << ": " << rows.size() << " labeled rows, F1 "
        << text::format_fixed(reports.back().f1, 3) << '\n';
  }
  if (reports.empty()) log << "import-predictions " << name << ": " << records.size() << " rows, none labeled\n";
  emit(ws, dir / (name + ".metrics.json"), doc.dump(2) + "\n", "import-predictions", {input},
       section(ws.config, {"eval"}));
  return reports;
}

void run_export_timeline(const Workspace& ws, const std::vector<std::string>& sessions, std::ostream& log) {
  std::vector<PredictionRecord> all;
  std::vector<fs::path> inputs;
  for (Task task : {Task::MutualGaze, Task::JointAttention}) {
    if (!fs::exists(ws.predictions(task))) continue;
    const auto rows = import_external_predictions(ws.predictions(task));
    all.insert(all.end(), rows.begin(), rows.end());
    inputs.push_back(ws.predictions(task));
  }
  if (inputs.empty()) throw MissingArtifactError(ws.predictions(Task::MutualGaze), "predict --task mg|ja");
  const auto targets = sessions.empty() ? ws.config.held_out_sessions : sessions;
  for (const auto& s : targets) {
    std::vector<PredictionRecord> mine;
    for (const auto& r : all) {
      if (r.session == s) mine.push_back(r);
    }
    std::stable_sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.timestamp_s < b.timestamp_s; });
    require_input(ws.config.annotations_path(s), "annotation file");
    const auto events = read_annotations(ws.config.annotations_path(s));
    const auto doc = export_timeline(s, mine, events, {ws.config.timeline_window_s, ws.config.threshold});
    auto session_inputs = inputs;
    session_inputs.push_back(ws.config.annotations_path(s));
    emit(ws, ws.timeline(s), render_timeline(doc), "export-timeline", session_inputs, section(ws.config, {"eval"}));
    log << "export-timeline " << s << ": " << doc.slots << " slots, " << doc.tracks.size() << " track(s)\n";
  }
}

ThroughputReport run_bench(const Workspace& ws, Task task, std::uint64_t seed, const BenchOptions& options,
                           std::ostream& log) {
  const auto split = load_split(ws.balanced_split(task), "dataset balance --task " + slug(task));
  const auto model = load_model(ws, task, seed);
  auto examples = load_set(ws, split.test);
  if (examples.empty()) examples = load_set(ws, split.train);
  const auto r = bench_throughput(*model, examples, options);
  ordered_json doc{{"task", to_string(task)},
                   {"seed", seed},
                   {"batch_size", options.batch_size},
                   {"samples", r.samples},
                   {"elapsed_s", r.elapsed_s},
                   {"samples_per_s", r.samples_per_s},
                   {"batch_latency_ms", {{"mean", r.batch_latency_mean_ms},
                                         {"p50", r.batch_latency_p50_ms},
                                         {"p95", r.batch_latency_p95_ms}}}};
  // Wall-clock numbers: this artifact is expected to differ between runs.
  emit(ws, ws.bench(task), doc.dump(2) + "\n", "bench --task " + slug(task), {ws.checkpoint(task, seed)},
       ordered_json::object());
  log << "bench " << to_string(task) << ": " << text::format_fixed(r.samples_per_s, 2) << " samples/s over "
      << r.samples << " samples (p50 batch " << text::format_fixed(r.batch_latency_p50_ms, 3) << " ms)\n";
  return r;
}

}  // namespace gazefuse::cli
