#include "gazefuse/cli/config.hpp"

#include <fstream>
#include <set>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"
#include "gazefuse/features/feature_store.hpp"

namespace gazefuse::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

void ProjectConfig::validate() const {
  if (sessions.empty()) throw ConfigError("config: sessions must list at least one session");
  std::set<std::string> seen;
  for (const auto& s : sessions) {
    try {
      validate_session_id(s);
    } catch (const Error& e) {
      throw ConfigError(std::string("config: sessions: ") + e.what());
    }
    if (!seen.insert(s).second) throw ConfigError("config: session '" + s + "' is listed twice");
  }
  sync.validate();
  if (!(sample_rate_hz > 0.0)) throw ConfigError("config: sampling.rate_hz must be > 0");
  if (!(min_head_confidence >= 0.0 && min_head_confidence <= 1.0)) {
    throw ConfigError("config: sampling.min_head_confidence must lie in [0, 1]");
  }
  backbone.validate();
  fusion.validate();
  cnn.validate();
  training.validate();
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("config: split.val_fraction must lie in [0, 1)");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("config: eval.threshold must lie in [0, 1]");
  if (!(timeline_window_s > 0.0)) throw ConfigError("config: eval.timeline_window_s must be > 0");
  if (seeds.empty()) throw ConfigError("config: seeds must not be empty");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
}

fs::path ProjectConfig::head_manifest_path() const {
  return head_manifest.empty() ? media_root / "heads.csv" : head_manifest;
}

fs::path ProjectConfig::annotations_path(const std::string& session) const {
  return (annotations_dir.empty() ? media_root : annotations_dir) / session / "annotations.csv";
}

fs::path ProjectConfig::audio_path(const std::string& session, View view) const {
  return media_root / session / (to_string(view) + ".wav");
}

namespace {

// Reads an object, rejecting keys outside `allowed`.
const json& object_at(const json& parent, const char* key, std::initializer_list<const char*> allowed) {
  static const json empty = json::object();
  if (!parent.contains(key)) return empty;
  const auto& obj = parent.at(key);
  if (!obj.is_object()) throw ConfigError(std::string("config: '") + key + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end()) {
      throw ConfigError(std::string("config: unknown key '") + key + "." + k + "'");
    }
  }
  return obj;
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

void read_path(const json& obj, const char* key, fs::path& out) {
  std::string s = out.string();
  read(obj, key, s);
  out = s;
}

}  // namespace

ordered_json to_json(const ProjectConfig& c) {
  ordered_json j;
  j["paths"] = {{"media_root", c.media_root.string()},
                {"work_dir", c.work_dir.string()},
                {"head_manifest", c.head_manifest.string()},
                {"annotations_dir", c.annotations_dir.string()}};
  j["sessions"] = c.sessions;
  j["held_out_sessions"] = c.held_out_sessions;
  j["reference_view"] = to_string(c.reference_view);
  ordered_json manual = ordered_json::object();
  for (const auto& [s, v] : c.manual_offsets) manual[s] = v;
  j["sync"] = {{"max_lag_s", c.sync.max_lag_s},
               {"envelope_rate_hz", c.sync.envelope_rate_hz},
               {"min_confidence", c.sync.min_confidence},
               {"silence_variance", c.sync.silence_variance},
               {"manual_offsets", manual}};
  j["sampling"] = {{"rate_hz", c.sample_rate_hz}, {"min_head_confidence", c.min_head_confidence}};
  j["backbone"] = {{"kind", "toy"},
                   {"grid", c.backbone.grid},
                   {"out_dim", c.backbone.out_dim},
                   {"projection_seed", c.backbone.projection_seed}};
  const auto& f = c.fusion;
  const auto& n = c.cnn;
  j["model"] = {{"kind", c.model == ModelChoice::Fusion ? "fusion" : "cnn"},
                {"fusion",
                 {{"feature_dim_in", f.feature_dim_in},
                  {"embed_dim", f.embed_dim},
                  {"encoder_layers", f.encoder_layers},
                  {"attention_heads", f.attention_heads},
                  {"dropout", f.dropout},
                  {"head_layer_sizes", f.head_layer_sizes},
                  {"tokens_per_view", f.tokens_per_view},
                  {"use_positional_embedding", f.use_positional_embedding},
                  {"use_view_segment_embedding", f.use_view_segment_embedding},
                  {"feedforward_multiplier", f.feedforward_multiplier}}},
                {"cnn",
                 {{"in_channels", n.in_channels},
                  {"block_channels", n.block_channels},
                  {"kernel_sizes", n.kernel_sizes},
                  {"pool_size", n.pool_size},
                  {"fc_layer_sizes", n.fc_layer_sizes},
                  {"dropout", n.dropout}}}};
  const auto& t = c.training;
  j["training"] = {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size},
                   {"max_epochs", t.max_epochs},       {"adam_beta1", t.adam_beta1},
                   {"adam_beta2", t.adam_beta2},       {"adam_eps", t.adam_eps},
                   {"shuffle_each_epoch", t.shuffle_each_epoch}};
  j["split"] = {{"val_fraction", c.val_fraction}, {"balance_seed", c.balance_seed}};
  j["eval"] = {{"threshold", c.threshold}, {"timeline_window_s", c.timeline_window_s}};
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  return j;
}

ProjectConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> top{"paths", "sessions", "held_out_sessions", "reference_view", "sync",
                                         "sampling", "backbone", "model", "training", "split", "eval", "seeds",
                                         "workers"};
  for (const auto& [k, v] : j.items()) {
    if (!top.count(k)) throw ConfigError("config: unknown key '" + k + "'");
  }
  ProjectConfig c;
  const auto& paths = object_at(j, "paths", {"media_root", "work_dir", "head_manifest", "annotations_dir"});
  read_path(paths, "media_root", c.media_root);
  read_path(paths, "work_dir", c.work_dir);
  read_path(paths, "head_manifest", c.head_manifest);
  read_path(paths, "annotations_dir", c.annotations_dir);
  read(j, "sessions", c.sessions);
  read(j, "held_out_sessions", c.held_out_sessions);
  if (j.contains("reference_view")) {
    try {
      c.reference_view = parse_view(j.at("reference_view").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config: reference_view: ") + e.what());
    }
  }
  const auto& sync = object_at(j, "sync", {"max_lag_s", "envelope_rate_hz", "min_confidence", "silence_variance",
                                           "manual_offsets"});
  read(sync, "max_lag_s", c.sync.max_lag_s);
  read(sync, "envelope_rate_hz", c.sync.envelope_rate_hz);
  read(sync, "min_confidence", c.sync.min_confidence);
  read(sync, "silence_variance", c.sync.silence_variance);
  read(sync, "manual_offsets", c.manual_offsets);
  const auto& sampling = object_at(j, "sampling", {"rate_hz", "min_head_confidence"});
  read(sampling, "rate_hz", c.sample_rate_hz);
  read(sampling, "min_head_confidence", c.min_head_confidence);
  const auto& backbone = object_at(j, "backbone", {"kind", "grid", "out_dim", "projection_seed"});
  if (backbone.contains("kind") && backbone.at("kind") != "toy") {
    throw ConfigError("config: backbone.kind must be \"toy\"; pretrained backbones supply features directly");
  }
  read(backbone, "grid", c.backbone.grid);
  read(backbone, "out_dim", c.backbone.out_dim);
  read(backbone, "projection_seed", c.backbone.projection_seed);

  const auto& model = object_at(j, "model", {"kind", "fusion", "cnn"});
  std::string kind = "fusion";
  read(model, "kind", kind);
  if (kind == "fusion") c.model = ModelChoice::Fusion;
  else if (kind == "cnn") c.model = ModelChoice::Cnn;
  else throw ConfigError("config: model.kind must be \"fusion\" or \"cnn\"");
  const auto& f = object_at(model, "fusion",
                            {"feature_dim_in", "embed_dim", "encoder_layers", "attention_heads", "dropout",
                             "head_layer_sizes", "tokens_per_view", "use_positional_embedding",
                             "use_view_segment_embedding", "feedforward_multiplier"});
  read(f, "feature_dim_in", c.fusion.feature_dim_in);
  read(f, "embed_dim", c.fusion.embed_dim);
  read(f, "encoder_layers", c.fusion.encoder_layers);
  read(f, "attention_heads", c.fusion.attention_heads);
  read(f, "dropout", c.fusion.dropout);
  read(f, "head_layer_sizes", c.fusion.head_layer_sizes);
  read(f, "tokens_per_view", c.fusion.tokens_per_view);
  read(f, "use_positional_embedding", c.fusion.use_positional_embedding);
  read(f, "use_view_segment_embedding", c.fusion.use_view_segment_embedding);
  read(f, "feedforward_multiplier", c.fusion.feedforward_multiplier);
  const auto& n = object_at(model, "cnn",
                            {"in_channels", "block_channels", "kernel_sizes", "pool_size", "fc_layer_sizes",
                             "dropout"});
  read(n, "in_channels", c.cnn.in_channels);
  read(n, "block_channels", c.cnn.block_channels);
  read(n, "kernel_sizes", c.cnn.kernel_sizes);
  read(n, "pool_size", c.cnn.pool_size);
  read(n, "fc_layer_sizes", c.cnn.fc_layer_sizes);
  read(n, "dropout", c.cnn.dropout);

  const auto& t = object_at(j, "training", {"learning_rate", "batch_size", "max_epochs", "adam_beta1", "adam_beta2",
                                            "adam_eps", "shuffle_each_epoch"});
  read(t, "learning_rate", c.training.learning_rate);
  read(t, "batch_size", c.training.batch_size);
  read(t, "max_epochs", c.training.max_epochs);
  read(t, "adam_beta1", c.training.adam_beta1);
  read(t, "adam_beta2", c.training.adam_beta2);
  read(t, "adam_eps", c.training.adam_eps);
  read(t, "shuffle_each_epoch", c.training.shuffle_each_epoch);
  const auto& split = object_at(j, "split", {"val_fraction", "balance_seed"});
  read(split, "val_fraction", c.val_fraction);
  read(split, "balance_seed", c.balance_seed);
  const auto& ev = object_at(j, "eval", {"threshold", "timeline_window_s"});
  read(ev, "threshold", c.threshold);
  read(ev, "timeline_window_s", c.timeline_window_s);
  c.training.threshold_for_val_f1 = c.threshold;
  read(j, "seeds", c.seeds);
  read(j, "workers", c.workers);
  return c;
}

ProjectConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw LookupError("config file " + path.string() + " does not exist");
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  auto c = config_from_json(j);
  const auto base = fs::absolute(path).parent_path();
  for (auto* p : {&c.media_root, &c.work_dir, &c.head_manifest, &c.annotations_dir}) {
    if (!p->empty() && p->is_relative()) *p = (base / *p).lexically_normal();
  }
  return c;
}

void save_config(const ProjectConfig& config, const fs::path& path) {
  io::write_file_atomic(path, to_json(config).dump(2) + "\n");
}

}  // namespace gazefuse::cli
