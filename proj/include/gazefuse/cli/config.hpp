#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gazefuse/features/toy_backbone.hpp"
#include "gazefuse/model/config.hpp"
#include "gazefuse/optim/train.hpp"
#include "gazefuse/pipeline/audio.hpp"
#include "gazefuse/task.hpp"

namespace gazefuse::cli {

enum class ModelChoice { Fusion, Cnn };

/// Everything a pipeline run depends on. Stored as JSON; the schema is
/// described in docs/config.md. Relative paths resolve against the
/// directory holding the config file.
struct ProjectConfig {
  std::filesystem::path media_root = "media";
  std::filesystem::path work_dir = "work";
  std::filesystem::path head_manifest;    // default: <media_root>/heads.csv
  std::filesystem::path annotations_dir;  // default: <media_root>; holds <session>/annotations.csv

  std::vector<std::string> sessions;
  std::vector<std::string> held_out_sessions;
  View reference_view = View::Infant;

  SyncConfig sync;
  std::map<std::string, double> manual_offsets;  // replaces the audio estimate for listed sessions

  double sample_rate_hz = 1.0;
  double min_head_confidence = 0.8;

  ToyBackboneConfig backbone;

  ModelChoice model = ModelChoice::Fusion;
  FusionModelConfig fusion;
  BaselineCnnConfig cnn;
  TrainConfig training;

  double val_fraction = 0.10;
  std::uint64_t balance_seed = 0;
  double threshold = 0.5;
  double timeline_window_s = 15.0;

  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t workers = 1;

  /// Throws ConfigError for any invalid field, naming it.
  void validate() const;

  std::filesystem::path head_manifest_path() const;
  std::filesystem::path annotations_path(const std::string& session) const;
  std::filesystem::path audio_path(const std::string& session, View view) const;

  bool operator==(const ProjectConfig&) const = default;
};

nlohmann::ordered_json to_json(const ProjectConfig& config);
/// Unknown keys are rejected so typos do not silently fall back to defaults.
ProjectConfig config_from_json(const nlohmann::json& j);

/// Reads a config file and makes its relative paths absolute against the
/// file's directory.
ProjectConfig load_config(const std::filesystem::path& path);
void save_config(const ProjectConfig& config, const std::filesystem::path& path);

/// Name of the environment variable holding the default config path.
inline constexpr const char* kConfigEnvVar = "GAZEFUSE_CONFIG";

}  // namespace gazefuse::cli
