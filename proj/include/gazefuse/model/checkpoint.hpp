#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gazefuse/model/classifier.hpp"
#include "gazefuse/model/cnn.hpp"
#include "gazefuse/model/config.hpp"
#include "gazefuse/model/fusion.hpp"
#include "gazefuse/task.hpp"

namespace gazefuse {

struct TrainingMetadata {
  std::uint32_t epoch = 0;
  std::uint64_t seed = 0;
  double val_f1 = 0.0;
  Task task = Task::MutualGaze;

  bool operator==(const TrainingMetadata&) const = default;
};

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;

  bool operator==(const NamedArray&) const = default;
};

/// Serializable model state: architecture config, every weight, and the
/// training run it came from.
struct ModelCheckpoint {
  ModelConfig config;
  std::vector<NamedArray> weights;
  TrainingMetadata meta;

  ModelKind kind() const;
  bool operator==(const ModelCheckpoint&) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Captures the current weights of a model.
ModelCheckpoint snapshot(const Classifier& model, const TrainingMetadata& meta);

/// Copies checkpoint weights into a model of matching architecture. Every
/// name and shape is verified; mismatches throw ConfigError.
void load_weights(Classifier& model, const ModelCheckpoint& checkpoint);

/// Rebuilds the fusion model; throws ConfigError for other model kinds.
std::unique_ptr<FusionModel> restore_fusion_model(const ModelCheckpoint& checkpoint);
/// Rebuilds the CNN baseline; throws ConfigError for other model kinds.
std::unique_ptr<CnnBaseline> restore_cnn_baseline(const ModelCheckpoint& checkpoint);
/// Rebuilds whichever architecture the checkpoint holds.
std::unique_ptr<Classifier> restore_classifier(const ModelCheckpoint& checkpoint);

/// Binary layout, all integers little-endian:
///
///     "GFCK" | u32 version | u8 kind | u8 task | u32 epoch | u64 seed | f64 val_f1
///     | u32 config_len | config bytes
///     | u32 n_weights | n x (u32 name_len | name | u32 rank | rank x u64 extent | f32 payload)
std::string encode_checkpoint(const ModelCheckpoint& checkpoint);
/// Throws FormatError on bad magic, unsupported version, truncation or
/// trailing bytes.
ModelCheckpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gazefuse
