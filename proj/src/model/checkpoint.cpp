#include "gazefuse/model/checkpoint.hpp"

#include <algorithm>

#include "gazefuse/binary_io.hpp"
#include "gazefuse/error.hpp"

namespace gazefuse {

namespace {

constexpr std::string_view kMagic = "GFCK";

void write_sizes(io::ByteWriter& w, const std::vector<std::size_t>& sizes) {
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (const auto s : sizes) w.u32(static_cast<std::uint32_t>(s));
}

std::vector<std::size_t> read_sizes(io::ByteReader& r) {
  const auto n = r.u32();
  if (n > 4096) throw FormatError("checkpoint config: implausible list length " + std::to_string(n));
  std::vector<std::size_t> out(n);
  for (auto& s : out) s = r.u32();
  return out;
}

std::string encode_config(const ModelConfig& config) {
  io::ByteWriter w;
  if (const auto* f = std::get_if<FusionModelConfig>(&config)) {
    w.u32(static_cast<std::uint32_t>(f->feature_dim_in));
    w.u32(static_cast<std::uint32_t>(f->embed_dim));
    w.u32(static_cast<std::uint32_t>(f->encoder_layers));
    w.u32(static_cast<std::uint32_t>(f->attention_heads));
    w.u32(static_cast<std::uint32_t>(f->tokens_per_view));
    w.u32(static_cast<std::uint32_t>(f->feedforward_multiplier));
    w.f64(f->dropout);
    w.u8(f->use_positional_embedding ? 1 : 0);
    w.u8(f->use_view_segment_embedding ? 1 : 0);
    write_sizes(w, f->head_layer_sizes);
  } else {
    const auto& c = std::get<BaselineCnnConfig>(config);
    w.u32(static_cast<std::uint32_t>(c.in_channels));
    write_sizes(w, c.block_channels);
    write_sizes(w, c.kernel_sizes);
    w.u32(static_cast<std::uint32_t>(c.pool_size));
    write_sizes(w, c.fc_layer_sizes);
    w.f64(c.dropout);
  }
  return w.take();
}

ModelConfig decode_config(ModelKind kind, std::string_view bytes) {
  io::ByteReader r(bytes, "checkpoint config block");
  if (kind == ModelKind::Fusion) {
    FusionModelConfig f;
    f.feature_dim_in = r.u32();
    f.embed_dim = r.u32();
    f.encoder_layers = r.u32();
    f.attention_heads = r.u32();
    f.tokens_per_view = r.u32();
    f.feedforward_multiplier = r.u32();
    f.dropout = r.f64();
    f.use_positional_embedding = r.u8() != 0;
    f.use_view_segment_embedding = r.u8() != 0;
    f.head_layer_sizes = read_sizes(r);
    r.expect_end();
    return f;
  }
  BaselineCnnConfig c;
  c.in_channels = r.u32();
  c.block_channels = read_sizes(r);
  c.kernel_sizes = read_sizes(r);
  c.pool_size = r.u32();
  c.fc_layer_sizes = read_sizes(r);
  c.dropout = r.f64();
  r.expect_end();
  return c;
}

}  // namespace

ModelKind ModelCheckpoint::kind() const {
  return std::holds_alternative<FusionModelConfig>(config) ? ModelKind::Fusion : ModelKind::CnnBaseline;
}

std::string to_string(ModelKind kind) { return kind == ModelKind::Fusion ? "fusion" : "cnn-baseline"; }

ModelCheckpoint snapshot(const Classifier& model, const TrainingMetadata& meta) {
  ModelCheckpoint ckpt{model.config(), {}, meta};
  for (const auto& [name, t] : model.parameters().entries()) {
    ckpt.weights.push_back({name, t.shape(), std::vector<float>(t.data().begin(), t.data().end())});
  }
  return ckpt;
}

void load_weights(Classifier& model, const ModelCheckpoint& checkpoint) {
  if (checkpoint.kind() != model.kind()) {
    throw ConfigError("checkpoint holds a " + to_string(checkpoint.kind()) + " model, cannot load into " +
                      to_string(model.kind()));
  }
  auto& entries = model.parameters().entries();
  if (entries.size() != checkpoint.weights.size()) {
    throw ConfigError("checkpoint has " + std::to_string(checkpoint.weights.size()) + " weight arrays, model needs " +
                      std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& [name, tensor] = entries[i];
    const auto& rec = checkpoint.weights[i];
    if (rec.name != name || rec.shape != tensor.shape()) {
      throw ConfigError("checkpoint weight '" + rec.name + "' " + shape_to_string(rec.shape) +
                        " does not match model weight '" + name + "' " + shape_to_string(tensor.shape()));
    }
    std::copy(rec.values.begin(), rec.values.end(), tensor.mutable_data().begin());
  }
}

std::unique_ptr<FusionModel> restore_fusion_model(const ModelCheckpoint& checkpoint) {
  const auto* config = std::get_if<FusionModelConfig>(&checkpoint.config);
  if (!config) throw ConfigError("checkpoint holds a cnn-baseline model, not a fusion model");
  auto model = std::make_unique<FusionModel>(*config, checkpoint.meta.seed);
  load_weights(*model, checkpoint);
  return model;
}

std::unique_ptr<CnnBaseline> restore_cnn_baseline(const ModelCheckpoint& checkpoint) {
  const auto* config = std::get_if<BaselineCnnConfig>(&checkpoint.config);
  if (!config) throw ConfigError("checkpoint holds a fusion model, not a cnn-baseline model");
  auto model = std::make_unique<CnnBaseline>(*config, checkpoint.meta.seed);
  load_weights(*model, checkpoint);
  return model;
}

std::unique_ptr<Classifier> restore_classifier(const ModelCheckpoint& checkpoint) {
  if (checkpoint.kind() == ModelKind::Fusion) return restore_fusion_model(checkpoint);
  return restore_cnn_baseline(checkpoint);
}

std::string encode_checkpoint(const ModelCheckpoint& checkpoint) {
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(checkpoint.kind()));
  w.u8(static_cast<std::uint8_t>(checkpoint.meta.task));
  w.u32(checkpoint.meta.epoch);
  w.u64(checkpoint.meta.seed);
  w.f64(checkpoint.meta.val_f1);
  w.str(encode_config(checkpoint.config));
  w.u32(static_cast<std::uint32_t>(checkpoint.weights.size()));
  for (const auto& rec : checkpoint.weights) {
    w.str(rec.name);
    w.u32(static_cast<std::uint32_t>(rec.shape.size()));
    for (const auto e : rec.shape) w.u64(e);
    for (const float v : rec.values) w.f32(v);
  }
  return w.take();
}

ModelCheckpoint decode_checkpoint(std::string_view bytes) {
  io::ByteReader r(bytes, "checkpoint");
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw FormatError("checkpoint: bad magic (expected GFCK)");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported format version " + std::to_string(version) + " (reader supports " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const auto kind_byte = r.u8();
  if (kind_byte != static_cast<std::uint8_t>(ModelKind::Fusion) &&
      kind_byte != static_cast<std::uint8_t>(ModelKind::CnnBaseline)) {
    throw FormatError("checkpoint: unknown model kind " + std::to_string(kind_byte));
  }
  const auto task_byte = r.u8();
  if (task_byte > 1) throw FormatError("checkpoint: unknown task tag " + std::to_string(task_byte));

  ModelCheckpoint ckpt;
  ckpt.meta.task = static_cast<Task>(task_byte);
  ckpt.meta.epoch = r.u32();
  ckpt.meta.seed = r.u64();
  ckpt.meta.val_f1 = r.f64();
  ckpt.config = decode_config(static_cast<ModelKind>(kind_byte), r.str());
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray rec;
    rec.name = r.str(4096);
    const auto rank = r.u32();
    if (rank == 0 || rank > 8) throw FormatError("checkpoint: weight '" + rec.name + "' has invalid rank");
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const auto extent = r.u64();
      if (extent == 0 || extent > r.remaining()) {
        throw FormatError("checkpoint: weight '" + rec.name + "' has an invalid extent");
      }
      rec.shape.push_back(extent);
      n *= extent;
    }
    if (n * 4 > r.remaining()) throw FormatError("checkpoint: truncated payload for '" + rec.name + "'");
    rec.values.resize(n);
    for (auto& v : rec.values) v = r.f32();
    ckpt.weights.push_back(std::move(rec));
  }
  r.expect_end();
  try {
    std::visit([](const auto& c) { c.validate(); }, ckpt.config);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: stored config is invalid: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_checkpoint(checkpoint));
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace gazefuse
