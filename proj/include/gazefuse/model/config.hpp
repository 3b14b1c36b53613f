#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace gazefuse {

/// Hyperparameters of the dual-view token-fusion classifier. Defaults are
/// the reference configuration.
struct FusionModelConfig {
  std::size_t feature_dim_in = 1024;  // backbone token width
  std::size_t embed_dim = 512;
  std::size_t encoder_layers = 3;
  std::size_t attention_heads = 4;
  double dropout = 0.426;
  std::vector<std::size_t> head_layer_sizes{512, 128, 64, 1};
  std::size_t tokens_per_view = 64;
  bool use_positional_embedding = true;
  bool use_view_segment_embedding = true;
  std::size_t feedforward_multiplier = 4;  // encoder MLP width = multiplier * embed_dim

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// [CLS] plus both views.
  std::size_t sequence_length() const { return 1 + 2 * tokens_per_view; }

  bool operator==(const FusionModelConfig&) const = default;
};

/// Two-stream convolutional baseline: per stream three conv -> ReLU ->
/// max-pool blocks, adaptive average pooling, then fully connected layers
/// over the concatenated stream features.
struct BaselineCnnConfig {
  std::size_t in_channels = 3;
  std::vector<std::size_t> block_channels{16, 32, 64};
  std::vector<std::size_t> kernel_sizes{3, 3, 3};
  std::size_t pool_size = 2;
  std::vector<std::size_t> fc_layer_sizes{64, 1};  // hidden widths, ending with the logit
  double dropout = 0.5;

  void validate() const;
  bool operator==(const BaselineCnnConfig&) const = default;
};

using ModelConfig = std::variant<FusionModelConfig, BaselineCnnConfig>;

}  // namespace gazefuse
