#include "gazefuse/model/config.hpp"

#include <string>

#include "gazefuse/error.hpp"

namespace gazefuse {

namespace {
void require(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ConfigError(std::string(field) + ": " + why);
}
}  // namespace

void FusionModelConfig::validate() const {
  require(feature_dim_in > 0, "feature_dim_in", "must be positive");
  require(embed_dim > 0, "embed_dim", "must be positive");
  require(encoder_layers > 0, "encoder_layers", "must be positive");
  require(attention_heads > 0, "attention_heads", "must be positive");
  require(embed_dim % attention_heads == 0, "attention_heads",
          "embed_dim " + std::to_string(embed_dim) + " is not divisible by " + std::to_string(attention_heads) +
              " heads");
  require(dropout >= 0.0 && dropout < 1.0, "dropout", "must lie in [0, 1), got " + std::to_string(dropout));
  require(head_layer_sizes.size() >= 2, "head_layer_sizes", "needs at least an input and an output size");
  require(head_layer_sizes.front() == embed_dim, "head_layer_sizes",
          "must start at embed_dim " + std::to_string(embed_dim));
  require(head_layer_sizes.back() == 1, "head_layer_sizes", "must end at 1");
  for (const auto s : head_layer_sizes) require(s > 0, "head_layer_sizes", "sizes must be positive");
  require(tokens_per_view > 0, "tokens_per_view", "must be positive");
  require(feedforward_multiplier > 0, "feedforward_multiplier", "must be positive");
}

void BaselineCnnConfig::validate() const {
  require(in_channels > 0, "in_channels", "must be positive");
  require(block_channels.size() == 3, "block_channels", "exactly three convolutional blocks are required");
  require(kernel_sizes.size() == 3, "kernel_sizes", "exactly three convolutional blocks are required");
  for (const auto c : block_channels) require(c > 0, "block_channels", "must be positive");
  for (const auto k : kernel_sizes) require(k > 0 && k % 2 == 1, "kernel_sizes", "must be positive and odd");
  require(pool_size >= 1, "pool_size", "must be positive");
  require(!fc_layer_sizes.empty() && fc_layer_sizes.back() == 1, "fc_layer_sizes", "must end at 1");
  for (const auto s : fc_layer_sizes) require(s > 0, "fc_layer_sizes", "sizes must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout", "must lie in [0, 1), got " + std::to_string(dropout));
}

}  // namespace gazefuse
