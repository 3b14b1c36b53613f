#pragma once

#include <cstdint>

#include "gazefuse/model/classifier.hpp"
#include "gazefuse/model/config.hpp"

namespace gazefuse {

/// Dual-view token-fusion classifier.
///
/// Both views go through one shared linear projection. The projected tokens
/// are concatenated behind a learnable [CLS] slot, optionally offset by
/// learned positional and per-view segment embeddings, and run through a
/// pre-norm transformer encoder:
///
///     x = x + Dropout(MHA(LN(x)))      (dropout on attention weights)
///     x = x + Dropout(FFN(LN(x)))      (FFN width = multiplier * embed_dim)
///
/// followed by a final LayerNorm. The [CLS] row feeds an MLP head whose
/// hidden layers are Linear -> LayerNorm -> ReLU -> Dropout; the last layer
/// emits one raw logit.
template <typename T>
class BasicFusionModel final : public BasicClassifier<T> {
 public:
  /// Validates the config and draws every weight from the "init" stream of `seed`.
  BasicFusionModel(FusionModelConfig config, std::uint64_t seed);

  /// view_a / view_b: (tokens_per_view x feature_dim_in) token matrices.
  BasicTensor<T> forward(const BasicTensor<T>& view_a, const BasicTensor<T>& view_b,
                         const ForwardContext& ctx) const override;

  /// Shared projection applied to one view: (N x D_in) -> (N x embed_dim).
  BasicTensor<T> project(const BasicTensor<T>& tokens) const;

  ModelKind kind() const override { return ModelKind::Fusion; }
  ModelConfig config() const override { return config_; }
  const FusionModelConfig& fusion_config() const { return config_; }
  ParameterStore<T>& parameters() override { return params_; }
  const ParameterStore<T>& parameters() const override { return params_; }

 private:
  BasicTensor<T> encoder_layer(const BasicTensor<T>& x, std::size_t layer, const ForwardContext& ctx) const;

  FusionModelConfig config_;
  ParameterStore<T> params_;
  std::vector<std::size_t> segment_ids_;
};

using FusionModel = BasicFusionModel<float>;

extern template class BasicFusionModel<float>;
extern template class BasicFusionModel<double>;

}  // namespace gazefuse
