#pragma once

#include <cstdint>

#include "gazefuse/model/classifier.hpp"
#include "gazefuse/model/config.hpp"

namespace gazefuse {

/// Two-stream convolutional baseline. Each view has its own weights:
/// three (conv -> ReLU -> max-pool) blocks and adaptive average pooling to
/// one value per channel. The two channel vectors are concatenated and go
/// through fully connected layers with ReLU and dropout to a single logit.
///
/// Adaptive pooling makes the weights independent of input resolution.
template <typename T>
class BasicCnnBaseline final : public BasicClassifier<T> {
 public:
  BasicCnnBaseline(BaselineCnnConfig config, std::uint64_t seed);

  /// view_a / view_b: (channels x height x width) rasters.
  BasicTensor<T> forward(const BasicTensor<T>& view_a, const BasicTensor<T>& view_b,
                         const ForwardContext& ctx) const override;

  ModelKind kind() const override { return ModelKind::CnnBaseline; }
  ModelConfig config() const override { return config_; }
  const BaselineCnnConfig& cnn_config() const { return config_; }
  ParameterStore<T>& parameters() override { return params_; }
  const ParameterStore<T>& parameters() const override { return params_; }

 private:
  BasicTensor<T> stream(const BasicTensor<T>& image, const char* name) const;

  BaselineCnnConfig config_;
  ParameterStore<T> params_;
};

using CnnBaseline = BasicCnnBaseline<float>;

extern template class BasicCnnBaseline<float>;
extern template class BasicCnnBaseline<double>;

}  // namespace gazefuse
