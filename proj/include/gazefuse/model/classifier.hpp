#pragma once

#include <memory>
#include <string>

#include "gazefuse/model/config.hpp"
#include "gazefuse/model/parameters.hpp"
#include "gazefuse/rng.hpp"
#include "gazefuse/tensor.hpp"

namespace gazefuse {

/// Train/eval switch plus the dropout stream used in train mode.
struct ForwardContext {
  bool train = false;
  Rng* dropout_rng = nullptr;
};

enum class ModelKind : unsigned char { Fusion = 1, CnnBaseline = 2 };

std::string to_string(ModelKind kind);

/// A dual-view binary classifier: two per-view inputs in, one raw logit out.
template <typename T>
class BasicClassifier {
 public:
  virtual ~BasicClassifier() = default;

  /// Returns a one-element logit tensor. The sigmoid is applied by callers.
  virtual BasicTensor<T> forward(const BasicTensor<T>& view_a, const BasicTensor<T>& view_b,
                                 const ForwardContext& ctx) const = 0;

  virtual ModelKind kind() const = 0;
  virtual ModelConfig config() const = 0;
  virtual ParameterStore<T>& parameters() = 0;
  virtual const ParameterStore<T>& parameters() const = 0;
};

using Classifier = BasicClassifier<float>;

}  // namespace gazefuse
