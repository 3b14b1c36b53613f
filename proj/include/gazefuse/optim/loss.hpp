#pragma once

#include <span>

#include "gazefuse/tensor.hpp"

namespace gazefuse {

/// Mean binary cross-entropy over a batch of raw logits, in the stable form
/// log(1 + exp(-|z|)) + max(z, 0) - z*y. The gradient is (sigmoid(z) - y) / n.
/// Throws ContractError when a target is not exactly 0 or 1 or the counts differ.
template <typename T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, std::span<const T> targets);

}  // namespace gazefuse
