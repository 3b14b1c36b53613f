#include "gazefuse/optim/loss.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gazefuse/error.hpp"

namespace gazefuse {

template <typename T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, std::span<const T> targets) {
  const auto z = logits.data();
  if (z.size() != targets.size()) {
    throw ContractError("bce_with_logits: " + std::to_string(z.size()) + " logits but " +
                        std::to_string(targets.size()) + " targets");
  }
  if (z.empty()) throw ContractError("bce_with_logits: empty batch");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] != T{0} && targets[i] != T{1}) {
      throw ContractError("bce_with_logits: target " + std::to_string(static_cast<double>(targets[i])) +
                          " at index " + std::to_string(i) + " is not 0 or 1");
    }
  }
  const double n = static_cast<double>(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double x = z[i];
    total += std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0) - x * static_cast<double>(targets[i]);
  }
  auto y = std::make_shared<std::vector<T>>(targets.begin(), targets.end());
  return make_op_result<T>("bce_with_logits", Shape{1}, {static_cast<T>(total / n)}, {logits},
                           [logits, y, n](std::span<const T> g) {
                             auto gz = grad_sink(logits);
                             const auto zv = logits.data();
                             for (std::size_t i = 0; i < gz.size(); ++i) {
                               const double x = zv[i];
                               const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
                               gz[i] += static_cast<T>(g[0] * (s - static_cast<double>((*y)[i])) / n);
                             }
                           });
}

template BasicTensor<float> bce_with_logits(const BasicTensor<float>&, std::span<const float>);
template BasicTensor<double> bce_with_logits(const BasicTensor<double>&, std::span<const double>);

}  // namespace gazefuse
