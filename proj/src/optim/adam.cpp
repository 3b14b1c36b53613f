#include "gazefuse/optim/adam.hpp"

#include <cmath>
#include <string>

#include "gazefuse/error.hpp"

namespace gazefuse {

void AdamHyper::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in (0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam_eps must be > 0");
}

void adam_step(ParameterStore<float>& params, AdamState& state, const AdamHyper& hyper) {
  auto& entries = params.entries();
  if (state.m.empty() && state.step == 0) {
    for (const auto& [_, p] : entries) {
      state.m.emplace_back(p.numel(), 0.0);
      state.v.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.m.size() != entries.size() || state.v.size() != entries.size()) {
    throw DimensionError("adam_step: state holds " + std::to_string(state.m.size()) + " buffers for " +
                         std::to_string(entries.size()) + " parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto& [name, p] = entries[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != p.numel() || v.size() != p.numel()) {
      throw DimensionError("adam_step: state for '" + name + "' has " + std::to_string(m.size()) +
                           " entries, parameter has " + std::to_string(p.numel()));
    }
    const auto grad = p.grad();
    auto values = p.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad.empty() ? 0.0 : grad[i];
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] = static_cast<float>(values[i] - hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.eps));
    }
  }
}

}  // namespace gazefuse
