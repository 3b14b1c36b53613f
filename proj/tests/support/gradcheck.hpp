#pragma once

// Central finite-difference oracle. The analytic side runs the float
// implementation and its backward pass; the numeric side re-runs the same
// forward code instantiated in double, so the differences carry 64-bit
// precision and are independent of every backward closure.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gazefuse/tensor.hpp"

namespace gazefuse::testing {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates whose [x - eps, x + eps] window straddles a kink (ReLU,
  // max-pool switch). They are re-checked with a much smaller step.
  std::size_t refined = 0;
  std::string worst;
};

// Relative error with a denominator floor so exact zeros (dead ReLUs,
// unused table rows) compare as absolute error.
inline double relative_error(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline GradCheckReport gradient_check(std::vector<Tensor> params, const std::function<Tensor()>& loss_f,
                                      std::vector<BasicTensor<double>> params_d,
                                      const std::function<BasicTensor<double>()>& loss_d, double eps = 1e-3) {
  for (auto& p : params) p.zero_grad();
  loss_f().backward();

  GradCheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    const auto grad = params[t].grad();
    auto values = params_d[t].mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double analytic = grad.empty() ? 0.0 : static_cast<double>(grad[i]);
      const double saved = values[i];
      auto central = [&](double h) {
        NoGradGuard guard;
        values[i] = saved + h;
        const double plus = loss_d().item();
        values[i] = saved - h;
        const double minus = loss_d().item();
        values[i] = saved;
        return (plus - minus) / (2.0 * h);
      };
      double numeric = central(eps);
      // Smooth functions give nearly the same estimate at eps and eps/10;
      // a disagreement means the window is not differentiable. The test is
      // purely numeric, so it cannot hide a wrong analytic gradient.
      if (relative_error(numeric, central(eps / 10)) > 1e-3) {
        numeric = central(eps * 1e-3);
        ++report.refined;
      }
      const double err = relative_error(analytic, numeric);
      ++report.checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        std::ostringstream where;
        where << "param " << t << " index " << i << ": analytic " << analytic << " numeric " << numeric;
        report.worst = where.str();
      }
    }
  }
  return report;
}

// Convenience for a pure function of its inputs. `fn` must be a generic
// callable accepting std::vector<BasicTensor<T>> for T = float and double.
template <typename Fn>
GradCheckReport gradient_check_fn(const std::vector<Tensor>& inputs, Fn fn, double eps = 1e-3) {
  std::vector<Tensor> leaves;
  std::vector<BasicTensor<double>> leaves_d;
  for (const auto& x : inputs) {
    leaves.emplace_back(x.shape(), std::vector<float>(x.data().begin(), x.data().end()), true);
    leaves_d.push_back(x.cast<double>());
  }
  return gradient_check(
      leaves, [&] { return fn(leaves); }, leaves_d, [&] { return fn(leaves_d); }, eps);
}

}  // namespace gazefuse::testing
