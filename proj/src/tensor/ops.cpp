#include "gazefuse/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gazefuse/error.hpp"

namespace gazefuse::ops {

namespace {

template <typename T>
void require_rank(const BasicTensor<T>& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + " expects a rank-" + std::to_string(rank) + " tensor, got " +
                         shape_to_string(x.shape()));
  }
}

// Number of times `b` repeats inside `a` under the trailing-block rule,
// or 0 when the shapes are incompatible.
std::size_t broadcast_repeats(const Shape& a, const Shape& b) {
  if (b.size() > a.size()) return 0;
  if (!std::equal(b.begin(), b.end(), a.end() - static_cast<std::ptrdiff_t>(b.size()))) return 0;
  return shape_numel(a) / shape_numel(b);
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

template <typename T>
void require_axis(const BasicTensor<T>& x, std::size_t axis, const char* op) {
  if (axis >= x.rank()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for shape " +
                         shape_to_string(x.shape()));
  }
}

}  // namespace

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner extents differ: " + shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  }
  const auto A = a.data();
  const auto B = b.data();
  std::vector<T> out(m * n, T{0});
  for (std::size_t i = 0; i < m; ++i) {
    T* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = A[i * k + p];
      const T* brow = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return make_op_result<T>("matmul", {m, n}, std::move(out), {a, b}, [a, b, m, k, n](std::span<const T> g) {
    const auto A = a.data();
    const auto B = b.data();
    if (auto ga = grad_sink(a); !ga.empty()) {
      // dA = dC * B^T
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          T acc{0};
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * B[p * n + j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (auto gb = grad_sink(b); !gb.empty()) {
      // dB = A^T * dC
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const T aip = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
        }
      }
    }
  });
}

template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  const auto A = a.data();
  std::vector<T> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = A[i * c + j];
  return make_op_result<T>("transpose", {c, r}, std::move(out), {a}, [a, r, c](std::span<const T> g) {
    auto ga = grad_sink(a);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
  });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const std::size_t reps = broadcast_repeats(a.shape(), b.shape());
  if (reps == 0) {
    throw DimensionError("add: cannot combine " + shape_to_string(a.shape()) + " with " +
                         shape_to_string(b.shape()));
  }
  const auto A = a.data();
  const auto B = b.data();
  const std::size_t nb = B.size();
  std::vector<T> out(A.size());
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t j = 0; j < nb; ++j) out[r * nb + j] = A[r * nb + j] + B[j];
  return make_op_result<T>("add", a.shape(), std::move(out), {a, b}, [a, b, reps, nb](std::span<const T> g) {
    if (auto ga = grad_sink(a); !ga.empty())
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
    if (auto gb = grad_sink(b); !gb.empty())
      for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t j = 0; j < nb; ++j) gb[j] += g[r * nb + j];
  });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const std::size_t reps = broadcast_repeats(a.shape(), b.shape());
  if (reps == 0) {
    throw DimensionError("mul: cannot combine " + shape_to_string(a.shape()) + " with " +
                         shape_to_string(b.shape()));
  }
  const auto A = a.data();
  const auto B = b.data();
  const std::size_t nb = B.size();
  std::vector<T> out(A.size());
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t j = 0; j < nb; ++j) out[r * nb + j] = A[r * nb + j] * B[j];
  return make_op_result<T>("mul", a.shape(), std::move(out), {a, b}, [a, b, reps, nb](std::span<const T> g) {
    const auto A = a.data();
    const auto B = b.data();
    if (auto ga = grad_sink(a); !ga.empty())
      for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t j = 0; j < nb; ++j) ga[r * nb + j] += g[r * nb + j] * B[j];
    if (auto gb = grad_sink(b); !gb.empty())
      for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t j = 0; j < nb; ++j) gb[j] += g[r * nb + j] * A[r * nb + j];
  });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor) {
  const auto A = a.data();
  std::vector<T> out(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] * factor;
  return make_op_result<T>("scale", a.shape(), std::move(out), {a}, [a, factor](std::span<const T> g) {
    auto ga = grad_sink(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * factor;
  });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& a) {
  T total{0};
  for (const T v : a.data()) total += v;
  return make_op_result<T>("sum", {1}, {total}, {a}, [a](std::span<const T> g) {
    auto ga = grad_sink(a);
    for (auto& v : ga) v += g[0];
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& a) {
  return scale(sum(a), T{1} / static_cast<T>(a.numel()));
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& a) {
  const auto A = a.data();
  std::vector<T> out(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) out[i] = A[i] > T{0} ? A[i] : T{0};
  return make_op_result<T>("relu", a.shape(), std::move(out), {a}, [a](std::span<const T> g) {
    const auto A = a.data();
    auto ga = grad_sink(a);
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (A[i] > T{0}) ga[i] += g[i];
  });
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& a) {
  const auto A = a.data();
  std::vector<T> out(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) {
    const T x = A[i];
    if (x >= T{0}) {
      out[i] = T{1} / (T{1} + std::exp(-x));
    } else {
      const T e = std::exp(x);
      out[i] = e / (T{1} + e);
    }
  }
  auto y = std::make_shared<std::vector<T>>(out);
  return make_op_result<T>("sigmoid", a.shape(), std::move(out), {a}, [a, y](std::span<const T> g) {
    auto ga = grad_sink(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * (*y)[i] * (T{1} - (*y)[i]);
  });
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x, std::size_t axis) {
  require_axis(x, axis, "softmax");
  const auto s = split_at(x.shape(), axis);
  const auto X = x.data();
  std::vector<T> out(X.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      T mx = X[base];
      for (std::size_t j = 1; j < s.extent; ++j) mx = std::max(mx, X[base + j * s.inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < s.extent; ++j) total += std::exp(static_cast<double>(X[base + j * s.inner] - mx));
      for (std::size_t j = 0; j < s.extent; ++j) {
        const std::size_t idx = base + j * s.inner;
        out[idx] = static_cast<T>(std::exp(static_cast<double>(X[idx] - mx)) / total);
      }
    }
  }
  auto y = std::make_shared<std::vector<T>>(out);
  return make_op_result<T>("softmax", x.shape(), std::move(out), {x}, [x, y, s](std::span<const T> g) {
    auto gx = grad_sink(x);
    const auto& Y = *y;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.extent * s.inner + in;
        T dot{0};
        for (std::size_t j = 0; j < s.extent; ++j) dot += g[base + j * s.inner] * Y[base + j * s.inner];
        for (std::size_t j = 0; j < s.extent; ++j) {
          const std::size_t idx = base + j * s.inner;
          gx[idx] += Y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                          double eps) {
  if (x.rank() == 0) throw DimensionError("layer_norm on a rank-0 tensor");
  const std::size_t n = x.shape().back();
  if (gamma.numel() != n || beta.numel() != n || gamma.rank() != 1 || beta.rank() != 1) {
    throw DimensionError("layer_norm: gamma/beta must have " + std::to_string(n) + " entries, got " +
                         shape_to_string(gamma.shape()) + " and " + shape_to_string(beta.shape()));
  }
  const std::size_t rows = x.numel() / n;
  const auto X = x.data();
  const auto G = gamma.data();
  const auto Bt = beta.data();
  auto xhat = std::make_shared<std::vector<T>>(X.size());
  auto inv_std = std::make_shared<std::vector<T>>(rows);
  std::vector<T> out(X.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = X.data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = static_cast<T>(is);
    for (std::size_t j = 0; j < n; ++j) {
      const T xh = static_cast<T>((row[j] - mu) * is);
      (*xhat)[r * n + j] = xh;
      out[r * n + j] = xh * G[j] + Bt[j];
    }
  }
  return make_op_result<T>(
      "layer_norm", x.shape(), std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat, inv_std, rows, n](std::span<const T> g) {
        const auto G = gamma.data();
        const auto& XH = *xhat;
        if (auto gg = grad_sink(gamma); !gg.empty())
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < n; ++j) gg[j] += g[r * n + j] * XH[r * n + j];
        if (auto gb = grad_sink(beta); !gb.empty())
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < n; ++j) gb[j] += g[r * n + j];
        if (auto gx = grad_sink(x); !gx.empty()) {
          const T inv_n = T{1} / static_cast<T>(n);
          for (std::size_t r = 0; r < rows; ++r) {
            T sum_d{0}, sum_dx{0};
            for (std::size_t j = 0; j < n; ++j) {
              const T d = g[r * n + j] * G[j];
              sum_d += d;
              sum_dx += d * XH[r * n + j];
            }
            const T is = (*inv_std)[r];
            for (std::size_t j = 0; j < n; ++j) {
              const T d = g[r * n + j] * G[j];
              gx[r * n + j] += is * (d - inv_n * sum_d - XH[r * n + j] * inv_n * sum_dx);
            }
          }
        }
      });
}

template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double p, bool train, Rng* rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1), got " + std::to_string(p));
  if (!train || p == 0.0) return x;
  if (!rng) throw ContractError("train-mode dropout needs a random stream");
  const auto X = x.data();
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<T>>(X.size());
  std::vector<T> out(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    (*mask)[i] = rng->uniform() >= p ? keep_scale : T{0};
    out[i] = X[i] * (*mask)[i];
  }
  return make_op_result<T>("dropout", x.shape(), std::move(out), {x}, [x, mask](std::span<const T> g) {
    auto gx = grad_sink(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * (*mask)[i];
  });
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& kernels, const BasicTensor<T>& bias,
                      std::size_t stride, std::size_t padding) {
  require_rank(x, 3, "conv2d input");
  require_rank(kernels, 4, "conv2d kernels");
  if (stride == 0) throw ConfigError("conv2d: stride must be positive");
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
  if (kernels.dim(1) != cin) {
    throw DimensionError("conv2d: kernels " + shape_to_string(kernels.shape()) + " do not match input channels of " +
                         shape_to_string(x.shape()));
  }
  if (kh > h + 2 * padding || kw > w + 2 * padding) {
    throw DimensionError("conv2d: kernel " + shape_to_string(kernels.shape()) + " larger than padded input " +
                         shape_to_string(x.shape()) + " (padding " + std::to_string(padding) + ")");
  }
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw DimensionError("conv2d: bias must have " + std::to_string(cout) + " entries, got " +
                         shape_to_string(bias.shape()));
  }
  const std::size_t oh = (h + 2 * padding - kh) / stride + 1;
  const std::size_t ow = (w + 2 * padding - kw) / stride + 1;
  const auto X = x.data();
  const auto K = kernels.data();
  std::vector<T> out(cout * oh * ow, T{0});

  // Visits every (output, kernel tap) pair that lands inside the input.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox)
          for (std::size_t ci = 0; ci < cin; ++ci)
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) - static_cast<std::ptrdiff_t>(padding);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) - static_cast<std::ptrdiff_t>(padding);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                fn((co * oh + oy) * ow + ox, (ci * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix),
                   ((co * cin + ci) * kh + ky) * kw + kx);
              }
            }
  };
  for_each_tap([&](std::size_t o, std::size_t i, std::size_t k) { out[o] += X[i] * K[k]; });
  if (has_bias) {
    const auto Bv = bias.data();
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t j = 0; j < oh * ow; ++j) out[co * oh * ow + j] += Bv[co];
  }

  std::vector<BasicTensor<T>> inputs{x, kernels};
  if (has_bias) inputs.push_back(bias);
  return make_op_result<T>(
      "conv2d", {cout, oh, ow}, std::move(out), std::move(inputs),
      [x, kernels, bias, has_bias, for_each_tap, cout, oh, ow](std::span<const T> g) {
        const auto X = x.data();
        const auto K = kernels.data();
        auto gx = grad_sink(x);
        auto gk = grad_sink(kernels);
        if (!gx.empty() || !gk.empty()) {
          for_each_tap([&](std::size_t o, std::size_t i, std::size_t k) {
            if (!gx.empty()) gx[i] += g[o] * K[k];
            if (!gk.empty()) gk[k] += g[o] * X[i];
          });
        }
        if (has_bias) {
          if (auto gb = grad_sink(bias); !gb.empty())
            for (std::size_t co = 0; co < cout; ++co)
              for (std::size_t j = 0; j < oh * ow; ++j) gb[co] += g[co * oh * ow + j];
        }
      });
}

template <typename T>
BasicTensor<T> max_pool2d(const BasicTensor<T>& x, std::size_t kernel, std::size_t stride) {
  require_rank(x, 3, "max_pool2d");
  if (kernel == 0 || stride == 0) throw ConfigError("max_pool2d: kernel and stride must be positive");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (kernel > h || kernel > w) {
    throw DimensionError("max_pool2d: window " + std::to_string(kernel) + " larger than input " +
                         shape_to_string(x.shape()));
  }
  const std::size_t oh = (h - kernel) / stride + 1;
  const std::size_t ow = (w - kernel) / stride + 1;
  const auto X = x.data();
  std::vector<T> out(c * oh * ow);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (ch * h + oy * stride) * w + ox * stride;
        for (std::size_t ky = 0; ky < kernel; ++ky)
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::size_t idx = (ch * h + oy * stride + ky) * w + ox * stride + kx;
            if (X[idx] > X[best]) best = idx;
          }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        out[o] = X[best];
        (*argmax)[o] = best;
      }
  return make_op_result<T>("max_pool2d", {c, oh, ow}, std::move(out), {x}, [x, argmax](std::span<const T> g) {
    auto gx = grad_sink(x);
    for (std::size_t o = 0; o < g.size(); ++o) gx[(*argmax)[o]] += g[o];
  });
}

template <typename T>
BasicTensor<T> adaptive_avg_pool2d(const BasicTensor<T>& x, std::size_t out_h, std::size_t out_w) {
  require_rank(x, 3, "adaptive_avg_pool2d");
  if (out_h == 0 || out_w == 0) throw ConfigError("adaptive_avg_pool2d: target extents must be positive");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  auto bin = [](std::size_t i, std::size_t in, std::size_t out) {
    return std::pair{i * in / out, ((i + 1) * in + out - 1) / out};
  };
  const auto X = x.data();
  std::vector<T> out(c * out_h * out_w);
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < out_h; ++oy)
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const auto [y0, y1] = bin(oy, h, out_h);
        const auto [x0, x1] = bin(ox, w, out_w);
        T acc{0};
        for (std::size_t yy = y0; yy < y1; ++yy)
          for (std::size_t xx = x0; xx < x1; ++xx) acc += X[(ch * h + yy) * w + xx];
        out[(ch * out_h + oy) * out_w + ox] = acc / static_cast<T>((y1 - y0) * (x1 - x0));
      }
  return make_op_result<T>("adaptive_avg_pool2d", {c, out_h, out_w}, std::move(out), {x},
                           [x, c, h, w, out_h, out_w, bin](std::span<const T> g) {
                             auto gx = grad_sink(x);
                             for (std::size_t ch = 0; ch < c; ++ch)
                               for (std::size_t oy = 0; oy < out_h; ++oy)
                                 for (std::size_t ox = 0; ox < out_w; ++ox) {
                                   const auto [y0, y1] = bin(oy, h, out_h);
                                   const auto [x0, x1] = bin(ox, w, out_w);
                                   const T share = g[(ch * out_h + oy) * out_w + ox] /
                                                   static_cast<T>((y1 - y0) * (x1 - x0));
                                   for (std::size_t yy = y0; yy < y1; ++yy)
                                     for (std::size_t xx = x0; xx < x1; ++xx) gx[(ch * h + yy) * w + xx] += share;
                                 }
                           });
}

template <typename T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of an empty list");
  const Shape& first = parts.front().shape();
  require_axis(parts.front(), axis, "concat");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool compatible = s.size() == first.size();
    for (std::size_t d = 0; compatible && d < s.size(); ++d) compatible = d == axis || s[d] == first[d];
    if (!compatible) {
      throw DimensionError("concat along axis " + std::to_string(axis) + ": " + shape_to_string(first) +
                           " vs " + shape_to_string(s));
    }
    out_shape[axis] += s[axis];
  }
  const auto total = split_at(out_shape, axis);
  std::vector<T> out(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::size_t block = p.dim(axis) * total.inner;
    const auto P = p.data();
    for (std::size_t o = 0; o < total.outer; ++o)
      std::copy_n(P.data() + o * block, block, out.data() + o * total.extent * total.inner + offset * total.inner);
    offset += p.dim(axis);
  }
  return make_op_result<T>("concat", std::move(out_shape), std::move(out), parts,
                           [parts, offsets, total, axis](std::span<const T> g) {
                             for (std::size_t k = 0; k < parts.size(); ++k) {
                               auto gp = grad_sink(parts[k]);
                               if (gp.empty()) continue;
                               const std::size_t block = parts[k].dim(axis) * total.inner;
                               for (std::size_t o = 0; o < total.outer; ++o) {
                                 const T* src = g.data() + o * total.extent * total.inner + offsets[k] * total.inner;
                                 for (std::size_t j = 0; j < block; ++j) gp[o * block + j] += src[j];
                               }
                             }
                           });
}

template <typename T>
BasicTensor<T> embedding_lookup(const BasicTensor<T>& table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "embedding_lookup");
  if (ids.empty()) throw ContractError("embedding_lookup with no ids");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  const auto W = table.data();
  std::vector<T> out(ids.size() * width);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vocab) {
      throw DimensionError("embedding_lookup: id " + std::to_string(ids[r]) + " outside table of " +
                           std::to_string(vocab) + " rows");
    }
    std::copy_n(W.data() + ids[r] * width, width, out.data() + r * width);
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  return make_op_result<T>("embedding_lookup", {ids.size(), width}, std::move(out), {table},
                           [table, rows, width](std::span<const T> g) {
                             auto gt = grad_sink(table);
                             for (std::size_t r = 0; r < rows.size(); ++r)
                               for (std::size_t j = 0; j < width; ++j) gt[rows[r] * width + j] += g[r * width + j];
                           });
}

template <typename T>
BasicTensor<T> slice(const BasicTensor<T>& x, std::size_t axis, std::size_t start, std::size_t length) {
  require_axis(x, axis, "slice");
  if (length == 0 || start + length > x.dim(axis)) {
    throw DimensionError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                         ") outside axis " + std::to_string(axis) + " of " + shape_to_string(x.shape()));
  }
  const auto s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  const auto X = x.data();
  std::vector<T> out(s.outer * length * s.inner);
  for (std::size_t o = 0; o < s.outer; ++o)
    std::copy_n(X.data() + (o * s.extent + start) * s.inner, length * s.inner, out.data() + o * length * s.inner);
  return make_op_result<T>("slice", std::move(out_shape), std::move(out), {x},
                           [x, s, start, length](std::span<const T> g) {
                             auto gx = grad_sink(x);
                             for (std::size_t o = 0; o < s.outer; ++o)
                               for (std::size_t j = 0; j < length * s.inner; ++j)
                                 gx[(o * s.extent + start) * s.inner + j] += g[o * length * s.inner + j];
                           });
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape " + shape_to_string(x.shape()) + " -> " + shape_to_string(shape) +
                         " changes the element count");
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_op_result<T>("reshape", std::move(shape), std::move(out), {x}, [x](std::span<const T> g) {
    auto gx = grad_sink(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
  });
}

#define GAZEFUSE_INSTANTIATE_OPS(T)                                                                         \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);                             \
  template BasicTensor<T> transpose(const BasicTensor<T>&);                                                 \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                                \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                                \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                                  \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                                       \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                                      \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                                      \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                                   \
  template BasicTensor<T> softmax(const BasicTensor<T>&, std::size_t);                                      \
  template BasicTensor<T> layer_norm(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                     double);                                                               \
  template BasicTensor<T> dropout(const BasicTensor<T>&, double, bool, Rng*);                               \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,       \
                                 std::size_t, std::size_t);                                                 \
  template BasicTensor<T> max_pool2d(const BasicTensor<T>&, std::size_t, std::size_t);                      \
  template BasicTensor<T> adaptive_avg_pool2d(const BasicTensor<T>&, std::size_t, std::size_t);             \
  template BasicTensor<T> concat(const std::vector<BasicTensor<T>>&, std::size_t);                          \
  template BasicTensor<T> embedding_lookup(const BasicTensor<T>&, std::span<const std::size_t>);            \
  template BasicTensor<T> slice(const BasicTensor<T>&, std::size_t, std::size_t, std::size_t);              \
  template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);

GAZEFUSE_INSTANTIATE_OPS(float)
GAZEFUSE_INSTANTIATE_OPS(double)

#undef GAZEFUSE_INSTANTIATE_OPS

}  // namespace gazefuse::ops
