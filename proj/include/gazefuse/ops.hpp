#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gazefuse/rng.hpp"
#include "gazefuse/tensor.hpp"

/// Differentiable primitives. Every op validates shapes, produces finite
/// values or throws NumericError, and records itself on the tape when any
/// input requires a gradient. Reductions run in a fixed loop order.
namespace gazefuse::ops {

/// (m x k) * (k x n) -> (m x n).
template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// 2-D transpose.
template <typename T>
BasicTensor<T> transpose(const BasicTensor<T>& a);

/// Elementwise sum. `b` may also match a trailing block of `a`'s extents
/// (e.g. a bias row added to every row of a matrix).
template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Elementwise product, same broadcasting rule as add().
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T factor);

/// Sum of all elements as a one-element tensor.
template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& a);

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& a);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& a);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& a);

/// Max-subtracted softmax along `axis`.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x, std::size_t axis);

/// Normalizes over the last axis with population variance, eps inside the
/// square root, then applies gamma/beta (both shaped like the last axis).
template <typename T>
BasicTensor<T> layer_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                          double eps = 1e-5);

/// Inverted dropout. Identity in eval mode or when p == 0; in train mode
/// survivors are scaled by 1/(1-p). Throws ConfigError unless 0 <= p < 1.
template <typename T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double p, bool train, Rng* rng);

/// Cross-correlation of a (c_in x h x w) input with (c_out x c_in x kh x kw)
/// kernels. `bias` may be undefined; otherwise it has c_out entries.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& kernels, const BasicTensor<T>& bias,
                      std::size_t stride = 1, std::size_t padding = 0);

/// (c x h x w) -> (c x h' x w'), window `kernel`, step `stride`.
template <typename T>
BasicTensor<T> max_pool2d(const BasicTensor<T>& x, std::size_t kernel, std::size_t stride);

/// Averages (c x h x w) into (c x out_h x out_w) bins; the bin for output
/// index i spans [floor(i*h/out_h), ceil((i+1)*h/out_h)).
template <typename T>
BasicTensor<T> adaptive_avg_pool2d(const BasicTensor<T>& x, std::size_t out_h = 1, std::size_t out_w = 1);

template <typename T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, std::size_t axis);

/// Gathers rows of a (vocab x width) table.
template <typename T>
BasicTensor<T> embedding_lookup(const BasicTensor<T>& table, std::span<const std::size_t> ids);

/// `length` entries of `axis` starting at `start`.
template <typename T>
BasicTensor<T> slice(const BasicTensor<T>& x, std::size_t axis, std::size_t start, std::size_t length);

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape);

}  // namespace gazefuse::ops
