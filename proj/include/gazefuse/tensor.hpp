#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gazefuse {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

template <typename T>
class BasicTensor;

/// One recorded primitive application: the inputs it read and how to push
/// an output gradient back into them.
template <typename T>
struct TensorNode {
  const char* op = "";
  std::vector<BasicTensor<T>> inputs;
  std::function<void(std::span<const T> out_grad)> backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a gradient reaches this tensor
  bool requires_grad = false;
  std::shared_ptr<TensorNode<T>> producer;  // null for leaves
};

/// Dense row-major tensor with reverse-mode autodiff.
///
/// A tensor is a shared handle: copies alias the same storage and gradient.
/// Values produced by an op are immutable; only leaves expose mutable data
/// (parameters updated by an optimizer, or weights restored from disk).
///
/// The library computes in `float`. The `double` instantiation exists so
/// finite-difference oracles can run the same forward code in 64-bit.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  BasicTensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor full(Shape shape, T value, bool requires_grad = false);
  static BasicTensor scalar(T value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const T> data() const;
  /// Writable view of a leaf's values. Throws ContractError on op results.
  std::span<T> mutable_data();
  /// Value of a single-element tensor.
  T item() const;

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool is_leaf() const;
  bool has_grad() const;
  std::span<const T> grad() const;
  void zero_grad();

  /// Runs reverse-mode differentiation from this scalar. Leaf gradients
  /// accumulate across calls until zero_grad().
  void backward() const;

  /// Same values, no graph history, requires_grad off.
  BasicTensor detach() const;

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data().begin(), data().end());
    return BasicTensor<U>(shape(), std::move(out));
  }

  const char* op_name() const;
  const TensorImpl<T>* impl() const { return impl_.get(); }
  std::shared_ptr<TensorImpl<T>> shared_impl() const { return impl_; }

 private:
  explicit BasicTensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}
  void check_defined() const;

  std::shared_ptr<TensorImpl<T>> impl_;

  template <typename U>
  friend class ComputationTape;
  template <typename U>
  friend BasicTensor<U> make_op_result(const char*, Shape, std::vector<U>, std::vector<BasicTensor<U>>,
                                       std::function<void(std::span<const U>)>);
  template <typename U>
  friend std::span<U> grad_sink(const BasicTensor<U>&);
};

using Tensor = BasicTensor<float>;

/// Topologically ordered record of every op reachable from a root tensor.
/// Inputs always precede the tensors computed from them.
template <typename T>
class ComputationTape {
 public:
  explicit ComputationTape(const BasicTensor<T>& root);

  const std::vector<const TensorImpl<T>*>& order() const { return order_; }
  std::size_t size() const { return order_.size(); }

  /// Seeds d(root)/d(root) = 1 and visits recorded ops in reverse order.
  /// Returns the number of ops whose backward ran.
  std::size_t backward();

 private:
  std::shared_ptr<TensorImpl<T>> root_;
  std::vector<const TensorImpl<T>*> order_;
};

/// Builds the result of a primitive. Checks the values are finite and, when
/// any input requires a gradient (and grad mode is on), records the node.
template <typename T>
BasicTensor<T> make_op_result(const char* op, Shape shape, std::vector<T> data,
                              std::vector<BasicTensor<T>> inputs,
                              std::function<void(std::span<const T> out_grad)> backward);

/// Gradient buffer of an op input, allocated on first use. Empty when the
/// input does not take gradients.
template <typename T>
std::span<T> grad_sink(const BasicTensor<T>& t);

bool grad_mode_enabled();

/// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;
extern template class ComputationTape<float>;
extern template class ComputationTape<double>;

}  // namespace gazefuse
