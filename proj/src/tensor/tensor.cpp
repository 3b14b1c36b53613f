#include "gazefuse/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "gazefuse/error.hpp"

namespace gazefuse {

namespace {
thread_local bool g_grad_mode = true;
}  // namespace

bool grad_mode_enabled() { return g_grad_mode; }

NoGradGuard::NoGradGuard() : previous_(g_grad_mode) { g_grad_mode = false; }
NoGradGuard::~NoGradGuard() { g_grad_mode = previous_; }

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (const auto extent : shape) n *= extent;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data, bool requires_grad)
    : impl_(std::make_shared<TensorImpl<T>>()) {
  for (const auto extent : shape) {
    if (extent == 0) throw DimensionError("tensor extents must be positive, got " + shape_to_string(shape));
  }
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("shape " + shape_to_string(shape) + " needs " + std::to_string(shape_numel(shape)) +
                         " values, got " + std::to_string(data.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T{0}, requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return BasicTensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::scalar(T value, bool requires_grad) {
  return BasicTensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
void BasicTensor<T>::check_defined() const {
  if (!impl_) throw ContractError("operation on an undefined tensor");
}

template <typename T>
const Shape& BasicTensor<T>::shape() const {
  check_defined();
  return impl_->shape;
}

template <typename T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_to_string(s));
  }
  return s[axis];
}

template <typename T>
std::size_t BasicTensor<T>::numel() const {
  check_defined();
  return impl_->data.size();
}

template <typename T>
std::span<const T> BasicTensor<T>::data() const {
  check_defined();
  return impl_->data;
}

template <typename T>
std::span<T> BasicTensor<T>::mutable_data() {
  check_defined();
  if (impl_->producer) {
    throw ContractError(std::string("values produced by '") + impl_->producer->op + "' are immutable");
  }
  return impl_->data;
}

template <typename T>
T BasicTensor<T>::item() const {
  check_defined();
  if (impl_->data.size() != 1) {
    throw ContractError("item() needs a single-element tensor, got " + shape_to_string(impl_->shape));
  }
  return impl_->data[0];
}

template <typename T>
bool BasicTensor<T>::requires_grad() const {
  check_defined();
  return impl_->requires_grad;
}

template <typename T>
void BasicTensor<T>::set_requires_grad(bool value) {
  check_defined();
  if (impl_->producer) throw ContractError("requires_grad can only be set on leaf tensors");
  impl_->requires_grad = value;
}

template <typename T>
bool BasicTensor<T>::is_leaf() const {
  check_defined();
  return impl_->producer == nullptr;
}

template <typename T>
bool BasicTensor<T>::has_grad() const {
  check_defined();
  return !impl_->grad.empty();
}

template <typename T>
std::span<const T> BasicTensor<T>::grad() const {
  check_defined();
  return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
  check_defined();
  impl_->grad.clear();
}

template <typename T>
void BasicTensor<T>::backward() const {
  ComputationTape<T> tape(*this);
  tape.backward();
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
  check_defined();
  return BasicTensor(impl_->shape, impl_->data);
}

template <typename T>
const char* BasicTensor<T>::op_name() const {
  check_defined();
  return impl_->producer ? impl_->producer->op : "leaf";
}

template <typename T>
ComputationTape<T>::ComputationTape(const BasicTensor<T>& root) : root_(root.impl_) {
  if (!root_) throw ContractError("backward on an undefined tensor");
  if (root_->data.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " + shape_to_string(root_->shape));
  }
  if (!root_->requires_grad) throw ContractError("loss does not depend on any tensor that requires grad");

  // Iterative post-order DFS: a tensor is emitted only after all its inputs.
  std::unordered_set<const TensorImpl<T>*> visited;
  std::vector<std::pair<const TensorImpl<T>*, std::size_t>> stack;
  stack.emplace_back(root_.get(), 0);
  visited.insert(root_.get());
  while (!stack.empty()) {
    auto& [node, next_input] = stack.back();
    const auto* producer = node->producer.get();
    if (producer && next_input < producer->inputs.size()) {
      const auto* input = producer->inputs[next_input++].impl();
      if (input->requires_grad && visited.insert(input).second) stack.emplace_back(input, 0);
      continue;
    }
    order_.push_back(node);
    stack.pop_back();
  }
}

template <typename T>
std::size_t ComputationTape<T>::backward() {
  // Interior gradients from a previous pass over the same graph are stale.
  for (const auto* node : order_) {
    if (node->producer) const_cast<TensorImpl<T>*>(node)->grad.clear();
  }
  auto& seed = root_->grad;
  if (seed.empty()) seed.assign(1, T{0});
  seed[0] += T{1};

  std::size_t visits = 0;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    const auto* node = *it;
    if (!node->producer || node->grad.empty()) continue;
    node->producer->backward(node->grad);
    ++visits;
  }
  return visits;
}

template <typename T>
BasicTensor<T> make_op_result(const char* op, Shape shape, std::vector<T> data, std::vector<BasicTensor<T>> inputs,
                              std::function<void(std::span<const T>)> backward) {
  for (const T v : data) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by '") + op + "'");
  }
  BasicTensor<T> out(std::move(shape), std::move(data));
  if (!grad_mode_enabled()) return out;
  bool needs_grad = false;
  for (const auto& input : inputs) needs_grad = needs_grad || input.requires_grad();
  if (!needs_grad) return out;

  auto node = std::make_shared<TensorNode<T>>();
  node->op = op;
  node->inputs = std::move(inputs);
  node->backward = std::move(backward);
  out.impl_->producer = std::move(node);
  out.impl_->requires_grad = true;
  return out;
}

template <typename T>
std::span<T> grad_sink(const BasicTensor<T>& t) {
  auto& impl = *t.impl_;
  if (!impl.requires_grad) return {};
  if (impl.grad.empty()) impl.grad.assign(impl.data.size(), T{0});
  return impl.grad;
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template class ComputationTape<float>;
template class ComputationTape<double>;
template BasicTensor<float> make_op_result(const char*, Shape, std::vector<float>, std::vector<BasicTensor<float>>,
                                           std::function<void(std::span<const float>)>);
template BasicTensor<double> make_op_result(const char*, Shape, std::vector<double>, std::vector<BasicTensor<double>>,
                                            std::function<void(std::span<const double>)>);
template std::span<float> grad_sink(const BasicTensor<float>&);
template std::span<double> grad_sink(const BasicTensor<double>&);

}  // namespace gazefuse
