#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gazefuse/error.hpp"
#include "gazefuse/tensor.hpp"

namespace gazefuse {

/// Insertion-ordered set of named trainable tensors.
template <typename T>
class ParameterStore {
 public:
  using Entry = std::pair<std::string, BasicTensor<T>>;

  const BasicTensor<T>& add(std::string name, BasicTensor<T> value) {
    for (const auto& [existing, _] : entries_) {
      if (existing == name) throw ContractError("duplicate parameter name '" + name + "'");
    }
    value.set_requires_grad(true);
    entries_.emplace_back(std::move(name), std::move(value));
    return entries_.back().second;
  }

  const BasicTensor<T>& get(std::string_view name) const {
    for (const auto& [n, t] : entries_)
      if (n == name) return t;
    throw LookupError("no parameter named '" + std::string(name) + "'");
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : entries_) n += t.numel();
    return n;
  }

  void zero_grad() {
    for (auto& [_, t] : entries_) t.zero_grad();
  }

  /// Copies values from another store with identical names and shapes,
  /// converting the element type.
  template <typename U>
  void assign_from(const ParameterStore<U>& other) {
    if (other.size() != size()) throw ConfigError("parameter stores differ in size");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& [name, src] = other.entries()[i];
      auto& [dst_name, dst] = entries_[i];
      if (name != dst_name || src.shape() != dst.shape()) {
        throw ConfigError("parameter mismatch: '" + name + "' " + shape_to_string(src.shape()) + " vs '" +
                          dst_name + "' " + shape_to_string(dst.shape()));
      }
      auto out = dst.mutable_data();
      const auto in = src.data();
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<T>(in[j]);
    }
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace gazefuse
