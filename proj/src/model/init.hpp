#pragma once

#include <cmath>
#include <vector>

#include "gazefuse/rng.hpp"
#include "gazefuse/tensor.hpp"

namespace gazefuse::init {

// Draws go through float so the float and double instantiations of a model
// built from the same seed hold identical values.

template <typename T>
BasicTensor<T> fan_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(static_cast<float>(rng.uniform(-bound, bound)));
  return BasicTensor<T>(std::move(shape), std::move(v));
}

template <typename T>
BasicTensor<T> normal(Shape shape, double stddev, Rng& rng) {
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(static_cast<float>(stddev * rng.normal()));
  return BasicTensor<T>(std::move(shape), std::move(v));
}

template <typename T>
BasicTensor<T> constant(Shape shape, T value) {
  return BasicTensor<T>::full(std::move(shape), value);
}

}  // namespace gazefuse::init
