#include "strokegen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "strokegen/errors.hpp"

namespace strokegen::tensor {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

template <std::floating_point T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

template <std::floating_point T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != element_count(shape_)) {
    throw ShapeError("tensor: " + std::to_string(values_.size()) + " values for a shape of " +
                     std::to_string(element_count(shape_)) + " elements");
  }
}

template <std::floating_point T>
void Tensor<T>::fill(T v) {
  std::fill(values_.begin(), values_.end(), v);
}

template <std::floating_point T>
bool Tensor<T>::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace strokegen::tensor
