#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

namespace strokegen::tensor {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

/// Dense row-major array. Rank 1 tensors behave as a single row.
template <std::floating_point T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, std::vector<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::size_t rows() const { return shape_.size() >= 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  std::span<T> data() { return values_; }
  std::span<const T> data() const { return values_; }
  T* raw() { return values_.data(); }
  const T* raw() const { return values_.data(); }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  T& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<T> row(std::size_t r) { return std::span<T>(values_).subspan(r * cols(), cols()); }
  std::span<const T> row(std::size_t r) const { return std::span<const T>(values_).subspan(r * cols(), cols()); }

  void fill(T v);
  bool all_finite() const;

  template <std::floating_point U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(values_.begin(), values_.end()));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<T> values_;
};

/// Boolean 2-D mask; allowed(i, j) == true keeps entry (i, j).
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<unsigned char> allowed;

  bool allows(std::size_t r, std::size_t c) const { return allowed[r * cols + c] != 0; }
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace strokegen::tensor
