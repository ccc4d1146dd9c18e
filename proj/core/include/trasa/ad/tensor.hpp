#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "trasa/errors.hpp"

namespace trasa::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major tensor. `T` is the element precision: float for
/// training, double for gradient checking.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  static Tensor scalar(T value) { return Tensor(Shape{1}, std::vector<T>{value}); }
  static Tensor vector(std::initializer_list<T> values);
  /// Row-major 2-D literal: `Tensor<double>::matrix({{1, 2}, {3, 4}})`.
  static Tensor matrix(std::initializer_list<std::initializer_list<T>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  /// Value of a single-element tensor.
  T item() const;

  /// Reinterpret with a new shape of the same element count.
  void reshape(Shape shape);

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  /// True once a backward pass has written a gradient here.
  bool has_grad() const { return !grad_.empty(); }
  std::span<const T> grad() const { return grad_; }
  std::span<T> grad() { return grad_; }
  /// Gradient buffer, allocated as zeros on first use.
  std::vector<T>& grad_buffer();
  void zero_grad();
  void clear_grad() { grad_.clear(); }

 private:
  Shape shape_;
  std::vector<T> data_;
  bool requires_grad_ = false;
  std::vector<T> grad_;
};

/// Convert between precisions (used to run gradient checks on a float model).
template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& src) {
  std::vector<To> data(src.data().begin(), src.data().end());
  Tensor<To> out(src.shape(), std::move(data));
  out.set_requires_grad(src.requires_grad());
  return out;
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace trasa::ad
